// Copyright 2026 The Remix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "remix/model.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "remix/errors.hpp"
#include "remix/random.hpp"

namespace remix {

std::string_view to_string(Activation activation) {
  return activation == Activation::relu ? "relu" : "tanh";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw ParameterError("unknown activation '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// ModelState

ModelState::ModelState(std::vector<DenseLayer> layers, Activation activation)
    : layers_(std::move(layers)), activation_(activation) {
  if (layers_.empty()) throw DimensionError("a model needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.bias.size() != layer.weight.rows()) {
      throw DimensionError("layer " + std::to_string(l) + ": bias size does not match weight rows");
    }
    if (l > 0 && layer.weight.cols() != layers_[l - 1].weight.rows()) {
      throw DimensionError("layer " + std::to_string(l) + ": input width does not match previous layer");
    }
  }
  velocity_ = zeros_like();
}

ModelState ModelState::initialize(const MlpSpec& spec) {
  const auto& widths = spec.layer_widths;
  if (widths.size() < 3) {
    throw ParameterError("an MLP needs input, output and at least one hidden layer");
  }
  for (auto w : widths) {
    if (w == 0) throw ParameterError("layer widths must be positive");
  }
  Rng rng = make_rng(spec.seed);
  std::vector<DenseLayer> layers;
  layers.reserve(widths.size() - 1);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto fan_in = static_cast<double>(widths[l]);
    const auto fan_out = static_cast<double>(widths[l + 1]);
    const double limit = spec.activation == Activation::relu ? std::sqrt(6.0 / fan_in)
                                                             : std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer{Eigen::MatrixXd(widths[l + 1], widths[l]), Eigen::VectorXd::Zero(widths[l + 1])};
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
    }
    layers.push_back(std::move(layer));
  }
  return ModelState{std::move(layers), spec.activation};
}

std::size_t ModelState::input_width() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weight.cols());
}

std::size_t ModelState::num_classes() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.back().weight.rows());
}

bool ModelState::all_finite() const {
  for (const auto& layer : layers_) {
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

Gradients ModelState::zeros_like() const {
  Gradients out;
  out.reserve(layers_.size());
  for (const auto& layer : layers_) {
    out.push_back({Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()),
                   Eigen::VectorXd::Zero(layer.bias.size())});
  }
  return out;
}

bool ModelState::operator==(const ModelState& other) const {
  auto same = [](const std::vector<DenseLayer>& a, const std::vector<DenseLayer>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t l = 0; l < a.size(); ++l) {
      if (a[l].weight.rows() != b[l].weight.rows() || a[l].weight.cols() != b[l].weight.cols() ||
          a[l].bias.size() != b[l].bias.size()) {
        return false;
      }
      if (a[l].weight != b[l].weight || a[l].bias != b[l].bias) return false;
    }
    return true;
  };
  return activation_ == other.activation_ && same(layers_, other.layers_) &&
         same(velocity_, other.velocity_);
}

// ---------------------------------------------------------------------------
// Forward

namespace {

Eigen::VectorXd pre_activation(const DenseLayer& layer, const Eigen::VectorXd& a) {
  Eigen::VectorXd z = layer.weight * a + layer.bias;
  return z;
}

Eigen::VectorXd activate(Activation activation, const Eigen::VectorXd& z) {
  if (activation == Activation::relu) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

// d act(z) / dz, given z and act(z).
Eigen::VectorXd activation_slope(Activation activation, const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
  if (activation == Activation::relu) {
    return (z.array() > 0.0).cast<double>().matrix();
  }
  return (1.0 - a.array().square()).matrix();
}

Eigen::VectorXd apply_layer(const ModelState& state, std::size_t l, const Eigen::VectorXd& a) {
  Eigen::VectorXd z = pre_activation(state.layers()[l], a);
  if (l + 1 == state.num_layers()) return z;
  return activate(state.activation(), z);
}

Eigen::VectorXd to_vector(const ModelState& state, std::span<const double> x) {
  if (x.size() != state.input_width()) {
    throw DimensionError("input has width " + std::to_string(x.size()) + ", model expects " +
                         std::to_string(state.input_width()));
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k) v[static_cast<Eigen::Index>(k)] = x[k];
  return v;
}

// Activations a_l and pre-activations z_l recorded over a layer range,
// indexed by absolute layer number.
struct Trace {
  std::vector<Eigen::VectorXd> act;  // a_0 .. a_L
  std::vector<Eigen::VectorXd> pre;  // z_0 .. z_{L-1}
};

// Runs layers [from, to) starting from activation a_from, recording into trace.
void run_traced(const ModelState& state, Eigen::VectorXd start, std::size_t from, std::size_t to,
                Trace& trace) {
  const std::size_t num_layers = state.num_layers();
  trace.act.resize(num_layers + 1);
  trace.pre.resize(num_layers);
  trace.act[from] = std::move(start);
  for (std::size_t l = from; l < to; ++l) {
    trace.pre[l] = pre_activation(state.layers()[l], trace.act[l]);
    trace.act[l + 1] =
        (l + 1 == num_layers) ? trace.pre[l] : activate(state.activation(), trace.pre[l]);
  }
}

// Backpropagates d loss / d a_top through layers [bottom, top), accumulating
// parameter gradients, and returns d loss / d a_bottom.
Eigen::VectorXd backprop(const ModelState& state, const Trace& trace, std::size_t bottom, std::size_t top,
                         Eigen::VectorXd grad, Gradients& grads) {
  const std::size_t num_layers = state.num_layers();
  for (std::size_t l = top; l-- > bottom;) {
    Eigen::VectorXd dz = (l + 1 == num_layers)
                             ? grad
                             : Eigen::VectorXd(grad.cwiseProduct(
                                   activation_slope(state.activation(), trace.pre[l], trace.act[l + 1])));
    grads[l].weight.noalias() += dz * trace.act[l].transpose();
    grads[l].bias += dz;
    grad = state.layers()[l].weight.transpose() * dz;
  }
  return grad;
}

void check_layer(const ModelState& state, std::size_t k) {
  if (k >= state.num_layers()) {
    throw ParameterError("layer index " + std::to_string(k) + " must be < " +
                         std::to_string(state.num_layers()));
  }
}

void check_target(const ModelState& state, const SoftLabel& target) {
  if (target.num_classes() != state.num_classes()) {
    throw DimensionError("target has " + std::to_string(target.num_classes()) + " classes, model has " +
                         std::to_string(state.num_classes()));
  }
}

Eigen::VectorXd softmax_minus_target(const Eigen::VectorXd& logits, const SoftLabel& target) {
  Eigen::VectorXd g = log_softmax(logits).array().exp().matrix();
  for (Eigen::Index c = 0; c < g.size(); ++c) g[c] -= target[static_cast<std::size_t>(c)];
  return g;
}

}  // namespace

Eigen::VectorXd forward(const ModelState& state, std::span<const double> x) {
  return resume_from(state, to_vector(state, x), 0);
}

Eigen::VectorXd forward_split(const ModelState& state, std::span<const double> x, std::size_t k) {
  check_layer(state, k);
  Eigen::VectorXd a = to_vector(state, x);
  for (std::size_t l = 0; l < k; ++l) a = apply_layer(state, l, a);
  return a;
}

Eigen::VectorXd resume_from(const ModelState& state, const Eigen::VectorXd& hidden, std::size_t k) {
  check_layer(state, k);
  const auto expected = state.layers()[k].weight.cols();
  if (hidden.size() != expected) {
    throw DimensionError("activation at layer " + std::to_string(k) + " has width " +
                         std::to_string(hidden.size()) + ", expected " + std::to_string(expected));
  }
  Eigen::VectorXd a = hidden;
  for (std::size_t l = k; l < state.num_layers(); ++l) a = apply_layer(state, l, a);
  return a;
}

std::size_t argmax(const Eigen::VectorXd& logits) {
  std::size_t best = 0;
  for (Eigen::Index c = 1; c < logits.size(); ++c) {
    if (logits[c] > logits[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(c);
  }
  return best;
}

std::size_t predict(const ModelState& state, std::span<const double> x) {
  return argmax(forward(state, x));
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
  const double top = logits.maxCoeff();
  Eigen::VectorXd shifted = logits.array() - top;
  const double log_sum = std::log(shifted.array().exp().sum());
  return (shifted.array() - log_sum).matrix();
}

double soft_cross_entropy(const Eigen::VectorXd& logits, const SoftLabel& target, double weight) {
  if (static_cast<std::size_t>(logits.size()) != target.num_classes()) {
    throw DimensionError("logits and target disagree on the class count");
  }
  const Eigen::VectorXd log_probs = log_softmax(logits);
  double loss = 0.0;
  for (Eigen::Index c = 0; c < log_probs.size(); ++c) {
    const double t = target[static_cast<std::size_t>(c)];
    if (t != 0.0) loss -= t * log_probs[c];
  }
  return weight * loss;
}

// ---------------------------------------------------------------------------
// Backward

BackwardResult backward(const ModelState& state, std::span<const WeightedExample> batch) {
  if (batch.empty()) throw ParameterError("cannot differentiate an empty batch");
  BackwardResult result{state.zeros_like(), 0.0};
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  const std::size_t num_layers = state.num_layers();
  Trace trace;
  for (const auto& ex : batch) {
    check_target(state, ex.target);
    run_traced(state, to_vector(state, ex.features), 0, num_layers, trace);
    const Eigen::VectorXd& logits = trace.act[num_layers];
    result.mean_loss += soft_cross_entropy(logits, ex.target, ex.weight) * inv_batch;
    Eigen::VectorXd grad = softmax_minus_target(logits, ex.target) * (ex.weight * inv_batch);
    backprop(state, trace, 0, num_layers, std::move(grad), result.gradients);
  }
  return result;
}

BackwardResult backward_manifold(const ModelState& state, std::size_t k,
                                 std::span<const ManifoldExample> batch) {
  if (batch.empty()) throw ParameterError("cannot differentiate an empty batch");
  check_layer(state, k);
  BackwardResult result{state.zeros_like(), 0.0};
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  const std::size_t num_layers = state.num_layers();
  Trace first;
  Trace second;
  Trace mixed;
  for (const auto& ex : batch) {
    check_target(state, ex.target);
    run_traced(state, to_vector(state, ex.first), 0, k, first);
    run_traced(state, to_vector(state, ex.second), 0, k, second);
    Eigen::VectorXd hidden = ex.lambda * first.act[k] + (1.0 - ex.lambda) * second.act[k];
    run_traced(state, std::move(hidden), k, num_layers, mixed);
    const Eigen::VectorXd& logits = mixed.act[num_layers];
    result.mean_loss += soft_cross_entropy(logits, ex.target, ex.weight) * inv_batch;
    Eigen::VectorXd grad = softmax_minus_target(logits, ex.target) * (ex.weight * inv_batch);
    const Eigen::VectorXd d_hidden = backprop(state, mixed, k, num_layers, std::move(grad), result.gradients);
    backprop(state, first, 0, k, ex.lambda * d_hidden, result.gradients);
    backprop(state, second, 0, k, (1.0 - ex.lambda) * d_hidden, result.gradients);
  }
  return result;
}

double batch_loss(const ModelState& state, std::span<const WeightedExample> batch) {
  if (batch.empty()) throw ParameterError("cannot evaluate an empty batch");
  double loss = 0.0;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    loss += soft_cross_entropy(forward(state, ex.features), ex.target, ex.weight) * inv_batch;
  }
  return loss;
}

double batch_loss_manifold(const ModelState& state, std::size_t k, std::span<const ManifoldExample> batch) {
  if (batch.empty()) throw ParameterError("cannot evaluate an empty batch");
  double loss = 0.0;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    const Eigen::VectorXd hidden = ex.lambda * forward_split(state, ex.first, k) +
                                   (1.0 - ex.lambda) * forward_split(state, ex.second, k);
    loss += soft_cross_entropy(resume_from(state, hidden, k), ex.target, ex.weight) * inv_batch;
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Optimizer

void OptimSpec::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ParameterError("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ParameterError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ParameterError("weight decay must be >= 0");
  }
  for (std::size_t m = 0; m < milestones.size(); ++m) {
    if (!(milestones[m].multiplier > 0.0 && milestones[m].multiplier <= 1.0)) {
      throw ParameterError("milestone multipliers must lie in (0, 1]");
    }
    if (m > 0 && milestones[m].epoch <= milestones[m - 1].epoch) {
      throw ParameterError("milestone epochs must be strictly increasing");
    }
  }
}

double learning_rate(const OptimSpec& optim, std::size_t epoch) {
  double lr = optim.lr;
  for (const auto& m : optim.milestones) {
    if (epoch >= m.epoch) lr *= m.multiplier;
  }
  return lr;
}

void sgd_step(ModelState& state, const Gradients& gradients, const OptimSpec& optim, std::size_t epoch) {
  auto& layers = state.layers();
  if (gradients.size() != layers.size()) throw DimensionError("gradient layer count mismatch");
  const double lr = learning_rate(optim, epoch);
  std::vector<DenseLayer> next_params(layers.size());
  std::vector<DenseLayer> next_velocity(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& p = layers[l];
    const auto& g = gradients[l];
    const auto& v = state.velocity()[l];
    if (g.weight.rows() != p.weight.rows() || g.weight.cols() != p.weight.cols() ||
        g.bias.size() != p.bias.size()) {
      throw DimensionError("gradient shape mismatch at layer " + std::to_string(l));
    }
    next_velocity[l].weight = optim.momentum * v.weight + (g.weight + optim.weight_decay * p.weight);
    next_velocity[l].bias = optim.momentum * v.bias + (g.bias + optim.weight_decay * p.bias);
    next_params[l].weight = p.weight - lr * next_velocity[l].weight;
    next_params[l].bias = p.bias - lr * next_velocity[l].bias;
    if (!next_params[l].weight.allFinite() || !next_params[l].bias.allFinite() ||
        !next_velocity[l].weight.allFinite() || !next_velocity[l].bias.allFinite()) {
      throw TrainingFault("non-finite parameter update at layer " + std::to_string(l) + " in epoch " +
                          std::to_string(epoch));
    }
  }
  layers = std::move(next_params);
  state.velocity() = std::move(next_velocity);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr std::array<char, 4> kMagic{'R', 'M', 'X', 'M'};

void write_u32(std::ostream& os, std::uint32_t v) {
  std::array<char, 4> bytes{};
  for (std::size_t b = 0; b < 4; ++b) bytes[b] = static_cast<char>((v >> (8 * b)) & 0xFFu);
  os.write(bytes.data(), bytes.size());
}

void write_f64(std::ostream& os, double value) {
  const auto v = std::bit_cast<std::uint64_t>(value);
  std::array<char, 8> bytes{};
  for (std::size_t b = 0; b < 8; ++b) bytes[b] = static_cast<char>((v >> (8 * b)) & 0xFFu);
  os.write(bytes.data(), bytes.size());
}

template <std::size_t N>
std::array<unsigned char, N> read_bytes(std::istream& is, const char* what) {
  std::array<char, N> raw{};
  const auto offset = static_cast<long long>(is.tellg());
  if (!is.read(raw.data(), N)) {
    throw FormatError(std::string("model file truncated while reading ") + what + " at byte " +
                      std::to_string(offset));
  }
  std::array<unsigned char, N> out{};
  for (std::size_t b = 0; b < N; ++b) out[b] = static_cast<unsigned char>(raw[b]);
  return out;
}

std::uint32_t read_u32(std::istream& is, const char* what) {
  const auto bytes = read_bytes<4>(is, what);
  std::uint32_t v = 0;
  for (std::size_t b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[b]) << (8 * b);
  return v;
}

double read_f64(std::istream& is) {
  const auto bytes = read_bytes<8>(is, "parameters");
  std::uint64_t v = 0;
  for (std::size_t b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  return std::bit_cast<double>(v);
}

}  // namespace

void save_model(const ModelState& state, std::ostream& os) {
  os.write(kMagic.data(), kMagic.size());
  write_u32(os, kModelFormatVersion);
  write_u32(os, state.activation() == Activation::relu ? 0u : 1u);
  write_u32(os, static_cast<std::uint32_t>(state.num_layers()));
  for (const auto& layer : state.layers()) {
    write_u32(os, static_cast<std::uint32_t>(layer.weight.rows()));
    write_u32(os, static_cast<std::uint32_t>(layer.weight.cols()));
  }
  for (const auto& layer : state.layers()) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) write_f64(os, layer.weight(r, c));
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) write_f64(os, layer.bias[r]);
  }
  if (!os) throw IoError("failed to write model");
}

void save_model(const ModelState& state, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  save_model(state, os);
}

ModelState load_model(std::istream& is) {
  const auto magic = read_bytes<4>(is, "magic");
  for (std::size_t b = 0; b < 4; ++b) {
    if (magic[b] != static_cast<unsigned char>(kMagic[b])) throw FormatError("not an RMXM model file");
  }
  const auto version = read_u32(is, "version");
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version));
  }
  const auto activation_code = read_u32(is, "activation");
  if (activation_code > 1) throw FormatError("unknown activation code " + std::to_string(activation_code));
  const auto num_layers = read_u32(is, "layer count");
  if (num_layers == 0 || num_layers > 1024) {
    throw FormatError("implausible layer count " + std::to_string(num_layers));
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> dims(num_layers);
  for (auto& [rows, cols] : dims) {
    rows = read_u32(is, "layer rows");
    cols = read_u32(is, "layer cols");
    if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 20)) {
      throw FormatError("implausible layer shape");
    }
  }
  std::vector<DenseLayer> layers;
  layers.reserve(num_layers);
  for (const auto& [rows, cols] : dims) {
    DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = read_f64(is);
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = read_f64(is);
    layers.push_back(std::move(layer));
  }
  try {
    return ModelState{std::move(layers), activation_code == 0 ? Activation::relu : Activation::tanh};
  } catch (const DimensionError& e) {
    throw FormatError(std::string("inconsistent layer shapes: ") + e.what());
  }
}

ModelState load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return load_model(is);
}

}  // namespace remix
