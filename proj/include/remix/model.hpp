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

#ifndef REMIX_MODEL_HPP
#define REMIX_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "remix/types.hpp"

/**
 * \file
 * \brief Fully-connected classifier with hand-written backpropagation,
 * soft-label cross-entropy and momentum SGD.
 *
 * Layer l maps activation a_l to a_{l+1} = act(W_l a_l + b_l); the last layer
 * is linear and yields logits. Layer index k in forward_split / resume_from
 * names the activation a_k, so k = 0 is the raw input.
 */

namespace remix {

enum class Activation { relu, tanh };

[[nodiscard]] std::string_view to_string(Activation activation);
[[nodiscard]] Activation parse_activation(std::string_view name);

struct MlpSpec {
  /// input width, hidden widths..., class count.
  std::vector<std::size_t> layer_widths;
  Activation activation = Activation::relu;
  std::uint64_t seed = 0;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Same shapes as the model parameters.
using Gradients = std::vector<DenseLayer>;

class ModelState {
 public:
  ModelState() = default;
  /// Zero momentum buffers. Throws DimensionError when consecutive layers do not chain.
  ModelState(std::vector<DenseLayer> layers, Activation activation);

  /// He-uniform (relu) or Xavier-uniform (tanh) weights, zero biases.
  /// Throws ParameterError unless the spec has >= 1 hidden layer and positive widths.
  static ModelState initialize(const MlpSpec& spec);

  [[nodiscard]] std::size_t num_layers() const { return layers_.size(); }
  [[nodiscard]] std::size_t input_width() const;
  [[nodiscard]] std::size_t num_classes() const;
  [[nodiscard]] Activation activation() const { return activation_; }

  [[nodiscard]] const std::vector<DenseLayer>& layers() const { return layers_; }
  [[nodiscard]] std::vector<DenseLayer>& layers() { return layers_; }
  [[nodiscard]] const std::vector<DenseLayer>& velocity() const { return velocity_; }
  [[nodiscard]] std::vector<DenseLayer>& velocity() { return velocity_; }

  [[nodiscard]] bool all_finite() const;
  [[nodiscard]] Gradients zeros_like() const;

  bool operator==(const ModelState& other) const;

 private:
  std::vector<DenseLayer> layers_;
  std::vector<DenseLayer> velocity_;
  Activation activation_ = Activation::relu;
};

/// Pre-softmax logits. Throws DimensionError on an input width mismatch.
[[nodiscard]] Eigen::VectorXd forward(const ModelState& state, std::span<const double> x);

/// Activation a_k. Throws ParameterError unless k < num_layers().
[[nodiscard]] Eigen::VectorXd forward_split(const ModelState& state, std::span<const double> x,
                                            std::size_t k);

/// Logits from activation a_k. resume_from(s, forward_split(s, x, k), k) equals forward(s, x) exactly.
[[nodiscard]] Eigen::VectorXd resume_from(const ModelState& state, const Eigen::VectorXd& hidden,
                                          std::size_t k);

/// Argmax of the logits; ties go to the lowest class index.
[[nodiscard]] std::size_t predict(const ModelState& state, std::span<const double> x);
[[nodiscard]] std::size_t argmax(const Eigen::VectorXd& logits);

/// Numerically stable log-softmax.
[[nodiscard]] Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);

/// -weight * sum_c target[c] * log_softmax(logits)[c].
[[nodiscard]] double soft_cross_entropy(const Eigen::VectorXd& logits, const SoftLabel& target,
                                        double weight = 1.0);

struct WeightedExample {
  std::span<const double> features;
  SoftLabel target;
  double weight = 1.0;
};

/// Pair whose activations at the plan's layer are mixed as
/// lambda * g(first) + (1 - lambda) * g(second).
struct ManifoldExample {
  std::span<const double> first;
  std::span<const double> second;
  double lambda = 1.0;
  SoftLabel target;
  double weight = 1.0;
};

struct BackwardResult {
  Gradients gradients;
  double mean_loss = 0.0;
};

/// Gradient of the batch-mean weighted loss. Throws ParameterError on an empty batch.
[[nodiscard]] BackwardResult backward(const ModelState& state, std::span<const WeightedExample> batch);

/// Same, for hidden-state mixing at layer k; gradient flows into both branches.
[[nodiscard]] BackwardResult backward_manifold(const ModelState& state, std::size_t k,
                                               std::span<const ManifoldExample> batch);

/// Batch-mean loss only; shares the forward path with backward.
[[nodiscard]] double batch_loss(const ModelState& state, std::span<const WeightedExample> batch);
[[nodiscard]] double batch_loss_manifold(const ModelState& state, std::size_t k,
                                         std::span<const ManifoldExample> batch);

struct Milestone {
  std::size_t epoch = 0;
  double multiplier = 1.0;
};

struct OptimSpec {
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 2e-4;
  std::vector<Milestone> milestones;

  /// Throws ParameterError on a bad value or non-increasing milestones.
  void validate() const;
};

/// Base lr times the multipliers of every milestone with epoch <= `epoch`.
[[nodiscard]] double learning_rate(const OptimSpec& optim, std::size_t epoch);

/// v <- momentum * v + (g + weight_decay * p); p <- p - lr(epoch) * v.
/// Throws TrainingFault if the update produces a non-finite value; the state
/// is left untouched in that case.
void sgd_step(ModelState& state, const Gradients& gradients, const OptimSpec& optim, std::size_t epoch);

/// Little-endian "RMXM" container of the parameters (momentum is not stored).
void save_model(const ModelState& state, std::ostream& os);
void save_model(const ModelState& state, const std::filesystem::path& path);
/// Throws FormatError on a bad magic, version or truncated body.
[[nodiscard]] ModelState load_model(std::istream& is);
[[nodiscard]] ModelState load_model(const std::filesystem::path& path);

inline constexpr std::uint32_t kModelFormatVersion = 1;

}  // namespace remix

#endif  // REMIX_MODEL_HPP
