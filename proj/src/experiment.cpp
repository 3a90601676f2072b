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

#include "remix/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "remix/errors.hpp"

namespace remix {

// ---------------------------------------------------------------------------
// Names

std::string_view to_string(Method method) {
  switch (method) {
    case Method::erm: return "erm";
    case Method::mixup: return "mixup";
    case Method::remix: return "remix";
    case Method::cutmix: return "cutmix";
    case Method::remix_cutmix: return "remix_cutmix";
    case Method::manifold_mixup: return "manifold_mixup";
    case Method::remix_manifold: return "remix_manifold";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (auto m : {Method::erm, Method::mixup, Method::remix, Method::cutmix, Method::remix_cutmix,
                 Method::manifold_mixup, Method::remix_manifold}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

MixMethod mix_method(Method method) {
  switch (method) {
    case Method::mixup: return MixMethod::mixup;
    case Method::remix: return MixMethod::remix;
    case Method::cutmix: return MixMethod::cutmix;
    case Method::remix_cutmix: return MixMethod::remix_cutmix;
    case Method::manifold_mixup: return MixMethod::manifold_mixup;
    case Method::remix_manifold: return MixMethod::remix_manifold;
    case Method::erm: break;
  }
  throw ParameterError("ERM has no mixing operator");
}

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::two_moons: return "two_moons";
    case DatasetKind::two_circles: return "two_circles";
    case DatasetKind::two_blobs: return "two_blobs";
    case DatasetKind::cifar10: return "cifar10";
  }
  return "unknown";
}

DatasetKind parse_dataset_kind(std::string_view name) {
  for (auto k : {DatasetKind::two_moons, DatasetKind::two_circles, DatasetKind::two_blobs, DatasetKind::cifar10}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown dataset '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Plan

void TrainPlan::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha must be > 0");
  if (!(tau >= 0.0 && tau <= 1.0)) fail("tau must lie in [0, 1]");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) fail("kappa must be >= 1");
  if (epochs < 1) fail("epochs must be >= 1");
  if (batch_size < 1) fail("batch size must be >= 1");
  if (imbalance.n_max < 1) fail("n_max must be >= 1");
  if (!(imbalance.rho >= 1.0) || !std::isfinite(imbalance.rho)) fail("rho must be >= 1");
  if (imbalance.kind == ImbalanceKind::step && !(imbalance.mu > 0.0 && imbalance.mu < 1.0)) {
    fail("mu must lie in (0, 1)");
  }
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) fail("noise must be >= 0");
  if (eval_per_class < 1) fail("eval set needs at least one sample per class");
  if (beta && !(*beta >= 0.0 && *beta < 1.0)) fail("beta must lie in [0, 1)");
  if (hidden_widths.empty()) fail("at least one hidden layer is required");
  for (auto w : hidden_widths) {
    if (w == 0) fail("hidden widths must be positive");
  }
  if (dataset == DatasetKind::cifar10 && data_dir.empty()) fail("cifar10 needs a data directory");
  try {
    optim.validate();
  } catch (const ParameterError& e) {
    fail(e.what());
  }
}

DeferredSchedule TrainPlan::schedule() const {
  DeferredSchedule s;
  s.mode = defer;
  s.phase_boundary_epoch = defer_epoch.value_or(optim.milestones.empty() ? 0 : optim.milestones.front().epoch);
  return s;
}

namespace {

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

void write_plan(std::ostream& os, const TrainPlan& plan) {
  os << "method = " << to_string(plan.method) << '\n'
     << "alpha = " << format_real(plan.alpha) << '\n'
     << "tau = " << format_real(plan.tau) << '\n'
     << "kappa = " << format_real(plan.kappa) << '\n'
     << "per_pair_lambda = " << (plan.per_pair_lambda ? "true" : "false") << '\n'
     << "epochs = " << plan.epochs << '\n'
     << "batch_size = " << plan.batch_size << '\n'
     << "lr = " << format_real(plan.optim.lr) << '\n'
     << "momentum = " << format_real(plan.optim.momentum) << '\n'
     << "weight_decay = " << format_real(plan.optim.weight_decay) << '\n'
     << "milestones = ";
  for (std::size_t m = 0; m < plan.optim.milestones.size(); ++m) {
    os << (m ? "," : "") << plan.optim.milestones[m].epoch << ':' << format_real(plan.optim.milestones[m].multiplier);
  }
  const auto schedule = plan.schedule();
  os << '\n'
     << "defer = " << to_string(schedule.mode) << '\n'
     << "defer_epoch = " << schedule.phase_boundary_epoch << '\n'
     << "beta = " << (plan.beta ? format_real(*plan.beta) : std::string("auto")) << '\n'
     << "dataset = " << to_string(plan.dataset) << '\n'
     << "imbalance = " << to_string(plan.imbalance.kind) << '\n'
     << "rho = " << format_real(plan.imbalance.rho) << '\n'
     << "mu = " << format_real(plan.imbalance.mu) << '\n'
     << "n_max = " << plan.imbalance.n_max << '\n'
     << "noise = " << format_real(plan.noise_sd) << '\n'
     << "eval_per_class = " << plan.eval_per_class << '\n'
     << "data_dir = " << plan.data_dir.string() << '\n'
     << "augment = " << (plan.augment ? "true" : "false") << '\n'
     << "hidden = ";
  for (std::size_t h = 0; h < plan.hidden_widths.size(); ++h) os << (h ? "," : "") << plan.hidden_widths[h];
  os << '\n'
     << "activation = " << to_string(plan.activation) << '\n'
     << "seed = " << plan.seed << '\n';
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find(sep, start);
    const auto stop = end == std::string_view::npos ? text.size() : end;
    parts.push_back(text.substr(start, stop - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::vector<Milestone> parse_milestones(std::string_view text) {
  std::vector<Milestone> out;
  if (text.empty()) return out;
  for (auto item : split(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw ConfigError("milestone '" + std::string(item) + "' is not of the form epoch:multiplier");
    }
    out.push_back({parse_number<std::size_t>(item.substr(0, colon), "milestone epoch"),
                   parse_number<double>(item.substr(colon + 1), "milestone multiplier")});
  }
  return out;
}

std::vector<double> parse_real_list(std::string_view text) {
  std::vector<double> out;
  if (text.empty()) return out;
  for (auto item : split(text, ',')) out.push_back(parse_number<double>(item, "number"));
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

EvalReport evaluate(const ModelState& state, const Dataset& eval_set, std::size_t epoch) {
  const std::size_t num_classes = state.num_classes();
  if (eval_set.shape.size() != state.input_width()) {
    throw DimensionError("evaluation features have width " + std::to_string(eval_set.shape.size()) +
                         ", model expects " + std::to_string(state.input_width()));
  }
  EvalReport report;
  report.epoch = epoch;
  report.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  std::size_t correct = 0;
  for (const auto& s : eval_set.samples) {
    if (s.label >= num_classes) throw IndexError("evaluation label outside the model's classes");
    const std::size_t predicted = predict(state, s.features);
    ++report.confusion[s.label][predicted];
    if (predicted == s.label) ++correct;
  }
  report.top1 = eval_set.samples.empty() ? 0.0
                                         : static_cast<double>(correct) / static_cast<double>(eval_set.size());
  report.per_class_recall.resize(num_classes, 0.0);
  for (std::size_t c = 0; c < num_classes; ++c) {
    std::size_t row = 0;
    for (auto v : report.confusion[c]) row += v;
    if (row > 0) report.per_class_recall[c] = static_cast<double>(report.confusion[c][c]) / static_cast<double>(row);
  }
  return report;
}

std::vector<std::size_t> minority_classes(const ClassCounts& counts) {
  const auto values = counts.values();
  const auto lowest = *std::min_element(values.begin(), values.end());
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (values[c] == lowest) out.push_back(c);
  }
  return out;
}

double mean_recall(const EvalReport& report, std::span<const std::size_t> classes) {
  if (classes.empty()) return 0.0;
  double sum = 0.0;
  for (auto c : classes) sum += report.per_class_recall.at(c);
  return sum / static_cast<double>(classes.size());
}

// ---------------------------------------------------------------------------
// Data

namespace {

// SplitMix64 finalizer; gives every consumer of the plan seed its own stream.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

enum Stream : std::uint64_t { kTrainData = 1, kEvalData, kSubsample, kInit, kTraining };

Dataset generate_toy(const TrainPlan& plan, std::size_t n_per_class, Rng& rng) {
  switch (plan.dataset) {
    case DatasetKind::two_moons: return make_two_moons(n_per_class, plan.noise_sd, rng);
    case DatasetKind::two_circles: return make_two_circles(n_per_class, plan.noise_sd, rng);
    case DatasetKind::two_blobs: return make_two_blobs(n_per_class, plan.noise_sd, rng);
    case DatasetKind::cifar10: break;
  }
  throw ParameterError("not a generated dataset");
}

}  // namespace

PreparedData prepare_data(const TrainPlan& plan) {
  Dataset base;
  Dataset eval;
  if (plan.dataset == DatasetKind::cifar10) {
    std::vector<std::filesystem::path> train_files;
    for (int b = 1; b <= 5; ++b) train_files.push_back(plan.data_dir / ("data_batch_" + std::to_string(b) + ".bin"));
    base = load_cifar10_binary(train_files);
    eval = load_cifar10_binary(plan.data_dir / "test_batch.bin");
  } else {
    Rng train_rng = make_rng(stream_seed(plan.seed, kTrainData));
    Rng eval_rng = make_rng(stream_seed(plan.seed, kEvalData));
    base = generate_toy(plan, plan.imbalance.n_max, train_rng);
    eval = generate_toy(plan, plan.eval_per_class, eval_rng);
  }
  base.validate();
  eval.validate();

  ImbalanceSpec spec = plan.imbalance;
  spec.num_classes = base.num_classes();
  ClassCounts counts = class_sizes(spec);
  Rng sub_rng = make_rng(stream_seed(plan.seed, kSubsample));
  Dataset train;
  train.class_names = base.class_names;
  train.shape = base.shape;
  train.samples = subsample(base.samples, counts, sub_rng);
  return PreparedData{std::move(train), std::move(eval), std::move(counts)};
}

// ---------------------------------------------------------------------------
// Training

namespace {

std::string where(std::size_t epoch, std::size_t step) {
  return "epoch " + std::to_string(epoch) + " batch " + std::to_string(step) + ": ";
}

double label_weight(const SoftLabel& target, std::span<const double> class_weights) {
  double w = 0.0;
  for (std::size_t c = 0; c < target.num_classes(); ++c) w += target[c] * class_weights[c];
  return w;
}

}  // namespace

TrainingRun train(const TrainPlan& plan, const Dataset& train_set, const Dataset& eval_set) {
  plan.validate();
  if (train_set.samples.empty()) throw DataError("training set is empty");
  if (train_set.shape != eval_set.shape) throw DataError("training and evaluation shapes differ");

  std::vector<std::size_t> hist = train_set.class_histogram();
  ClassCounts counts{hist};

  MlpSpec spec;
  spec.layer_widths.push_back(train_set.shape.size());
  spec.layer_widths.insert(spec.layer_widths.end(), plan.hidden_widths.begin(), plan.hidden_widths.end());
  spec.layer_widths.push_back(train_set.num_classes());
  spec.activation = plan.activation;
  spec.seed = stream_seed(plan.seed, kInit);

  TrainingRun run;
  run.model = ModelState::initialize(spec);
  run.profile = build_profile(counts, plan.beta);

  const DeferredSchedule schedule = plan.schedule();
  const std::vector<std::size_t> labels = train_set.labels();
  ClassBalancedSampler sampler(labels, run.profile);
  const std::vector<double> uniform_weights(counts.num_classes(), 1.0);

  MixSettings mix;
  if (plan.method != Method::erm) {
    mix.method = mix_method(plan.method);
    mix.alpha = plan.alpha;
    mix.tau = plan.tau;
    mix.kappa = plan.kappa;
    mix.per_pair_lambda = plan.per_pair_lambda;
    mix.shape = train_set.shape;
    mix.manifold_layers = run.model.num_layers();
  }
  const bool images = train_set.shape.height > 1 && train_set.shape.width > 1;

  Rng rng = make_rng(stream_seed(plan.seed, kTraining));
  const std::size_t n = train_set.size();
  const std::size_t steps = (n + plan.batch_size - 1) / plan.batch_size;
  std::vector<std::size_t> order(n);
  std::vector<LabeledSample> batch;
  std::size_t global_step = 0;

  for (std::size_t epoch = 0; epoch < plan.epochs; ++epoch) {
    const bool deferred = schedule_phase(epoch, schedule) == Phase::deferred;
    const bool resample = deferred && schedule.mode == DeferMode::drs;
    const std::span<const double> class_weights =
        deferred && schedule.mode == DeferMode::drw ? std::span<const double>(run.profile.weights)
                                                    : std::span<const double>(uniform_weights);
    if (!resample) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), rng);
    }

    double loss_sum = 0.0;
    for (std::size_t step = 0; step < steps; ++step, ++global_step) {
      try {
        const std::size_t size = std::min(plan.batch_size, n - step * plan.batch_size);
        batch.clear();
        for (std::size_t b = 0; b < size; ++b) {
          const std::size_t idx = resample ? sampler.draw(rng) : order[step * plan.batch_size + b];
          batch.push_back(train_set.samples[idx]);
          if (images && plan.augment) batch.back().features = augment_image(batch.back().features, train_set.shape, 4, rng);
        }

        BackwardResult result;
        const bool audit = global_step % 100 == 0;
        if (plan.method == Method::erm) {
          std::vector<WeightedExample> examples;
          examples.reserve(size);
          for (const auto& s : batch) {
            examples.push_back({s.features, SoftLabel::one_hot(s.label, counts.num_classes()), class_weights[s.label]});
          }
          result = backward(run.model, examples);
        } else {
          const auto partners = sample_partners(size, rng);
          MixedBatch mixed = make_mixed_batch(batch, partners, counts, mix, rng);
          if (mixed.manifold) {
            std::vector<ManifoldExample> examples;
            examples.reserve(size);
            for (auto& p : mixed.manifold->pairs) {
              if (audit && !p.target.is_valid()) throw TrainingFault("emitted soft label does not sum to 1");
              if (p.factor.label != p.factor.feature) ++run.relabeled_pairs;
              const double w = label_weight(p.target, class_weights);
              examples.push_back({batch[p.first].features, batch[p.second].features, p.factor.feature,
                                  std::move(p.target), w});
            }
            result = backward_manifold(run.model, mixed.manifold->layer, examples);
          } else {
            std::vector<WeightedExample> examples;
            examples.reserve(size);
            for (auto& ex : mixed.examples) {
              if (audit && !ex.target.is_valid()) throw TrainingFault("emitted soft label does not sum to 1");
              if (ex.factor.label != ex.factor.feature) ++run.relabeled_pairs;
              const double w = label_weight(ex.target, class_weights);
              examples.push_back({ex.features, ex.target, w});
            }
            result = backward(run.model, examples);
          }
        }
        if (!std::isfinite(result.mean_loss)) throw TrainingFault("non-finite loss");
        sgd_step(run.model, result.gradients, plan.optim, epoch);
        loss_sum += result.mean_loss;
      } catch (const DataError&) {
        throw;
      } catch (const Error& e) {
        throw TrainingFault(where(epoch, step) + e.what());
      }
    }
    run.steps_per_epoch.push_back(steps);
    EvalReport report = evaluate(run.model, eval_set, epoch);
    report.train_loss = loss_sum / static_cast<double>(steps);
    run.reports.push_back(std::move(report));
  }
  return run;
}

TrainingRun run_training(const TrainPlan& plan) {
  plan.validate();
  const PreparedData data = prepare_data(plan);
  TrainingRun run = train(plan, data.train, data.eval);
  if (!plan.out_dir.empty()) write_outputs(plan.out_dir, plan, data, run);
  return run;
}

// ---------------------------------------------------------------------------
// Raster

std::array<double, 2> Raster::cell_center(std::size_t row, std::size_t col) const {
  const double dx = (bounds.x_max - bounds.x_min) / static_cast<double>(resolution);
  const double dy = (bounds.y_max - bounds.y_min) / static_cast<double>(resolution);
  return {bounds.x_min + (static_cast<double>(col) + 0.5) * dx, bounds.y_max - (static_cast<double>(row) + 0.5) * dy};
}

Bounds bounds_of(const Dataset& dataset, double margin) {
  if (dataset.shape.size() != 2) throw ParameterError("bounds need 2D features");
  Bounds b{0.0, 0.0, 0.0, 0.0};
  bool first = true;
  for (const auto& s : dataset.samples) {
    if (first) {
      b = {s.features[0], s.features[0], s.features[1], s.features[1]};
      first = false;
    }
    b.x_min = std::min(b.x_min, s.features[0]);
    b.x_max = std::max(b.x_max, s.features[0]);
    b.y_min = std::min(b.y_min, s.features[1]);
    b.y_max = std::max(b.y_max, s.features[1]);
  }
  b.x_min -= margin;
  b.x_max += margin;
  b.y_min -= margin;
  b.y_max += margin;
  return b;
}

Raster export_boundary_raster(const ModelState& state, const Bounds& bounds, std::size_t resolution) {
  if (state.input_width() != 2) throw ParameterError("boundary rasters need a model with 2 inputs");
  if (resolution == 0) throw ParameterError("raster resolution must be >= 1");
  if (!(bounds.x_max > bounds.x_min) || !(bounds.y_max > bounds.y_min)) throw ParameterError("empty raster bounds");
  Raster raster;
  raster.resolution = resolution;
  raster.bounds = bounds;
  raster.num_classes = state.num_classes();
  raster.classes.resize(resolution * resolution);
  for (std::size_t r = 0; r < resolution; ++r) {
    for (std::size_t c = 0; c < resolution; ++c) {
      const auto point = raster.cell_center(r, c);
      raster.classes[r * resolution + c] = predict(state, point);
    }
  }
  return raster;
}

void write_raster_csv(std::ostream& os, const Raster& raster) {
  os << "row,col,x,y,class\n";
  const auto old_precision = os.precision(10);
  for (std::size_t r = 0; r < raster.resolution; ++r) {
    for (std::size_t c = 0; c < raster.resolution; ++c) {
      const auto p = raster.cell_center(r, c);
      os << r << ',' << c << ',' << p[0] << ',' << p[1] << ',' << raster.at(r, c) << '\n';
    }
  }
  os.precision(old_precision);
}

void write_raster_pgm(std::ostream& os, const Raster& raster) {
  os << "P5\n" << raster.resolution << ' ' << raster.resolution << "\n255\n";
  const std::size_t top = raster.num_classes > 1 ? raster.num_classes - 1 : 1;
  for (auto c : raster.classes) os.put(static_cast<char>(static_cast<unsigned char>(255 * c / top)));
}

// ---------------------------------------------------------------------------
// Reports

void write_metrics_csv(std::ostream& os, std::span<const EvalReport> reports) {
  os << "epoch,train_loss,top1";
  const std::size_t num_classes = reports.empty() ? 0 : reports.front().per_class_recall.size();
  for (std::size_t c = 0; c < num_classes; ++c) os << ",recall_" << c;
  os << '\n';
  const auto old_precision = os.precision(12);
  for (const auto& r : reports) {
    os << r.epoch << ',' << r.train_loss << ',' << r.top1;
    for (double v : r.per_class_recall) os << ',' << v;
    os << '\n';
  }
  os.precision(old_precision);
}

void write_confusion_csv(std::ostream& os, const EvalReport& report) {
  os << "true\\pred";
  for (std::size_t c = 0; c < report.confusion.size(); ++c) os << ',' << c;
  os << '\n';
  for (std::size_t r = 0; r < report.confusion.size(); ++r) {
    os << r;
    for (auto v : report.confusion[r]) os << ',' << v;
    os << '\n';
  }
}

namespace {

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(path, mode);
  if (!os) throw IoError("cannot write " + path.string());
  return os;
}

}  // namespace

void write_outputs(const std::filesystem::path& out_dir, const TrainPlan& plan, const PreparedData& data,
                   const TrainingRun& run) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  {
    auto os = open_output(out_dir / "metrics.csv");
    write_metrics_csv(os, run.reports);
  }
  if (!run.reports.empty()) {
    auto os = open_output(out_dir / "confusion_final.csv");
    write_confusion_csv(os, run.reports.back());
  }
  {
    auto os = open_output(out_dir / "plan.txt");
    write_plan(os, plan);
  }
  {
    auto os = open_output(out_dir / "profile.txt");
    write_profile_report(os, run.profile);
  }
  save_model(run.model, out_dir / "model.rmxm");
  if (data.train.shape.size() == 2) {
    Bounds bounds = bounds_of(data.eval);
    const Raster raster = export_boundary_raster(run.model, bounds, plan.raster_resolution);
    {
      auto os = open_output(out_dir / "boundary.csv");
      write_raster_csv(os, raster);
    }
    {
      auto os = open_output(out_dir / "boundary.pgm", std::ios::out | std::ios::binary);
      write_raster_pgm(os, raster);
    }
    auto os = open_output(out_dir / "train.csv");
    write_csv(os, data.train);
  }
}

// ---------------------------------------------------------------------------
// Sweep

std::vector<SweepRow> run_tau_sweep(const TrainPlan& base_plan, std::span<const double> taus, std::size_t threads) {
  if (base_plan.method == Method::erm || !is_remix(mix_method(base_plan.method))) {
    throw ConfigError("a tau sweep needs a remix method");
  }
  base_plan.validate();
  const PreparedData data = prepare_data(base_plan);
  const auto minority = minority_classes(data.counts);

  std::vector<SweepRow> rows(taus.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t cell = next++; cell < taus.size(); cell = next++) {
      SweepRow& row = rows[cell];
      row.tau = taus[cell];
      try {
        TrainPlan plan = base_plan;
        plan.tau = taus[cell];
        plan.out_dir.clear();
        const TrainingRun run = train(plan, data.train, data.eval);
        row.top1 = run.reports.back().top1;
        row.minority_recall = mean_recall(run.reports.back(), minority);
        row.ok = true;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, taus.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << "tau,top1,minority_recall,status\n";
  const auto old_precision = os.precision(12);
  for (const auto& r : rows) {
    os << r.tau << ',';
    if (r.ok) {
      os << r.top1 << ',' << r.minority_recall << ",ok\n";
    } else {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      os << ",,failed: " << msg << '\n';
    }
  }
  os.precision(old_precision);
}

}  // namespace remix
