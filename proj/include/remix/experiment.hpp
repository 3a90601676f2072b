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

#ifndef REMIX_EXPERIMENT_HPP
#define REMIX_EXPERIMENT_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "remix/data.hpp"
#include "remix/imbalance.hpp"
#include "remix/mixing.hpp"
#include "remix/model.hpp"

namespace remix {

/// Training method: plain ERM or one of the mixing operators.
enum class Method { erm, mixup, remix, cutmix, remix_cutmix, manifold_mixup, remix_manifold };

[[nodiscard]] std::string_view to_string(Method method);
[[nodiscard]] Method parse_method(std::string_view name);
/// Mixing operator behind a non-ERM method.
[[nodiscard]] MixMethod mix_method(Method method);

enum class DatasetKind { two_moons, two_circles, two_blobs, cifar10 };

[[nodiscard]] std::string_view to_string(DatasetKind kind);
[[nodiscard]] DatasetKind parse_dataset_kind(std::string_view name);

/// Every knob of one training run.
struct TrainPlan {
  Method method = Method::remix;
  double alpha = 1.0;
  double tau = 0.5;
  double kappa = 3.0;
  bool per_pair_lambda = false;

  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  OptimSpec optim{0.1, 0.9, 2e-4, {{150, 0.1}, {180, 0.1}}};
  DeferMode defer = DeferMode::none;
  /// Unset: first milestone epoch (0 without milestones).
  std::optional<std::size_t> defer_epoch;
  std::optional<double> beta;

  DatasetKind dataset = DatasetKind::two_moons;
  /// num_classes is taken from the dataset.
  ImbalanceSpec imbalance{ImbalanceKind::step, 10.0, 0.5, 2, 500};
  double noise_sd = 0.3;
  std::size_t eval_per_class = 500;
  std::filesystem::path data_dir;
  bool augment = true;

  std::vector<std::size_t> hidden_widths{64, 64};
  Activation activation = Activation::relu;

  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  std::size_t raster_resolution = 200;

  /// Throws ConfigError describing the first invalid field.
  void validate() const;
  [[nodiscard]] DeferredSchedule schedule() const;
};

/// `key = value` echo of the resolved plan.
void write_plan(std::ostream& os, const TrainPlan& plan);

/// Parses "e1:m1,e2:m2". Throws ConfigError on malformed input.
[[nodiscard]] std::vector<Milestone> parse_milestones(std::string_view text);
[[nodiscard]] std::vector<double> parse_real_list(std::string_view text);

struct EvalReport {
  std::size_t epoch = 0;
  double top1 = 0.0;
  std::vector<double> per_class_recall;
  /// confusion[true][predicted].
  std::vector<std::vector<std::size_t>> confusion;
  double train_loss = 0.0;
};

/// Argmax predictions (ties to the lower class) against labels. Classes
/// absent from the set get recall 0.
[[nodiscard]] EvalReport evaluate(const ModelState& state, const Dataset& eval_set, std::size_t epoch = 0);

struct PreparedData {
  Dataset train;
  Dataset eval;
  ClassCounts counts;
};

/// Builds the imbalanced training set and the balanced held-out set.
/// Throws DataError when data cannot be obtained.
[[nodiscard]] PreparedData prepare_data(const TrainPlan& plan);

struct TrainingRun {
  ModelState model;
  std::vector<EvalReport> reports;
  std::vector<std::size_t> steps_per_epoch;
  ClassProfile profile;
  /// Number of (class-i, class-j) pairs in which the Remix rule set the label
  /// factor to 0 or 1 against the feature factor.
  std::size_t relabeled_pairs = 0;
};

/// Runs the training loop on prepared data. Throws TrainingFault (with epoch
/// and batch context) on any failure inside the loop.
[[nodiscard]] TrainingRun train(const TrainPlan& plan, const Dataset& train_set, const Dataset& eval_set);

/// prepare_data + train, then writes outputs when plan.out_dir is set.
[[nodiscard]] TrainingRun run_training(const TrainPlan& plan);

/// Classes whose training count equals the minimum count.
[[nodiscard]] std::vector<std::size_t> minority_classes(const ClassCounts& counts);
[[nodiscard]] double mean_recall(const EvalReport& report, std::span<const std::size_t> classes);

struct Bounds {
  double x_min = -1.0;
  double x_max = 1.0;
  double y_min = -1.0;
  double y_max = 1.0;
};

/// Data extent padded by `margin` on every side.
[[nodiscard]] Bounds bounds_of(const Dataset& dataset, double margin = 0.5);

/// resolution x resolution grid of predicted classes. Row 0 is the top
/// (y_max) edge; cell centers are sampled.
struct Raster {
  std::size_t resolution = 0;
  Bounds bounds;
  std::size_t num_classes = 0;
  std::vector<std::size_t> classes;

  [[nodiscard]] std::size_t at(std::size_t row, std::size_t col) const { return classes[row * resolution + col]; }
  [[nodiscard]] std::array<double, 2> cell_center(std::size_t row, std::size_t col) const;
};

/// Throws ParameterError for a model whose input width is not 2 or a zero resolution.
[[nodiscard]] Raster export_boundary_raster(const ModelState& state, const Bounds& bounds, std::size_t resolution);
void write_raster_csv(std::ostream& os, const Raster& raster);
/// Binary (P5) PGM; class c maps to gray 255 * c / (C - 1).
void write_raster_pgm(std::ostream& os, const Raster& raster);

void write_metrics_csv(std::ostream& os, std::span<const EvalReport> reports);
void write_confusion_csv(std::ostream& os, const EvalReport& report);

/// Writes metrics.csv, confusion_final.csv, plan.txt, profile.txt, model.rmxm
/// and, for 2D data, boundary.csv, boundary.pgm and train.csv into out_dir.
void write_outputs(const std::filesystem::path& out_dir, const TrainPlan& plan, const PreparedData& data,
                   const TrainingRun& run);

struct SweepRow {
  double tau = 0.0;
  bool ok = false;
  double top1 = 0.0;
  double minority_recall = 0.0;
  std::string error;
};

/// One run_training per tau with the base plan's seed. A failing cell is
/// marked and the sweep continues. Cells run on up to `threads` workers; the
/// table order follows `taus`.
[[nodiscard]] std::vector<SweepRow> run_tau_sweep(const TrainPlan& base_plan, std::span<const double> taus,
                                                  std::size_t threads = 1);
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);

}  // namespace remix

#endif  // REMIX_EXPERIMENT_HPP
