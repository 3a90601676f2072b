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

#ifndef REMIX_IMBALANCE_HPP
#define REMIX_IMBALANCE_HPP

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "remix/random.hpp"
#include "remix/types.hpp"

namespace remix {

enum class ImbalanceKind { long_tailed, step };

[[nodiscard]] std::string_view to_string(ImbalanceKind kind);
[[nodiscard]] ImbalanceKind parse_imbalance_kind(std::string_view name);

struct ImbalanceSpec {
  ImbalanceKind kind = ImbalanceKind::step;
  double rho = 10.0;
  /// Fraction of minority classes; step imbalance only.
  double mu = 0.5;
  std::size_t num_classes = 2;
  std::size_t n_max = 500;
};

/// counts[i] = round(n_max * rho^(-i/(C-1))), clamped to >= 1.
[[nodiscard]] ClassCounts long_tailed_sizes(std::size_t n_max, std::size_t num_classes, double rho);

/// The leading C - floor(mu*C) classes get n_max samples, the rest round(n_max/rho).
[[nodiscard]] ClassCounts step_sizes(std::size_t n_max, std::size_t num_classes, double rho, double mu);

/// Dispatches on spec.kind.
[[nodiscard]] ClassCounts class_sizes(const ImbalanceSpec& spec);

/// Per class, a uniform subset of exactly target[c] samples, returned in
/// shuffled order. Throws DataError naming the first class that is short.
[[nodiscard]] std::vector<LabeledSample> subsample(std::span<const LabeledSample> dataset,
                                                   const ClassCounts& target, Rng& rng);

/// (1 - beta^n) / (1 - beta). Throws ParameterError unless 0 <= beta < 1 and n >= 1.
[[nodiscard]] double effective_number(std::size_t n, double beta);

/// Class-balanced statistics derived from class counts.
struct ClassProfile {
  ClassCounts counts;
  double beta = 0.0;
  std::vector<double> effective_numbers;
  /// Proportional to 1 / effective number; mean 1 over classes.
  std::vector<double> weights;
  /// Class draw probabilities such that each sample is drawn with
  /// probability proportional to 1 / effective number of its class.
  std::vector<double> sample_probs;
};

/// beta defaults to (N - 1) / N with N the total count.
[[nodiscard]] ClassProfile build_profile(const ClassCounts& counts,
                                         std::optional<double> beta_override = std::nullopt);

/// Writes one `key=value` line per class: class, count, effective_number,
/// weight, sample_prob.
void write_profile_report(std::ostream& os, const ClassProfile& profile);

/// Class-then-member re-sampler: draws a class from profile.sample_probs,
/// then a uniform member of that class. Draws are with replacement.
class ClassBalancedSampler {
 public:
  /// `labels[k]` is the class of dataset item k. Throws DataError when a class
  /// with nonzero probability has no members.
  ClassBalancedSampler(std::span<const std::size_t> labels, const ClassProfile& profile);

  /// Index of the next drawn dataset item.
  [[nodiscard]] std::size_t draw(Rng& rng);
  /// Class-only draw, for frequency tests.
  [[nodiscard]] std::size_t draw_class(Rng& rng);

 private:
  std::discrete_distribution<std::size_t> class_dist_;
  std::vector<std::vector<std::size_t>> members_;
};

enum class DeferMode { none, drw, drs };

[[nodiscard]] std::string_view to_string(DeferMode mode);
[[nodiscard]] DeferMode parse_defer_mode(std::string_view name);

struct DeferredSchedule {
  std::size_t phase_boundary_epoch = 0;
  DeferMode mode = DeferMode::none;
};

enum class Phase { erm, deferred };

/// erm until phase_boundary_epoch (or always when mode is none), deferred from it on.
[[nodiscard]] Phase schedule_phase(std::size_t epoch, const DeferredSchedule& schedule);

}  // namespace remix

#endif  // REMIX_IMBALANCE_HPP
