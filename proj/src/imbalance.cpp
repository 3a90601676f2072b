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

#include "remix/imbalance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "remix/errors.hpp"

namespace remix {

std::string_view to_string(ImbalanceKind kind) {
  return kind == ImbalanceKind::long_tailed ? "longtail" : "step";
}

ImbalanceKind parse_imbalance_kind(std::string_view name) {
  if (name == "longtail" || name == "long_tailed") return ImbalanceKind::long_tailed;
  if (name == "step") return ImbalanceKind::step;
  throw ParameterError("unknown imbalance kind '" + std::string(name) + "'");
}

namespace {

void check_common(std::size_t n_max, std::size_t num_classes, double rho) {
  if (n_max < 1) throw ParameterError("n_max must be >= 1");
  if (num_classes < 2) throw ParameterError("imbalanced datasets need at least 2 classes");
  if (!(rho >= 1.0) || !std::isfinite(rho)) {
    throw ParameterError("imbalance ratio rho must be >= 1, got " + std::to_string(rho));
  }
}

std::size_t rounded_count(double value) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(value)));
}

}  // namespace

ClassCounts long_tailed_sizes(std::size_t n_max, std::size_t num_classes, double rho) {
  check_common(n_max, num_classes, rho);
  std::vector<std::size_t> counts(num_classes);
  const double last = static_cast<double>(num_classes - 1);
  for (std::size_t i = 0; i < num_classes; ++i) {
    counts[i] = rounded_count(static_cast<double>(n_max) * std::pow(rho, -static_cast<double>(i) / last));
  }
  return ClassCounts{std::move(counts)};
}

ClassCounts step_sizes(std::size_t n_max, std::size_t num_classes, double rho, double mu) {
  check_common(n_max, num_classes, rho);
  if (!(mu > 0.0 && mu < 1.0)) {
    throw ParameterError("minority fraction mu must lie in (0, 1), got " + std::to_string(mu));
  }
  // The epsilon guards mu*C products such as 0.3*10 = 2.9999999999999996.
  const auto minority = static_cast<std::size_t>(std::floor(mu * static_cast<double>(num_classes) + 1e-9));
  const std::size_t majority = num_classes - minority;
  std::vector<std::size_t> counts(num_classes, n_max);
  const std::size_t small = rounded_count(static_cast<double>(n_max) / rho);
  for (std::size_t i = majority; i < num_classes; ++i) counts[i] = small;
  return ClassCounts{std::move(counts)};
}

ClassCounts class_sizes(const ImbalanceSpec& spec) {
  return spec.kind == ImbalanceKind::long_tailed
             ? long_tailed_sizes(spec.n_max, spec.num_classes, spec.rho)
             : step_sizes(spec.n_max, spec.num_classes, spec.rho, spec.mu);
}

std::vector<LabeledSample> subsample(std::span<const LabeledSample> dataset, const ClassCounts& target,
                                     Rng& rng) {
  std::vector<std::vector<std::size_t>> by_class(target.num_classes());
  for (std::size_t k = 0; k < dataset.size(); ++k) {
    const std::size_t label = dataset[k].label;
    if (label >= target.num_classes()) {
      throw DataError("sample " + std::to_string(k) + " has label " + std::to_string(label) +
                      " outside the " + std::to_string(target.num_classes()) + " target classes");
    }
    by_class[label].push_back(k);
  }
  std::vector<std::size_t> chosen;
  chosen.reserve(target.total());
  for (std::size_t c = 0; c < target.num_classes(); ++c) {
    auto& members = by_class[c];
    if (members.size() < target[c]) {
      throw DataError("class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                      " samples but " + std::to_string(target[c]) + " were requested");
    }
    // Partial Fisher-Yates: the first target[c] slots become a uniform subset.
    for (std::size_t k = 0; k < target[c]; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, members.size() - 1);
      std::swap(members[k], members[pick(rng)]);
    }
    chosen.insert(chosen.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(target[c]));
  }
  std::shuffle(chosen.begin(), chosen.end(), rng);

  std::vector<LabeledSample> out;
  out.reserve(chosen.size());
  for (auto k : chosen) out.push_back(dataset[k]);
  return out;
}

double effective_number(std::size_t n, double beta) {
  if (n < 1) throw ParameterError("effective number needs n >= 1");
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw ParameterError("beta must lie in [0, 1), got " + std::to_string(beta));
  }
  return (1.0 - std::pow(beta, static_cast<double>(n))) / (1.0 - beta);
}

ClassProfile build_profile(const ClassCounts& counts, std::optional<double> beta_override) {
  ClassProfile profile;
  profile.counts = counts;
  const auto total = static_cast<double>(counts.total());
  profile.beta = beta_override.value_or((total - 1.0) / total);

  const std::size_t num_classes = counts.num_classes();
  profile.effective_numbers.resize(num_classes);
  profile.weights.resize(num_classes);
  profile.sample_probs.resize(num_classes);
  double weight_sum = 0.0;
  double prob_sum = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const double en = effective_number(counts[c], profile.beta);
    profile.effective_numbers[c] = en;
    profile.weights[c] = 1.0 / en;
    profile.sample_probs[c] = static_cast<double>(counts[c]) / en;
    weight_sum += profile.weights[c];
    prob_sum += profile.sample_probs[c];
  }
  const double weight_scale = static_cast<double>(num_classes) / weight_sum;
  for (std::size_t c = 0; c < num_classes; ++c) {
    profile.weights[c] *= weight_scale;
    profile.sample_probs[c] /= prob_sum;
  }
  return profile;
}

void write_profile_report(std::ostream& os, const ClassProfile& profile) {
  const auto old_precision = os.precision(12);
  os << "beta=" << profile.beta << '\n';
  for (std::size_t c = 0; c < profile.counts.num_classes(); ++c) {
    os << "class=" << c << " count=" << profile.counts[c]
       << " effective_number=" << profile.effective_numbers[c] << " weight=" << profile.weights[c]
       << " sample_prob=" << profile.sample_probs[c] << '\n';
  }
  os.precision(old_precision);
}

ClassBalancedSampler::ClassBalancedSampler(std::span<const std::size_t> labels, const ClassProfile& profile)
    : class_dist_(profile.sample_probs.begin(), profile.sample_probs.end()),
      members_(profile.sample_probs.size()) {
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] >= members_.size()) {
      throw DataError("label " + std::to_string(labels[k]) + " has no sampling probability");
    }
    members_[labels[k]].push_back(k);
  }
  for (std::size_t c = 0; c < members_.size(); ++c) {
    if (members_[c].empty() && profile.sample_probs[c] > 0.0) {
      throw DataError("class " + std::to_string(c) + " has no samples to draw from");
    }
  }
}

std::size_t ClassBalancedSampler::draw_class(Rng& rng) { return class_dist_(rng); }

std::size_t ClassBalancedSampler::draw(Rng& rng) {
  const auto& members = members_[draw_class(rng)];
  return members[std::uniform_int_distribution<std::size_t>(0, members.size() - 1)(rng)];
}

std::string_view to_string(DeferMode mode) {
  switch (mode) {
    case DeferMode::none: return "none";
    case DeferMode::drw: return "drw";
    case DeferMode::drs: return "drs";
  }
  return "unknown";
}

DeferMode parse_defer_mode(std::string_view name) {
  if (name == "none") return DeferMode::none;
  if (name == "drw") return DeferMode::drw;
  if (name == "drs") return DeferMode::drs;
  throw ParameterError("unknown deferral mode '" + std::string(name) + "'");
}

Phase schedule_phase(std::size_t epoch, const DeferredSchedule& schedule) {
  if (schedule.mode == DeferMode::none || epoch < schedule.phase_boundary_epoch) return Phase::erm;
  return Phase::deferred;
}

}  // namespace remix
