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

#include "remix/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "remix/errors.hpp"

namespace remix {

// ---------------------------------------------------------------------------
// SoftLabel / ClassCounts

SoftLabel::SoftLabel(std::vector<double> probs) : probs_(std::move(probs)) {}

SoftLabel SoftLabel::one_hot(std::size_t label, std::size_t num_classes) {
  if (label >= num_classes) {
    throw IndexError("class index " + std::to_string(label) + " out of range for " +
                     std::to_string(num_classes) + " classes");
  }
  std::vector<double> probs(num_classes, 0.0);
  probs[label] = 1.0;
  return SoftLabel{std::move(probs)};
}

bool SoftLabel::is_valid(double tolerance) const {
  if (probs_.empty()) return false;
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tolerance;
}

ClassCounts::ClassCounts(std::vector<std::size_t> counts) : counts_(std::move(counts)) {
  if (counts_.empty()) throw ParameterError("class counts must cover at least one class");
  for (std::size_t c = 0; c < counts_.size(); ++c) {
    if (counts_[c] == 0) {
      throw ParameterError("class " + std::to_string(c) + " has count 0; counts must be >= 1");
    }
  }
}

std::size_t ClassCounts::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

double ClassCounts::imbalance_ratio() const {
  const auto [lo, hi] = std::minmax_element(counts_.begin(), counts_.end());
  return static_cast<double>(*hi) / static_cast<double>(*lo);
}

// ---------------------------------------------------------------------------
// Method names

bool is_remix(MixMethod method) {
  return method == MixMethod::remix || method == MixMethod::remix_cutmix ||
         method == MixMethod::remix_manifold;
}

bool is_manifold(MixMethod method) {
  return method == MixMethod::manifold_mixup || method == MixMethod::remix_manifold;
}

bool is_cutmix(MixMethod method) {
  return method == MixMethod::cutmix || method == MixMethod::remix_cutmix;
}

std::string_view to_string(MixMethod method) {
  switch (method) {
    case MixMethod::mixup: return "mixup";
    case MixMethod::remix: return "remix";
    case MixMethod::cutmix: return "cutmix";
    case MixMethod::remix_cutmix: return "remix_cutmix";
    case MixMethod::manifold_mixup: return "manifold_mixup";
    case MixMethod::remix_manifold: return "remix_manifold";
  }
  return "unknown";
}

MixMethod parse_mix_method(std::string_view name) {
  for (auto m : {MixMethod::mixup, MixMethod::remix, MixMethod::cutmix, MixMethod::remix_cutmix,
                 MixMethod::manifold_mixup, MixMethod::remix_manifold}) {
    if (to_string(m) == name) return m;
  }
  throw ParameterError("unknown mixing method '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Operators

namespace {

void check_unit_interval(double value, const char* what) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ParameterError(std::string(what) + " must lie in [0, 1], got " + std::to_string(value));
  }
}

}  // namespace

double sample_lambda(double alpha, Rng& rng) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ParameterError("Beta concentration alpha must be positive, got " + std::to_string(alpha));
  }
  // Beta(a, a) as X / (X + Y) with X, Y ~ Gamma(a, 1).
  std::gamma_distribution<double> gamma(alpha, 1.0);
  const double x = gamma(rng);
  const double y = gamma(rng);
  const double sum = x + y;
  if (sum == 0.0) {
    // Both draws underflowed (tiny alpha); Beta(a, a) is then an even coin on {0, 1}.
    return std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? 0.0 : 1.0;
  }
  return x / sum;
}

std::vector<double> mix_features(std::span<const double> a, std::span<const double> b, double lambda) {
  if (a.size() != b.size()) {
    throw DimensionError("cannot mix feature vectors of size " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  }
  check_unit_interval(lambda, "feature mixing factor");
  std::vector<double> out(a.size());
  const double rest = 1.0 - lambda;
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = lambda * a[k] + rest * b[k];
  return out;
}

SoftLabel mix_labels(std::size_t first, std::size_t second, double lambda, std::size_t num_classes) {
  if (first >= num_classes || second >= num_classes) {
    throw IndexError("class index out of range for " + std::to_string(num_classes) + " classes");
  }
  check_unit_interval(lambda, "label mixing factor");
  if (first == second) return SoftLabel::one_hot(first, num_classes);
  std::vector<double> probs(num_classes, 0.0);
  probs[first] = lambda;
  probs[second] = 1.0 - lambda;
  return SoftLabel{std::move(probs)};
}

bool is_kappa_majority(std::size_t n_i, std::size_t n_j, double kappa) {
  if (n_i == 0 || n_j == 0) throw ParameterError("class counts must be >= 1");
  return static_cast<double>(n_i) / static_cast<double>(n_j) >= kappa;
}

double remix_label_factor(double lambda_x, std::size_t n_i, std::size_t n_j, double tau, double kappa) {
  if (n_i == 0 || n_j == 0) throw ParameterError("class counts must be >= 1");
  check_unit_interval(lambda_x, "lambda_x");
  check_unit_interval(tau, "tau");
  if (!(kappa >= 1.0)) throw ParameterError("kappa must be >= 1, got " + std::to_string(kappa));

  const double ratio = static_cast<double>(n_i) / static_cast<double>(n_j);
  if (ratio >= kappa && lambda_x < tau) return 0.0;
  if (ratio <= 1.0 / kappa && 1.0 - lambda_x < tau) return 1.0;
  return lambda_x;
}

double CutMask::area_fraction() const {
  return static_cast<double>(width * height) / static_cast<double>(image_width * image_height);
}

namespace {

// Places a segment of nominal length `length` on [0, extent) and clips it.
// Returns {start, clipped length}.
std::pair<std::size_t, std::size_t> place_segment(std::size_t extent, std::size_t length, Rng& rng) {
  if (length >= extent) return {0, extent};
  const auto center = static_cast<long long>(
      std::uniform_int_distribution<std::size_t>(0, extent - 1)(rng));
  const long long lo = std::max(0LL, center - static_cast<long long>(length / 2));
  const long long hi = std::min(static_cast<long long>(extent),
                                center - static_cast<long long>(length / 2) +
                                    static_cast<long long>(length));
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi - lo)};
}

}  // namespace

CutMask sample_cut_mask(std::size_t width, std::size_t height, double lambda, Rng& rng) {
  if (width == 0 || height == 0) throw ParameterError("image dimensions must be >= 1");
  check_unit_interval(lambda, "lambda");
  const double side = std::sqrt(1.0 - lambda);
  const auto box_w = static_cast<std::size_t>(std::llround(static_cast<double>(width) * side));
  const auto box_h = static_cast<std::size_t>(std::llround(static_cast<double>(height) * side));

  CutMask mask;
  mask.image_width = width;
  mask.image_height = height;
  const auto [x0, w] = place_segment(width, box_w, rng);
  const auto [y0, h] = place_segment(height, box_h, rng);
  mask.x0 = x0;
  mask.y0 = y0;
  // An empty extent on either axis means an empty box.
  mask.width = (w == 0 || h == 0) ? 0 : w;
  mask.height = (w == 0 || h == 0) ? 0 : h;
  return mask;
}

std::vector<double> apply_cut_mask(std::span<const double> first, std::span<const double> second,
                                   const FeatureShape& shape, const CutMask& mask) {
  if (first.size() != second.size() || first.size() != shape.size()) {
    throw DimensionError("CutMix operands do not match the feature shape");
  }
  if (shape.width != mask.image_width || shape.height != mask.image_height) {
    throw DimensionError("CutMix mask was drawn for a different image size");
  }
  std::vector<double> out(first.begin(), first.end());
  for (std::size_t c = 0; c < shape.channels; ++c) {
    for (std::size_t y = mask.y0; y < mask.y0 + mask.height; ++y) {
      const std::size_t row = (c * shape.height + y) * shape.width;
      for (std::size_t x = mask.x0; x < mask.x0 + mask.width; ++x) out[row + x] = second[row + x];
    }
  }
  return out;
}

std::vector<std::size_t> sample_partners(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

MixedBatch make_mixed_batch(std::span<const LabeledSample> batch, std::span<const std::size_t> partners,
                            const ClassCounts& counts, const MixSettings& settings, Rng& rng) {
  if (batch.empty()) throw ParameterError("cannot mix an empty batch");
  if (partners.size() != batch.size()) {
    throw DimensionError("partner list size does not match batch size");
  }
  const std::size_t num_classes = counts.num_classes();
  for (const auto& s : batch) {
    if (s.label >= num_classes) {
      throw IndexError("label " + std::to_string(s.label) + " has no class count");
    }
  }
  for (auto p : partners) {
    if (p >= batch.size()) throw IndexError("partner index out of range");
  }
  const bool manifold = is_manifold(settings.method);
  const bool cutmix = is_cutmix(settings.method);
  if (manifold && settings.manifold_layers == 0) {
    throw ParameterError("manifold mixing needs at least one eligible layer");
  }

  double lambda = sample_lambda(settings.alpha, rng);
  MixedBatch out;
  if (manifold) {
    out.manifold.emplace();
    out.manifold->layer =
        std::uniform_int_distribution<std::size_t>(0, settings.manifold_layers - 1)(rng);
    out.manifold->pairs.reserve(batch.size());
  } else {
    out.examples.reserve(batch.size());
  }

  std::optional<CutMask> mask;
  if (cutmix && !settings.per_pair_lambda) {
    mask = sample_cut_mask(settings.shape.width, settings.shape.height, lambda, rng);
  }

  for (std::size_t m = 0; m < batch.size(); ++m) {
    const LabeledSample& a = batch[m];
    const LabeledSample& b = batch[partners[m]];
    if (settings.per_pair_lambda && m > 0) lambda = sample_lambda(settings.alpha, rng);
    if (cutmix && settings.per_pair_lambda) {
      mask = sample_cut_mask(settings.shape.width, settings.shape.height, lambda, rng);
    }

    MixFactor factor;
    factor.feature = cutmix ? mask->effective_lambda() : lambda;
    factor.label = is_remix(settings.method)
                       ? remix_label_factor(factor.feature, counts[a.label], counts[b.label],
                                            settings.tau, settings.kappa)
                       : factor.feature;
    SoftLabel target = mix_labels(a.label, b.label, factor.label, num_classes);

    if (manifold) {
      out.manifold->pairs.push_back({m, partners[m], std::move(target), factor});
    } else if (cutmix) {
      out.examples.push_back(
          {apply_cut_mask(a.features, b.features, settings.shape, *mask), std::move(target), factor});
    } else {
      out.examples.push_back({mix_features(a.features, b.features, lambda), std::move(target), factor});
    }
  }
  return out;
}

}  // namespace remix
