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

#ifndef REMIX_MIXING_HPP
#define REMIX_MIXING_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "remix/random.hpp"
#include "remix/types.hpp"

/**
 * \file
 * \brief Sample-pair mixing operators: Mixup, Manifold Mixup, CutMix and the
 * Remix label rule that decouples the label factor from the feature factor.
 */

namespace remix {

/// Feature-space and label-space mixing factors for one mixed example.
/// Plain (non-Remix) operators always produce `label == feature`.
struct MixFactor {
  double feature = 1.0;
  double label = 1.0;
};

/// Post-clipping rectangle removed from the first image and filled from the
/// second. Coordinates are in pixels; the box is [x0, x0+width) x [y0, y0+height).
struct CutMask {
  std::size_t x0 = 0;
  std::size_t y0 = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t image_width = 1;
  std::size_t image_height = 1;

  /// Fraction of the image covered by the box.
  [[nodiscard]] double area_fraction() const;
  /// 1 - area_fraction(); the factor that must be used for CutMix labels.
  [[nodiscard]] double effective_lambda() const { return 1.0 - area_fraction(); }
  [[nodiscard]] bool contains(std::size_t x, std::size_t y) const {
    return x >= x0 && x < x0 + width && y >= y0 && y < y0 + height;
  }
};

enum class MixMethod { mixup, remix, cutmix, remix_cutmix, manifold_mixup, remix_manifold };

[[nodiscard]] bool is_remix(MixMethod method);
[[nodiscard]] bool is_manifold(MixMethod method);
[[nodiscard]] bool is_cutmix(MixMethod method);
[[nodiscard]] std::string_view to_string(MixMethod method);
/// Throws ParameterError on an unknown name.
[[nodiscard]] MixMethod parse_mix_method(std::string_view name);

/// Draws lambda ~ Beta(alpha, alpha). Throws ParameterError unless alpha > 0.
[[nodiscard]] double sample_lambda(double alpha, Rng& rng);

/// lambda * a + (1 - lambda) * b, elementwise.
[[nodiscard]] std::vector<double> mix_features(std::span<const double> a, std::span<const double> b,
                                               double lambda);

/// lambda on class `first`, 1 - lambda on class `second`.
[[nodiscard]] SoftLabel mix_labels(std::size_t first, std::size_t second, double lambda,
                                   std::size_t num_classes);

/// True iff n_i / n_j >= kappa.
[[nodiscard]] bool is_kappa_majority(std::size_t n_i, std::size_t n_j, double kappa);

/**
 * Remix label factor.
 *
 * Returns 0 when sample i is kappa-majority over j and lambda_x < tau (the
 * label goes entirely to the minority sample j), 1 when j is kappa-majority
 * over i and 1 - lambda_x < tau, and lambda_x otherwise. With tau = 0 the
 * result is always lambda_x.
 */
[[nodiscard]] double remix_label_factor(double lambda_x, std::size_t n_i, std::size_t n_j, double tau,
                                        double kappa);

/// Box of nominal size round(W*sqrt(1-lambda)) x round(H*sqrt(1-lambda)),
/// centered uniformly over the image and clipped to it. Along an axis where
/// the nominal box spans the whole image it is anchored at 0.
[[nodiscard]] CutMask sample_cut_mask(std::size_t width, std::size_t height, double lambda, Rng& rng);

/// Pixels inside the mask come from `second`, the rest from `first`, for
/// every channel.
[[nodiscard]] std::vector<double> apply_cut_mask(std::span<const double> first,
                                                 std::span<const double> second,
                                                 const FeatureShape& shape, const CutMask& mask);

/// Knobs consumed by make_mixed_batch.
struct MixSettings {
  MixMethod method = MixMethod::mixup;
  double alpha = 1.0;
  double tau = 0.5;
  double kappa = 3.0;
  /// Draw a fresh lambda (and CutMix box) for every pair instead of once per batch.
  bool per_pair_lambda = false;
  FeatureShape shape{};
  /// Number of layers eligible for Manifold Mixup (input plus hidden layers).
  std::size_t manifold_layers = 1;
};

/// A premixed training example.
struct MixedExample {
  std::vector<double> features;
  SoftLabel target;
  MixFactor factor;
};

/// Instruction for the model to mix hidden activations of batch[first] and
/// batch[second] at a given layer.
struct ManifoldPair {
  std::size_t first = 0;
  std::size_t second = 0;
  SoftLabel target;
  MixFactor factor;
};

struct ManifoldPlan {
  std::size_t layer = 0;
  std::vector<ManifoldPair> pairs;
};

/// Output of make_mixed_batch: premixed examples, or a manifold plan.
struct MixedBatch {
  std::vector<MixedExample> examples;
  std::optional<ManifoldPlan> manifold;
};

/// Uniform random permutation of 0..n-1 used as the pairing partner of each
/// batch position. Fixed points (self-pairs) are kept.
[[nodiscard]] std::vector<std::size_t> sample_partners(std::size_t n, Rng& rng);

/**
 * Mixes batch[m] with batch[partners[m]] for every m.
 *
 * One lambda_x is drawn per batch before the pair loop, unless
 * `settings.per_pair_lambda` is set. CutMix variants label with the
 * post-clipping factor of the drawn box. Manifold variants pick the layer
 * uniformly from [0, settings.manifold_layers) after drawing lambda.
 *
 * Throws ParameterError on an empty batch and IndexError when a label has no
 * entry in `counts`.
 */
[[nodiscard]] MixedBatch make_mixed_batch(std::span<const LabeledSample> batch,
                                          std::span<const std::size_t> partners,
                                          const ClassCounts& counts, const MixSettings& settings,
                                          Rng& rng);

}  // namespace remix

#endif  // REMIX_MIXING_HPP
