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

#ifndef REMIX_DATA_HPP
#define REMIX_DATA_HPP

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "remix/random.hpp"
#include "remix/types.hpp"

namespace remix {

struct Dataset {
  std::vector<LabeledSample> samples;
  std::vector<std::string> class_names;
  FeatureShape shape;

  [[nodiscard]] std::size_t size() const { return samples.size(); }
  [[nodiscard]] std::size_t num_classes() const { return class_names.size(); }
  /// Samples per class (zeros allowed; use ClassCounts for the strict form).
  [[nodiscard]] std::vector<std::size_t> class_histogram() const;
  [[nodiscard]] std::vector<std::size_t> labels() const;
  /// Throws DataError on an out-of-range label, a feature-size mismatch or a
  /// non-finite feature.
  void validate() const;
};

/// Two interleaving unit half circles: class 0 on (cos t, sin t), class 1 on
/// (1 - cos t, 0.5 - sin t), t ~ U[0, pi], plus N(0, noise_sd) per coordinate.
[[nodiscard]] Dataset make_two_moons(std::size_t n_per_class, double noise_sd, Rng& rng);

/// Concentric circles: class 0 radius 1.0, class 1 radius 0.5.
[[nodiscard]] Dataset make_two_circles(std::size_t n_per_class, double noise_sd, Rng& rng);

/// Isotropic Gaussians with sd 0.4 at (-1, -1) (class 0) and (1, 1) (class 1);
/// `noise_sd` adds extra jitter on top.
[[nodiscard]] Dataset make_two_blobs(std::size_t n_per_class, double noise_sd, Rng& rng);

/// Per-channel normalization applied after scaling CIFAR pixels to [0, 1].
inline constexpr std::array<double, 3> kCifarMean{0.4914, 0.4822, 0.4465};
inline constexpr std::array<double, 3> kCifarStd{0.2470, 0.2435, 0.2616};
inline constexpr std::size_t kCifarRecordBytes = 1 + 3 * 32 * 32;

/// Reads one CIFAR-10 binary batch file (label byte + 3072 CHW pixel bytes per
/// record). Throws IoError when the file cannot be opened, FormatError on a
/// partial record or a label > 9.
[[nodiscard]] Dataset load_cifar10_binary(const std::filesystem::path& path);

/// Concatenates several batch files.
[[nodiscard]] Dataset load_cifar10_binary(const std::vector<std::filesystem::path>& paths);

/// Random horizontal flip plus zero-padded random crop (`pad` pixels each side)
/// of a CHW image.
[[nodiscard]] std::vector<double> augment_image(const std::vector<double>& image, const FeatureShape& shape,
                                                std::size_t pad, Rng& rng);

/// CSV with header `x1,...,xD,label`.
void write_csv(std::ostream& os, const Dataset& dataset);

}  // namespace remix

#endif  // REMIX_DATA_HPP
