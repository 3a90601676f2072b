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

#ifndef REMIX_TYPES_HPP
#define REMIX_TYPES_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace remix {

/// Channel-major (C x H x W) layout of a flat feature vector. Plain vector
/// data uses {1, 1, D}.
struct FeatureShape {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  [[nodiscard]] std::size_t size() const { return channels * height * width; }
  bool operator==(const FeatureShape&) const = default;
};

/// One stored example: flat features plus a hard class index.
struct LabeledSample {
  std::vector<double> features;
  std::size_t label = 0;
};

/// Probability vector over classes. Entries are nonnegative and sum to 1.
class SoftLabel {
 public:
  SoftLabel() = default;
  explicit SoftLabel(std::vector<double> probs);

  /// One-hot embedding of a hard label.
  static SoftLabel one_hot(std::size_t label, std::size_t num_classes);

  [[nodiscard]] std::span<const double> probs() const { return probs_; }
  [[nodiscard]] std::size_t num_classes() const { return probs_.size(); }
  [[nodiscard]] double operator[](std::size_t c) const { return probs_[c]; }

  /// True when entries are nonnegative and sum to 1 within `tolerance`.
  [[nodiscard]] bool is_valid(double tolerance = 1e-9) const;

 private:
  std::vector<double> probs_;
};

/// Per-class sample counts; every count is at least 1.
class ClassCounts {
 public:
  ClassCounts() = default;
  /// Throws ParameterError when empty or when any count is zero.
  explicit ClassCounts(std::vector<std::size_t> counts);

  [[nodiscard]] std::size_t num_classes() const { return counts_.size(); }
  [[nodiscard]] std::size_t operator[](std::size_t c) const { return counts_[c]; }
  [[nodiscard]] std::span<const std::size_t> values() const { return counts_; }
  [[nodiscard]] std::size_t total() const;
  /// max(counts) / min(counts).
  [[nodiscard]] double imbalance_ratio() const;

  bool operator==(const ClassCounts&) const = default;

 private:
  std::vector<std::size_t> counts_;
};

}  // namespace remix

#endif  // REMIX_TYPES_HPP
