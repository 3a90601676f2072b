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

#include "remix/data.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>

#include "remix/errors.hpp"

namespace remix {

std::vector<std::size_t> Dataset::class_histogram() const {
  std::vector<std::size_t> hist(num_classes(), 0);
  for (const auto& s : samples) {
    if (s.label < hist.size()) ++hist[s.label];
  }
  return hist;
}

std::vector<std::size_t> Dataset::labels() const {
  std::vector<std::size_t> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

void Dataset::validate() const {
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    if (s.label >= num_classes()) {
      throw DataError("sample " + std::to_string(k) + " has out-of-range label " + std::to_string(s.label));
    }
    if (s.features.size() != shape.size()) {
      throw DataError("sample " + std::to_string(k) + " has " + std::to_string(s.features.size()) +
                      " features, expected " + std::to_string(shape.size()));
    }
    for (double v : s.features) {
      if (!std::isfinite(v)) throw DataError("sample " + std::to_string(k) + " has a non-finite feature");
    }
  }
}

namespace {

void check_generator(std::size_t n_per_class, double noise_sd) {
  if (n_per_class < 1) throw ParameterError("n_per_class must be >= 1");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) throw ParameterError("noise_sd must be >= 0");
}

Dataset two_class_points(std::vector<std::string> names) {
  Dataset d;
  d.class_names = std::move(names);
  d.shape = FeatureShape{1, 1, 2};
  return d;
}

// Points are emitted class-interleaved so the draw order does not depend on
// the class count.
template <typename PointFn>
Dataset generate(std::size_t n_per_class, double noise_sd, Rng& rng, std::vector<std::string> names,
                 PointFn point) {
  check_generator(n_per_class, noise_sd);
  Dataset d = two_class_points(std::move(names));
  d.samples.reserve(2 * n_per_class);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t k = 0; k < n_per_class; ++k) {
    for (std::size_t label = 0; label < 2; ++label) {
      auto [x, y] = point(label, rng);
      if (noise_sd > 0.0) {
        x += noise_sd * noise(rng);
        y += noise_sd * noise(rng);
      }
      d.samples.push_back({{x, y}, label});
    }
  }
  return d;
}

}  // namespace

Dataset make_two_moons(std::size_t n_per_class, double noise_sd, Rng& rng) {
  return generate(n_per_class, noise_sd, rng, {"upper_moon", "lower_moon"},
                  [](std::size_t label, Rng& r) -> std::pair<double, double> {
                    const double t = std::uniform_real_distribution<double>(0.0, std::numbers::pi)(r);
                    if (label == 0) return {std::cos(t), std::sin(t)};
                    return {1.0 - std::cos(t), 0.5 - std::sin(t)};
                  });
}

Dataset make_two_circles(std::size_t n_per_class, double noise_sd, Rng& rng) {
  return generate(n_per_class, noise_sd, rng, {"outer_circle", "inner_circle"},
                  [](std::size_t label, Rng& r) -> std::pair<double, double> {
                    const double t = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(r);
                    const double radius = label == 0 ? 1.0 : 0.5;
                    return {radius * std::cos(t), radius * std::sin(t)};
                  });
}

Dataset make_two_blobs(std::size_t n_per_class, double noise_sd, Rng& rng) {
  return generate(n_per_class, noise_sd, rng, {"blob_a", "blob_b"},
                  [](std::size_t label, Rng& r) -> std::pair<double, double> {
                    std::normal_distribution<double> spread(0.0, 0.4);
                    const double center = label == 0 ? -1.0 : 1.0;
                    const double x = center + spread(r);
                    const double y = center + spread(r);
                    return {x, y};
                  });
}

namespace {

void append_cifar_file(const std::filesystem::path& path, Dataset& out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open CIFAR-10 file " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() % kCifarRecordBytes != 0) {
    const std::size_t offset = bytes.size() - bytes.size() % kCifarRecordBytes;
    throw FormatError(path.string() + ": partial record at byte offset " + std::to_string(offset) + " (" +
                      std::to_string(bytes.size() - offset) + " of " + std::to_string(kCifarRecordBytes) +
                      " bytes)");
  }
  constexpr std::size_t plane = 32 * 32;
  for (std::size_t offset = 0; offset < bytes.size(); offset += kCifarRecordBytes) {
    const auto label = static_cast<unsigned char>(bytes[offset]);
    if (label > 9) {
      throw FormatError(path.string() + ": label " + std::to_string(label) + " at byte offset " +
                        std::to_string(offset) + " outside 0-9");
    }
    LabeledSample s;
    s.label = label;
    s.features.resize(3 * plane);
    for (std::size_t k = 0; k < 3 * plane; ++k) {
      const double pixel = static_cast<unsigned char>(bytes[offset + 1 + k]) / 255.0;
      const std::size_t channel = k / plane;
      s.features[k] = (pixel - kCifarMean[channel]) / kCifarStd[channel];
    }
    out.samples.push_back(std::move(s));
  }
}

Dataset empty_cifar() {
  Dataset d;
  d.class_names = {"airplane", "automobile", "bird", "cat", "deer", "dog", "frog", "horse", "ship", "truck"};
  d.shape = FeatureShape{3, 32, 32};
  return d;
}

}  // namespace

Dataset load_cifar10_binary(const std::filesystem::path& path) {
  Dataset d = empty_cifar();
  append_cifar_file(path, d);
  return d;
}

Dataset load_cifar10_binary(const std::vector<std::filesystem::path>& paths) {
  Dataset d = empty_cifar();
  for (const auto& p : paths) append_cifar_file(p, d);
  return d;
}

std::vector<double> augment_image(const std::vector<double>& image, const FeatureShape& shape, std::size_t pad,
                                  Rng& rng) {
  if (image.size() != shape.size()) throw DimensionError("image does not match its shape");
  const bool flip = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
  std::uniform_int_distribution<long long> shift_dist(-static_cast<long long>(pad), static_cast<long long>(pad));
  const long long dx = shift_dist(rng);
  const long long dy = shift_dist(rng);
  const auto w = static_cast<long long>(shape.width);
  const auto h = static_cast<long long>(shape.height);
  std::vector<double> out(image.size(), 0.0);
  for (std::size_t c = 0; c < shape.channels; ++c) {
    for (long long y = 0; y < h; ++y) {
      const long long sy = y + dy;
      if (sy < 0 || sy >= h) continue;
      for (long long x = 0; x < w; ++x) {
        long long sx = x + dx;
        if (sx < 0 || sx >= w) continue;
        if (flip) sx = w - 1 - sx;
        out[static_cast<std::size_t>((static_cast<long long>(c) * h + y) * w + x)] =
            image[static_cast<std::size_t>((static_cast<long long>(c) * h + sy) * w + sx)];
      }
    }
  }
  return out;
}

void write_csv(std::ostream& os, const Dataset& dataset) {
  const std::size_t dims = dataset.shape.size();
  for (std::size_t k = 0; k < dims; ++k) os << 'x' << (k + 1) << ',';
  os << "label\n";
  const auto old_precision = os.precision(17);
  for (const auto& s : dataset.samples) {
    for (double v : s.features) os << v << ',';
    os << s.label << '\n';
  }
  os.precision(old_precision);
}

}  // namespace remix
