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

#ifndef REMIX_RANDOM_HPP
#define REMIX_RANDOM_HPP

#include <cstdint>
#include <random>

namespace remix {

/// The single random engine used everywhere. Every operation that needs
/// randomness takes one by reference; nothing holds a global stream.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace remix

#endif  // REMIX_RANDOM_HPP
