/*
 * Copyright 2026 The clsv Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>

namespace clsv {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent substreams.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// FNV-1a, for turning stream labels ("init", "entropy", ...) into seeds.
std::uint64_t hash_label(std::string_view label) noexcept;

/// Folds a list of stream identifiers into a master seed.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) noexcept;

/// Uniform double in [0, 1) from the top 53 bits; identical across platforms.
inline double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Draws an index from unnormalized non-negative weights.
/// Falls back to the last positive weight if rounding runs past the end.
std::size_t sample_weighted(std::span<const double> weights, Rng& rng);

}  // namespace clsv
