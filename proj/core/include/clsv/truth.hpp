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

#include <cstddef>
#include <string>
#include <vector>

#include "clsv/grid.hpp"
#include "clsv/stl.hpp"
#include "clsv/systems.hpp"

namespace clsv {

/// Robustness at every grid location and the resulting sat mask.
struct GroundTruth {
  std::vector<double> robustness;
  std::vector<bool> mask;  // robustness > 0

  std::size_t satisfied_count() const;
};

/// Identifies a sweep: benchmark, formula, grid and integrator settings.
std::string truth_cache_key(const SystemSpec& spec, const Formula& formula, const ParamGrid& grid,
                            const SimConfig& config);

/// Measures every grid location, using `threads` workers. When `cache_dir` is
/// non-empty, a previous sweep with the same key is reloaded instead, and a
/// fresh sweep is written there.
GroundTruth ground_truth_sweep(const SystemSpec& spec, const Formula& formula, const ParamGrid& grid,
                               const SimConfig& config, const std::string& cache_dir = {},
                               unsigned threads = 1);

}  // namespace clsv
