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

#include "clsv/gp.hpp"

namespace clsv {

struct HyperOptOptions {
  /// Number of starts: the initial guess plus (restarts - 1) random draws,
  /// log-uniform in [1e-2, 1e2] times the initial guess.
  int restarts = 3;
  int max_iterations = 100;
  /// Exit when the projected log-space gradient norm falls below this.
  double gradient_tolerance = 1e-3;
  /// Search box half-width around the initial guess, in natural-log units.
  double log_box_half_width = 9.21;  // ln(1e4)
  std::uint64_t seed = 0;
};

struct HyperOptResult {
  KernelParams params;
  double lml = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool reached_cap = false;
  int failed_starts = 0;
};

/// Maximizes the log marginal likelihood over log sf2 and log lengthscales
/// with a box-projected BFGS ascent. The jitter of `init` is carried through.
HyperOptResult optimize_hyperparams(const TrainingSet& training, const KernelParams& init,
                                    const HyperOptOptions& options = {});

}  // namespace clsv
