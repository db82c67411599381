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

// Diversity-enforcing batch selection with a k-DPP over candidates drawn from
// the entropy-weighted importance distribution. The similarity kernel is an
// isotropic squared exponential on grid coordinates normalized to [0,1]^p:
//
//   L(i, j) = exp(-|theta_i - theta_j|^2 / l^2)

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "clsv/acquisition.hpp"
#include "clsv/rng.hpp"

namespace clsv {

inline constexpr std::size_t kDefaultCandidateCount = 1000;
inline constexpr double kDefaultDppBandwidth = 5.0;
inline constexpr double kEigenvalueFloor = 1e-12;
inline constexpr int kPhaseOneAttempts = 10;

struct DppKernel {
  Eigen::MatrixXd points;  // dim x n, the coordinates the kernel was built on
  Eigen::MatrixXd matrix;  // n x n
  double bandwidth = kDefaultDppBandwidth;
  std::size_t size() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
};

struct DppSpectrum {
  Eigen::VectorXd eigenvalues;   // descending, clamped at zero
  Eigen::MatrixXd eigenvectors;  // column j pairs with eigenvalues[j]
};

struct Batch {
  std::vector<std::size_t> indices;  // into the kernel's candidate list
};

/// `count` i.i.d. grid indices from P_H. Throws if count < batch_size.
std::vector<std::size_t> draw_candidates(const ImportanceDistribution& dist, std::size_t count,
                                         std::size_t batch_size, Rng& rng);

/// Kernel over the columns of a dim x n matrix.
DppKernel build_kernel(const Eigen::MatrixXd& points, double bandwidth = kDefaultDppBandwidth);
/// Kernel over grid locations, using their normalized coordinates.
DppKernel build_kernel(const ParamGrid& grid, const std::vector<std::size_t>& locations,
                       double bandwidth = kDefaultDppBandwidth);

/// E(m, j) = e_m of the first j values, for m <= max_order and j <= n.
Eigen::MatrixXd elementary_symmetric(const Eigen::VectorXd& lambdas, std::size_t max_order);

DppSpectrum decompose(const DppKernel& kernel);

/// Draws a size-M subset with P(S) proportional to det(L_S).
Batch sample_k_dpp(const DppKernel& kernel, std::size_t m, Rng& rng);
Batch sample_k_dpp(const DppSpectrum& spectrum, std::size_t m, Rng& rng);

/// Full batch step: candidates from P_H, k-DPP selection, and mapping back to
/// M distinct grid locations. Repeated locations are replaced by draws from
/// P_H restricted to the locations not yet in the batch.
std::vector<std::size_t> select_kdpp_batch(const ParamGrid& grid, const ImportanceDistribution& dist,
                                           std::size_t m, std::size_t candidate_count,
                                           double bandwidth, Rng& rng);

}  // namespace clsv
