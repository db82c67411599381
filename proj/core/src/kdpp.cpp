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


#include "clsv/kdpp.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

#include "clsv/error.hpp"

namespace clsv {

std::vector<std::size_t> draw_candidates(const ImportanceDistribution& dist, std::size_t count,
                                         std::size_t batch_size, Rng& rng) {
  if (count < batch_size) throw Error("draw_candidates: candidate count is below the batch size");
  if (dist.indices.empty() || dist.indices.size() != dist.probabilities.size())
    throw Error("draw_candidates: empty or malformed distribution");
  std::vector<std::size_t> out(count);
  for (auto& c : out) c = dist.indices[sample_weighted(dist.probabilities, rng)];
  return out;
}

DppKernel build_kernel(const Eigen::MatrixXd& points, double bandwidth) {
  if (points.cols() == 0) throw Error("build_kernel: no candidates");
  if (!(bandwidth > 0.0)) throw Error("build_kernel: bandwidth must be positive");
  const Eigen::Index n = points.cols();
  const double inv_l2 = 1.0 / (bandwidth * bandwidth);
  DppKernel k{points, Eigen::MatrixXd(n, n), bandwidth};
  for (Eigen::Index j = 0; j < n; ++j) {
    k.matrix(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = std::exp(-(points.col(i) - points.col(j)).squaredNorm() * inv_l2);
      k.matrix(i, j) = v;
      k.matrix(j, i) = v;
    }
  }
  return k;
}

DppKernel build_kernel(const ParamGrid& grid, const std::vector<std::size_t>& locations,
                       double bandwidth) {
  Eigen::MatrixXd pts(grid.dim(), static_cast<Eigen::Index>(locations.size()));
  for (std::size_t i = 0; i < locations.size(); ++i)
    pts.col(static_cast<Eigen::Index>(i)) = grid.normalized(locations[i]);
  return build_kernel(pts, bandwidth);
}

Eigen::MatrixXd elementary_symmetric(const Eigen::VectorXd& lambdas, std::size_t max_order) {
  const Eigen::Index n = lambdas.size();
  const auto k = static_cast<Eigen::Index>(max_order);
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(k + 1, n + 1);
  e.row(0).setOnes();
  for (Eigen::Index m = 1; m <= k; ++m) {
    for (Eigen::Index j = 1; j <= n; ++j) {
      e(m, j) = e(m, j - 1) + lambdas[j - 1] * e(m - 1, j - 1);
    }
  }
  return e;
}

DppSpectrum decompose(const DppKernel& kernel) {
  const auto n = static_cast<lapack_int>(kernel.size());
  Eigen::MatrixXd a = kernel.matrix;
  Eigen::VectorXd w(n);
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
  if (info != 0) throw Error("k-DPP: eigendecomposition failed (info " + std::to_string(info) + ")");
  // LAPACK returns ascending order.
  DppSpectrum s{w.reverse(), a.rowwise().reverse()};
  for (Eigen::Index j = 0; j < s.eigenvalues.size(); ++j) {
    if (s.eigenvalues[j] < kEigenvalueFloor) s.eigenvalues[j] = 0.0;
  }
  return s;
}

namespace {

// Eigenvector index set J with P(J) proportional to prod_{j in J} lambda_j.
std::vector<Eigen::Index> phase_one(const Eigen::VectorXd& lambdas, const Eigen::MatrixXd& e,
                                    std::size_t m, Rng& rng) {
  std::vector<Eigen::Index> picked;
  auto remaining = static_cast<Eigen::Index>(m);
  for (Eigen::Index j = lambdas.size(); j >= 1 && remaining > 0; --j) {
    const double denom = e(remaining, j);
    if (!(denom > 0.0)) continue;
    const double p = lambdas[j - 1] * e(remaining - 1, j - 1) / denom;
    if (uniform01(rng) < p) {
      picked.push_back(j - 1);
      --remaining;
    }
  }
  return picked;
}

// Orthonormalizes the columns in place by modified Gram-Schmidt.
void orthonormalize(Eigen::MatrixXd& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    for (Eigen::Index p = 0; p < c; ++p) v.col(c) -= v.col(p).dot(v.col(c)) * v.col(p);
    const double norm = v.col(c).norm();
    if (!(norm > 1e-12)) throw Error("k-DPP: projected basis lost rank");
    v.col(c) /= norm;
  }
}

}  // namespace

Batch sample_k_dpp(const DppSpectrum& spectrum, std::size_t m, Rng& rng) {
  const auto n = static_cast<std::size_t>(spectrum.eigenvalues.size());
  if (m == 0) return {};
  if (m > n) throw Error("k-DPP: batch size exceeds the candidate count");
  const Eigen::MatrixXd e = elementary_symmetric(spectrum.eigenvalues, m);
  if (!(e(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) > 0.0))
    throw Error("k-DPP: kernel rank is below the batch size");

  std::vector<Eigen::Index> chosen;
  for (int attempt = 0; attempt < kPhaseOneAttempts; ++attempt) {
    Rng sub(rng());
    chosen = phase_one(spectrum.eigenvalues, e, m, sub);
    if (chosen.size() == m) break;
  }
  if (chosen.size() != m) throw Error("k-DPP: eigenvector selection fell short of the batch size");

  Eigen::MatrixXd v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t c = 0; c < m; ++c) v.col(static_cast<Eigen::Index>(c)) = spectrum.eigenvectors.col(chosen[c]);

  Batch out;
  std::vector<double> weights(n);
  while (v.cols() > 0) {
    for (std::size_t i = 0; i < n; ++i) weights[i] = v.row(static_cast<Eigen::Index>(i)).squaredNorm();
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.5 * static_cast<double>(v.cols())))
      throw Error("k-DPP: projected basis is inconsistent with the remaining picks");
    const std::size_t item = sample_weighted(weights, rng);
    out.indices.push_back(item);

    // Drop the component along the chosen coordinate direction: eliminate it
    // with the column that has the largest entry in that row, then re-orthonormalize.
    const auto row = static_cast<Eigen::Index>(item);
    Eigen::Index pivot = 0;
    v.row(row).cwiseAbs().maxCoeff(&pivot);
    const Eigen::VectorXd pv = v.col(pivot);
    const double pe = pv[row];
    Eigen::MatrixXd next(v.rows(), v.cols() - 1);
    for (Eigen::Index c = 0, k = 0; c < v.cols(); ++c) {
      if (c == pivot) continue;
      next.col(k++) = v.col(c) - pv * (v(row, c) / pe);
    }
    if (next.cols() > 0) orthonormalize(next);
    v = std::move(next);
  }
  return out;
}

Batch sample_k_dpp(const DppKernel& kernel, std::size_t m, Rng& rng) {
  return sample_k_dpp(decompose(kernel), m, rng);
}

std::vector<std::size_t> select_kdpp_batch(const ParamGrid& grid, const ImportanceDistribution& dist,
                                           std::size_t m, std::size_t candidate_count,
                                           double bandwidth, Rng& rng) {
  if (dist.indices.size() < m) throw Error("k-DPP batch: fewer available locations than the batch size");
  const auto candidates = draw_candidates(dist, candidate_count, m, rng);

  // The DPP cannot return more distinct locations than the candidates cover;
  // any shortfall is filled by the re-draw rule below.
  const std::size_t distinct = std::unordered_set<std::size_t>(candidates.begin(), candidates.end()).size();
  const Batch batch = sample_k_dpp(build_kernel(grid, candidates, bandwidth), std::min(m, distinct), rng);

  std::vector<std::size_t> out;
  std::unordered_set<std::size_t> taken;
  for (std::size_t idx : batch.indices) {
    if (taken.insert(candidates[idx]).second) out.push_back(candidates[idx]);
  }
  if (out.size() < m) {
    std::vector<double> w = dist.probabilities;
    while (out.size() < m) {
      double total = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (taken.count(dist.indices[i])) w[i] = 0.0;
        total += w[i];
      }
      if (!(total > 0.0)) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = taken.count(dist.indices[i]) ? 0.0 : 1.0;
      }
      const std::size_t loc = dist.indices[sample_weighted(w, rng)];
      taken.insert(loc);
      out.push_back(loc);
    }
  }
  return out;
}

}  // namespace clsv
