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
#include <memory>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "clsv/gp.hpp"
#include "clsv/grid.hpp"
#include "clsv/rng.hpp"

namespace clsv {

/// Every strategy is a maximization: emc is stored as -|mean|.
enum class Strategy { entropy, variance, emc, random };

std::string_view strategy_name(Strategy s) noexcept;
/// Accepts "entropy", "variance", "emc", "random"; throws Error otherwise.
Strategy parse_strategy(std::string_view name);

/// The grid plus a mask of locations that have not been simulated yet.
class CandidatePool {
 public:
  CandidatePool() = default;
  explicit CandidatePool(ParamGrid grid);

  const ParamGrid& grid() const noexcept { return *grid_; }
  /// Column i is grid().point(i); shared between copies of the pool.
  const Eigen::MatrixXd& grid_points() const noexcept { return *points_; }

  bool available(std::size_t index) const { return mask_.at(index); }
  const std::vector<bool>& mask() const noexcept { return mask_; }
  std::size_t available_count() const noexcept { return available_; }
  /// Ascending grid indices of the available locations.
  std::vector<std::size_t> available_indices() const;

  /// Marks a location as observed. Throws if it already was.
  void remove(std::size_t index);

 private:
  std::shared_ptr<const ParamGrid> grid_;
  std::shared_ptr<const Eigen::MatrixXd> points_;
  std::vector<bool> mask_;
  std::size_t available_ = 0;
};

struct AcquisitionScores {
  Strategy strategy = Strategy::entropy;
  std::vector<std::size_t> indices;  // grid indices
  std::vector<double> scores;        // parallel to indices
};

struct ImportanceDistribution {
  std::vector<std::size_t> indices;
  std::vector<double> probabilities;
  double normalizer = 0.0;  // Z_H
  bool uniform_fallback = false;
};

/// Binary entropy in bits, with 0 log 0 = 0.
double entropy_score(double p_sat);

/// Scores from precomputed predictive moments; `rng` is used only by random.
AcquisitionScores score_field(Strategy strategy, std::vector<std::size_t> indices,
                              const Eigen::VectorXd& mean, const Eigen::VectorXd& variance,
                              Rng& rng);

/// Scores every available location of the pool. Throws on an empty pool.
AcquisitionScores score_pool(const GpModel& model, const CandidatePool& pool, Strategy strategy,
                             Rng& rng);

/// Grid index of the best score; ties go to the lowest grid index.
std::size_t select_sequential(const AcquisitionScores& scores);

/// The M best locations in score order (ties by lowest grid index). Throws
/// when fewer than M candidates are available.
std::vector<std::size_t> select_top(const AcquisitionScores& scores, std::size_t count);

/// P_H = H / Z_H, or uniform when Z_H < 1e-12.
ImportanceDistribution importance_distribution(const AcquisitionScores& scores);

}  // namespace clsv
