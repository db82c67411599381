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


#include "clsv/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "clsv/error.hpp"

namespace clsv {

std::string_view strategy_name(Strategy s) noexcept {
  switch (s) {
    case Strategy::entropy: return "entropy";
    case Strategy::variance: return "variance";
    case Strategy::emc: return "emc";
    case Strategy::random: return "random";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  for (Strategy s : {Strategy::entropy, Strategy::variance, Strategy::emc, Strategy::random}) {
    if (strategy_name(s) == name) return s;
  }
  throw Error("unknown strategy '" + std::string(name) + "'");
}

CandidatePool::CandidatePool(ParamGrid grid)
    : grid_(std::make_shared<const ParamGrid>(std::move(grid))),
      points_(std::make_shared<const Eigen::MatrixXd>(grid_->points())),
      mask_(grid_->size(), true),
      available_(grid_->size()) {}

std::vector<std::size_t> CandidatePool::available_indices() const {
  std::vector<std::size_t> out;
  out.reserve(available_);
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i]) out.push_back(i);
  }
  return out;
}

void CandidatePool::remove(std::size_t index) {
  if (index >= mask_.size()) throw Error("pool: index out of range");
  if (!mask_[index]) throw Error("pool: location " + std::to_string(index) + " already observed");
  mask_[index] = false;
  --available_;
}

double entropy_score(double p) {
  p = std::clamp(p, 0.0, 1.0);
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return std::clamp(h, 0.0, 1.0);
}

AcquisitionScores score_field(Strategy strategy, std::vector<std::size_t> indices,
                              const Eigen::VectorXd& mean, const Eigen::VectorXd& variance,
                              Rng& rng) {
  const auto n = indices.size();
  if (static_cast<std::size_t>(mean.size()) != n || static_cast<std::size_t>(variance.size()) != n)
    throw DimensionError("score_field: moment vectors must match the index list");
  AcquisitionScores out{strategy, std::move(indices), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    switch (strategy) {
      case Strategy::entropy:
        out.scores[i] = entropy_score(prob_satisfaction({mean[i], variance[i]}));
        break;
      case Strategy::variance: out.scores[i] = variance[i]; break;
      case Strategy::emc: out.scores[i] = -std::abs(mean[i]); break;
      case Strategy::random: out.scores[i] = uniform01(rng); break;
    }
  }
  return out;
}

AcquisitionScores score_pool(const GpModel& model, const CandidatePool& pool, Strategy strategy,
                             Rng& rng) {
  if (pool.available_count() == 0) throw Error("score_pool: no available locations");
  auto indices = pool.available_indices();
  if (strategy == Strategy::random) {
    const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(indices.size()));
    return score_field(strategy, std::move(indices), zeros, zeros, rng);
  }
  Eigen::MatrixXd queries(pool.grid().dim(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i)
    queries.col(static_cast<Eigen::Index>(i)) = pool.grid_points().col(static_cast<Eigen::Index>(indices[i]));
  const PredictiveField field = model.predict_many(queries);
  return score_field(strategy, std::move(indices), field.mean, field.variance, rng);
}

namespace {

bool better(double sa, std::size_t ia, double sb, std::size_t ib) {
  return sa > sb || (sa == sb && ia < ib);
}

}  // namespace

std::size_t select_sequential(const AcquisitionScores& s) {
  if (s.scores.empty() || s.scores.size() != s.indices.size())
    throw Error("select_sequential: empty or malformed scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.scores.size(); ++i) {
    if (better(s.scores[i], s.indices[i], s.scores[best], s.indices[best])) best = i;
  }
  return s.indices[best];
}

std::vector<std::size_t> select_top(const AcquisitionScores& s, std::size_t count) {
  if (count > s.scores.size()) throw Error("select_top: fewer candidates than requested");
  std::vector<std::size_t> order(s.scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return better(s.scores[a], s.indices[a], s.scores[b], s.indices[b]);
                    });
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = s.indices[order[i]];
  return out;
}

ImportanceDistribution importance_distribution(const AcquisitionScores& s) {
  if (s.scores.empty()) throw Error("importance_distribution: no scores");
  ImportanceDistribution d;
  d.indices = s.indices;
  d.probabilities.resize(s.scores.size());
  double z = 0.0;
  for (double h : s.scores) z += std::max(h, 0.0);
  d.normalizer = z;
  if (z < 1e-12) {
    d.uniform_fallback = true;
    std::fill(d.probabilities.begin(), d.probabilities.end(), 1.0 / static_cast<double>(s.scores.size()));
    return d;
  }
  for (std::size_t i = 0; i < s.scores.size(); ++i) d.probabilities[i] = std::max(s.scores[i], 0.0) / z;
  return d;
}

}  // namespace clsv
