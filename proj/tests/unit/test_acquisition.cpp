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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "clsv/acquisition.hpp"
#include "support/oracles.hpp"

using namespace clsv;

namespace {

AcquisitionScores make_scores(std::vector<std::size_t> idx, std::vector<double> s) {
  return {Strategy::entropy, std::move(idx), std::move(s)};
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST(Entropy, Examples) {
  EXPECT_DOUBLE_EQ(entropy_score(0.5), 1.0);
  EXPECT_EQ(entropy_score(0.0), 0.0);
  EXPECT_EQ(entropy_score(1.0), 0.0);
  EXPECT_NEAR(entropy_score(0.25), 0.81128, 5e-6);
  EXPECT_NEAR(entropy_score(0.25), -(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75)), 1e-15);
}

TEST(Entropy, SymmetricAndBounded) {
  for (double p = 0.0; p <= 1.0; p += 0.001) {
    EXPECT_NEAR(entropy_score(p), entropy_score(1.0 - p), 1e-12);
    EXPECT_GE(entropy_score(p), 0.0);
    EXPECT_LE(entropy_score(p), 1.0);
  }
}

TEST(Entropy, StrictlyDecreasingInAbsoluteMean) {
  for (double var : {0.1, 1.0, 5.0}) {
    double prev = 2.0;
    for (double mu = 0.0; mu <= 3.0 * std::sqrt(var); mu += 0.01) {
      const double h = entropy_score(prob_satisfaction({mu, var}));
      EXPECT_LT(h, prev);
      EXPECT_NEAR(h, entropy_score(prob_satisfaction({-mu, var})), 1e-12);
      prev = h;
    }
  }
}

TEST(Strategy, NamesRoundTrip) {
  for (Strategy s : {Strategy::entropy, Strategy::variance, Strategy::emc, Strategy::random})
    EXPECT_EQ(parse_strategy(strategy_name(s)), s);
  EXPECT_THROW(parse_strategy("ucb"), Error);
}

TEST(ScoreField, HandSetFivePointOracle) {
  // z = mu / sigma = (0.5, -1, 1, 1.5, -2/3): smallest |z| at position 0,
  // largest variance at position 2, smallest |mu| at position 1.
  const std::vector<std::size_t> idx{10, 11, 12, 13, 14};
  const Eigen::VectorXd mu = vec({0.5, -0.1, 2.0, 0.3, -1.0});
  const Eigen::VectorXd var = vec({1.0, 0.01, 4.0, 0.04, 2.25});
  Rng rng(1);
  // Oracle by enumeration: entropy is largest where |z| is smallest.
  std::size_t best_z = 0, best_var = 0, best_mu = 0;
  for (std::size_t i = 1; i < 5; ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    if (std::abs(mu[e]) / std::sqrt(var[e]) < std::abs(mu[static_cast<Eigen::Index>(best_z)]) / std::sqrt(var[static_cast<Eigen::Index>(best_z)])) best_z = i;
    if (var[e] > var[static_cast<Eigen::Index>(best_var)]) best_var = i;
    if (std::abs(mu[e]) < std::abs(mu[static_cast<Eigen::Index>(best_mu)])) best_mu = i;
  }
  EXPECT_EQ(select_sequential(score_field(Strategy::entropy, idx, mu, var, rng)), idx[best_z]);
  EXPECT_EQ(select_sequential(score_field(Strategy::variance, idx, mu, var, rng)), idx[best_var]);
  EXPECT_EQ(select_sequential(score_field(Strategy::emc, idx, mu, var, rng)), idx[best_mu]);
  EXPECT_EQ(idx[best_z], 10u);
  EXPECT_EQ(idx[best_var], 12u);
  EXPECT_EQ(idx[best_mu], 11u);

  const auto emc = score_field(Strategy::emc, idx, mu, var, rng);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(emc.scores[i], -std::abs(mu[static_cast<Eigen::Index>(i)]));
}

TEST(ScoreField, ZeroMeanGetsMaximalEntropy) {
  const std::vector<std::size_t> idx{0, 1, 2, 3};
  Rng rng(1);
  const auto s = score_field(Strategy::entropy, idx, vec({0.4, 0.0, -0.2, 1.0}), vec({0.5, 0.5, 0.5, 0.5}), rng);
  EXPECT_DOUBLE_EQ(s.scores[1], 1.0);
  EXPECT_EQ(select_sequential(s), 1u);
}

TEST(ScoreField, RandomScoresAreSeededUniforms) {
  const std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5};
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(6);
  Rng a(5), b(5), c(6);
  const auto sa = score_field(Strategy::random, idx, z, z, a);
  EXPECT_EQ(sa.scores, score_field(Strategy::random, idx, z, z, b).scores);
  EXPECT_NE(sa.scores, score_field(Strategy::random, idx, z, z, c).scores);
  for (double v : sa.scores) {
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(ScorePool, VarianceGrowsAwayFromTrainingPoint) {
  const ParamGrid grid(Box{{0.0}, {1.0}}, {21});
  CandidatePool pool(grid);
  pool.remove(10);
  KernelParams k;
  k.signal_variance = 1.0;
  k.lengthscales = vec({0.2});
  const GpModel m = GpModel::fit(TrainingSet({grid.point(10)}, {0.7}), k);
  Rng rng(1);
  const auto s = score_pool(m, pool, Strategy::variance, rng);
  ASSERT_EQ(s.indices.size(), 20u);
  EXPECT_EQ(std::find(s.indices.begin(), s.indices.end(), 10u), s.indices.end());
  auto at = [&](std::size_t g) { return s.scores[static_cast<std::size_t>(std::find(s.indices.begin(), s.indices.end(), g) - s.indices.begin())]; };
  EXPECT_LT(at(9), at(0));
  EXPECT_LT(at(11), at(20));
  for (std::size_t g = 11; g < 20; ++g) EXPECT_LT(at(g), at(g + 1));
}

TEST(ScorePool, EmptyPoolThrows) {
  const ParamGrid grid(Box{{0.0}, {1.0}}, {2});
  CandidatePool pool(grid);
  pool.remove(0);
  pool.remove(1);
  KernelParams k;
  k.lengthscales = vec({0.2});
  const GpModel m = GpModel::fit(TrainingSet({grid.point(0)}, {0.7}), k);
  Rng rng(1);
  EXPECT_THROW(score_pool(m, pool, Strategy::entropy, rng), Error);
}

TEST(Pool, Bookkeeping) {
  CandidatePool pool(ParamGrid(Box{{0.0, 0.0}, {1.0, 1.0}}, {3, 3}));
  EXPECT_EQ(pool.available_count(), 9u);
  pool.remove(4);
  pool.remove(0);
  EXPECT_EQ(pool.available_count(), 7u);
  EXPECT_FALSE(pool.available(4));
  EXPECT_EQ(pool.available_indices(), (std::vector<std::size_t>{1, 2, 3, 5, 6, 7, 8}));
  EXPECT_THROW(pool.remove(4), Error);
  CandidatePool copy = pool;
  copy.remove(8);
  EXPECT_TRUE(pool.available(8));
  EXPECT_EQ(&copy.grid_points(), &pool.grid_points());
}

TEST(SelectSequential, TiesGoToLowestIndex) {
  EXPECT_EQ(select_sequential(make_scores({0, 1, 2}, {0.2, 0.9, 0.9})), 1u);
  EXPECT_EQ(select_sequential(make_scores({7, 3, 5}, {0.9, 0.9, 0.1})), 3u);
  EXPECT_EQ(select_sequential(make_scores({42}, {-3.0})), 42u);
}

TEST(SelectSequential, PermutationAndAffineInvariance) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> idx(30);
    std::iota(idx.begin(), idx.end(), 100);
    std::vector<double> s(30);
    for (auto& v : s) v = u(rng);
    const std::size_t best = select_sequential(make_scores(idx, s));

    std::vector<std::size_t> order(30);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> pidx;
    std::vector<double> ps, affine;
    for (auto o : order) {
      pidx.push_back(idx[o]);
      ps.push_back(s[o]);
    }
    for (double v : s) affine.push_back(3.5 * v + 11.0);
    EXPECT_EQ(select_sequential(make_scores(pidx, ps)), best);
    EXPECT_EQ(select_sequential(make_scores(idx, affine)), best);
  }
}

TEST(SelectTop, ScoreOrderWithTies) {
  const auto top = select_top(make_scores({4, 2, 9, 1}, {0.5, 0.9, 0.9, 0.1}), 3);
  EXPECT_EQ(top, (std::vector<std::size_t>{2, 9, 4}));
  EXPECT_THROW(select_top(make_scores({4, 2}, {0.5, 0.9}), 5), Error);
}

TEST(Importance, Normalization) {
  const auto d = importance_distribution(make_scores({3, 8}, {1.0, 3.0}));
  EXPECT_DOUBLE_EQ(d.probabilities[0], 0.25);
  EXPECT_DOUBLE_EQ(d.probabilities[1], 0.75);
  EXPECT_DOUBLE_EQ(d.normalizer, 4.0);
  EXPECT_FALSE(d.uniform_fallback);
  EXPECT_EQ(d.indices, (std::vector<std::size_t>{3, 8}));
}

TEST(Importance, UniformInputsAndFallback) {
  const auto u = importance_distribution(make_scores({0, 1, 2, 3}, {0.6, 0.6, 0.6, 0.6}));
  for (double p : u.probabilities) EXPECT_NEAR(p, 0.25, 1e-15);
  const auto z = importance_distribution(make_scores({0, 1, 2}, {0.0, 0.0, 1e-13}));
  EXPECT_TRUE(z.uniform_fallback);
  for (double p : z.probabilities) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
}

TEST(Importance, SumsToOneAndScaleInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> idx(200);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> h(200), scaled(200);
    for (std::size_t i = 0; i < 200; ++i) {
      h[i] = u(rng);
      scaled[i] = 7.25 * h[i];
    }
    const auto a = importance_distribution(make_scores(idx, h));
    const auto b = importance_distribution(make_scores(idx, scaled));
    EXPECT_NEAR(std::accumulate(a.probabilities.begin(), a.probabilities.end(), 0.0), 1.0, 1e-12);
    for (std::size_t i = 0; i < 200; ++i) {
      EXPECT_GE(a.probabilities[i], 0.0);
      EXPECT_NEAR(a.probabilities[i], b.probabilities[i], 1e-15);
    }
  }
}
