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

#include <cmath>
#include <random>

#include "clsv/hyperopt.hpp"
#include "support/oracles.hpp"

using namespace clsv;

namespace {

double smooth(double a, double b) { return std::sin(3.0 * a) + 0.5 * std::cos(2.0 * b); }

TrainingSet sample(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  TrainingSet t;
  for (std::size_t i = 0; i < n; ++i) {
    ParamPoint x(2);
    x << u(rng), u(rng);
    t.add(x, smooth(x[0], x[1]));
  }
  return t;
}

KernelParams guess(double sf2, double l) {
  KernelParams k;
  k.signal_variance = sf2;
  k.lengthscales = Eigen::VectorXd::Constant(2, l);
  return k;
}

}  // namespace

TEST(HyperOpt, NeverDecreasesLikelihood) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const TrainingSet t = sample(rng, 6 + trial);
    const KernelParams init = guess(0.5 + trial * 0.2, 0.1 + 0.3 * trial);
    HyperOptOptions opt;
    opt.seed = static_cast<std::uint64_t>(trial);
    const HyperOptResult r = optimize_hyperparams(t, init, opt);
    EXPECT_GE(r.lml, log_marginal_likelihood(t, init).value - 1e-9);
    EXPECT_NEAR(r.lml, log_marginal_likelihood(t, r.params).value, 1e-9 * std::max(1.0, std::abs(r.lml)));
  }
}

TEST(HyperOpt, ExitsOnGradientToleranceOrCap) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const TrainingSet t = sample(rng, 12);
    HyperOptOptions opt;
    opt.seed = static_cast<std::uint64_t>(trial);
    const HyperOptResult r = optimize_hyperparams(t, guess(1.0, 0.5), opt);
    EXPECT_TRUE(r.gradient_norm <= opt.gradient_tolerance || r.reached_cap)
        << "gradient norm " << r.gradient_norm << " after " << r.iterations << " iterations";
  }
}

TEST(HyperOpt, ImprovesHeldOutPrediction) {
  std::mt19937_64 rng(3);
  const TrainingSet t = sample(rng, 30);
  const TrainingSet held = sample(rng, 200);
  const KernelParams init = guess(10.0, 0.05);
  const HyperOptResult r = optimize_hyperparams(t, init);
  for (Eigen::Index d = 0; d < 2; ++d) {
    EXPECT_TRUE(std::isfinite(r.params.lengthscales[d]));
    EXPECT_GT(r.params.lengthscales[d], 0.0);
  }
  auto rmse = [&](const KernelParams& k) {
    const GpModel m = GpModel::fit(t, k);
    double s = 0.0;
    for (std::size_t i = 0; i < held.size(); ++i) {
      const double e = m.predict(held.points()[i]).mean - held.values()[i];
      s += e * e;
    }
    return std::sqrt(s / static_cast<double>(held.size()));
  };
  EXPECT_LT(rmse(r.params), rmse(init));
  EXPECT_LT(rmse(r.params), 0.1);
}

TEST(HyperOpt, DeterministicForSeed) {
  std::mt19937_64 rng(4);
  const TrainingSet t = sample(rng, 10);
  HyperOptOptions opt;
  opt.seed = 99;
  const HyperOptResult a = optimize_hyperparams(t, guess(1.0, 0.3), opt);
  const HyperOptResult b = optimize_hyperparams(t, guess(1.0, 0.3), opt);
  EXPECT_EQ(a.lml, b.lml);
  EXPECT_EQ(a.params.lengthscales, b.params.lengthscales);
}

TEST(HyperOpt, CarriesJitterThrough) {
  std::mt19937_64 rng(5);
  const TrainingSet t = sample(rng, 8);
  KernelParams init = guess(1.0, 0.5);
  init.jitter = 1e-6;
  EXPECT_EQ(optimize_hyperparams(t, init).params.jitter, 1e-6);
}

TEST(HyperOpt, RequiresTwoPoints) {
  TrainingSet t;
  t.add(Eigen::VectorXd::Zero(2), 1.0);
  EXPECT_THROW(optimize_hyperparams(t, guess(1.0, 1.0)), Error);
}
