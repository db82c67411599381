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


#include <benchmark/benchmark.h>

#include <random>

#include "clsv/gp.hpp"
#include "clsv/kdpp.hpp"
#include "clsv/stl.hpp"
#include "clsv/systems.hpp"

using namespace clsv;

namespace {

Eigen::MatrixXd random_points(Eigen::Index dim, Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd pts(dim, n);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = u(rng);
  return pts;
}

KernelParams params(Eigen::Index dim) {
  KernelParams k;
  k.signal_variance = 1.0;
  k.lengthscales = Eigen::VectorXd::Constant(dim, 0.3);
  return k;
}

TrainingSet training(Eigen::Index n) {
  const Eigen::MatrixXd pts = random_points(2, n, 1);
  std::vector<ParamPoint> p;
  std::vector<double> y;
  for (Eigen::Index i = 0; i < n; ++i) {
    p.push_back(pts.col(i));
    y.push_back(std::sin(6.0 * pts(0, i)) + pts(1, i));
  }
  return TrainingSet(p, y);
}

}  // namespace

static void BM_KernelMatrix(benchmark::State& state) {
  const Eigen::MatrixXd pts = random_points(2, state.range(0), 2);
  const KernelParams k = params(2);
  for (auto _ : state) benchmark::DoNotOptimize(kernel_matrix(pts, pts, k));
}
BENCHMARK(BM_KernelMatrix)->Arg(150)->Arg(1681);

static void BM_GpFit(benchmark::State& state) {
  const TrainingSet ts = training(state.range(0));
  const KernelParams k = params(2);
  for (auto _ : state) benchmark::DoNotOptimize(GpModel::fit(ts, k));
}
BENCHMARK(BM_GpFit)->Arg(50)->Arg(150);

static void BM_GpPredictGrid(benchmark::State& state) {
  const GpModel m = GpModel::fit(training(state.range(0)), params(2));
  const Eigen::MatrixXd grid = random_points(2, 1681, 3);
  for (auto _ : state) benchmark::DoNotOptimize(m.predict_many(grid));
}
BENCHMARK(BM_GpPredictGrid)->Arg(50)->Arg(150);

static void BM_KdppSample(benchmark::State& state) {
  const DppKernel k = build_kernel(random_points(2, state.range(0), 4), 5.0);
  Rng rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(sample_k_dpp(k, 5, rng));
}
BENCHMARK(BM_KdppSample)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_Simulate(benchmark::State& state) {
  const SystemSpec spec = make_system("mrac2d");
  const SimConfig cfg = default_sim_config("mrac2d");
  ParamPoint p(2);
  p << 2.0, -3.0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(spec, p, cfg));
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

static void BM_Robustness(benchmark::State& state) {
  const SystemSpec spec = make_system("mrac2d");
  ParamPoint p(2);
  p << 2.0, -3.0;
  const Trace tr = simulate(spec, p, default_sim_config("mrac2d"));
  const Formula f = parse_formula(formula_preset("mrac_phi123"));
  for (auto _ : state) benchmark::DoNotOptimize(robustness(f, tr));
}
BENCHMARK(BM_Robustness);
BENCHMARK_MAIN();
