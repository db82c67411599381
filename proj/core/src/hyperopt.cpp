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


#include "clsv/hyperopt.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "clsv/error.hpp"
#include "clsv/rng.hpp"

namespace clsv {
namespace {

struct Objective {
  const TrainingSet& data;
  double jitter;

  // Negated LML so that the search minimizes; nullopt on factorization failure.
  std::optional<std::pair<double, Eigen::VectorXd>> operator()(const Eigen::VectorXd& x) const {
    try {
      const LmlResult r = log_marginal_likelihood(data, KernelParams::from_log(x, jitter));
      if (!std::isfinite(r.value) || !r.gradient.allFinite()) return std::nullopt;
      return std::make_pair(-r.value, Eigen::VectorXd(-r.gradient));
    } catch (const FactorizationError&) {
      return std::nullopt;
    }
  }
};

Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                   const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  Eigen::VectorXd pg = g;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if ((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0)) pg[i] = 0.0;
  }
  return pg;
}

struct LocalResult {
  Eigen::VectorXd x;
  double f;
  double gradient_norm;
  int iterations;
  bool reached_cap;
};

std::optional<LocalResult> bfgs(const Objective& objective, Eigen::VectorXd x,
                                const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                const HyperOptOptions& opt) {
  x = x.cwiseMax(lo).cwiseMin(hi);
  auto eval = objective(x);
  if (!eval) return std::nullopt;
  double f = eval->first;
  Eigen::VectorXd g = eval->second;
  const Eigen::Index n = x.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);

  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const double gnorm = projected_gradient(x, g, lo, hi).norm();
    if (gnorm <= opt.gradient_tolerance) return LocalResult{x, f, gnorm, it, false};

    bool stepped = false;
    for (int attempt = 0; attempt < 2 && !stepped; ++attempt) {
      Eigen::VectorXd d = -h * g;
      if (d.dot(g) >= 0.0) {
        h.setIdentity();
        d = -g;
      }
      const double dmax = d.cwiseAbs().maxCoeff();
      if (dmax > 1.0) d /= dmax;

      double t = 1.0;
      for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
        const Eigen::VectorXd xn = (x + t * d).cwiseMax(lo).cwiseMin(hi);
        const Eigen::VectorXd s = xn - x;
        if (s.cwiseAbs().maxCoeff() < 1e-14) break;
        auto en = objective(xn);
        if (!en || en->first > f + 1e-4 * g.dot(s)) continue;
        const Eigen::VectorXd yv = en->second - g;
        const double sy = s.dot(yv);
        if (sy > 1e-12) {
          const double rho = 1.0 / sy;
          const Eigen::MatrixXd i_n = Eigen::MatrixXd::Identity(n, n);
          h = (i_n - rho * s * yv.transpose()) * h * (i_n - rho * yv * s.transpose()) +
              rho * s * s.transpose();
        }
        x = xn;
        f = en->first;
        g = en->second;
        stepped = true;
        break;
      }
      if (!stepped) h.setIdentity();
    }
    if (!stepped) break;  // no further progress possible along any direction
  }
  const double gnorm = projected_gradient(x, g, lo, hi).norm();
  return LocalResult{x, f, gnorm, it, it >= opt.max_iterations};
}

}  // namespace

HyperOptResult optimize_hyperparams(const TrainingSet& training, const KernelParams& init,
                                    const HyperOptOptions& options) {
  init.validate();
  if (training.deduplicated().size() < 2)
    throw Error("optimize_hyperparams: need at least two distinct training points");

  const Eigen::VectorXd x0 = init.to_log();
  const Eigen::VectorXd lo = x0.array() - options.log_box_half_width;
  const Eigen::VectorXd hi = x0.array() + options.log_box_half_width;
  const Objective objective{training, init.jitter};

  Rng rng(options.seed);
  const double restart_width = std::log(100.0);
  std::optional<LocalResult> best;
  HyperOptResult out;
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    Eigen::VectorXd start = x0;
    if (r > 0) {
      for (Eigen::Index i = 0; i < start.size(); ++i)
        start[i] += restart_width * (2.0 * uniform01(rng) - 1.0);
    }
    auto local = bfgs(objective, start, lo, hi, options);
    if (!local) {
      ++out.failed_starts;
      continue;
    }
    if (!best || local->f < best->f) best = std::move(local);
  }
  if (!best) throw FactorizationError("optimize_hyperparams: every start failed to factorize", 0.0);

  out.params = KernelParams::from_log(best->x, init.jitter);
  out.lml = -best->f;
  out.gradient_norm = best->gradient_norm;
  out.iterations = best->iterations;
  out.reached_cap = best->reached_cap;
  return out;
}

}  // namespace clsv
