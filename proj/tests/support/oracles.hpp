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

// Reference computations that share no code with the library: dense solves,
// quadrature, brute-force subset enumeration and a per-sample STL evaluator.
// Used by both the unit tests and the acceptance binary.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "clsv/gp.hpp"
#include "clsv/hyperopt.hpp"
#include "clsv/rng.hpp"
#include "clsv/stl.hpp"

namespace clsv::oracle {

// ---------------------------------------------------------------------------
// Normal CDF by composite Simpson quadrature of the density on [0, |z|].

inline double normal_cdf(double z) {
  const double a = std::min(std::abs(z), 12.0);
  const int n = 4000;
  const double h = a / n;
  auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
  double s = pdf(0.0) + pdf(a);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
  const double half = s * h / 3.0;
  return z >= 0 ? 0.5 + half : 0.5 - half;
}

// ---------------------------------------------------------------------------
// Gaussian process reference values from plain loops and LU solves.

inline double se_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double sf2,
                        const Eigen::VectorXd& ls) {
  double r2 = 0.0;
  for (Eigen::Index d = 0; d < a.size(); ++d) r2 += (a[d] - b[d]) * (a[d] - b[d]) / (ls[d] * ls[d]);
  return sf2 * std::exp(-0.5 * r2);
}

inline Eigen::MatrixXd gram(const std::vector<ParamPoint>& pts, const KernelParams& p, double jitter) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = se_kernel(pts[i], pts[j], p.signal_variance, p.lengthscales);
  k.diagonal().array() += jitter;
  return k;
}

struct DensePrediction {
  double mean = 0.0;
  double variance = 0.0;
};

inline DensePrediction dense_predict(const std::vector<ParamPoint>& pts, const std::vector<double>& y,
                                     const KernelParams& p, double jitter, const ParamPoint& q) {
  const Eigen::MatrixXd k = gram(pts, p, jitter);
  Eigen::VectorXd ks(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) ks[static_cast<Eigen::Index>(i)] = se_kernel(q, pts[i], p.signal_variance, p.lengthscales);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  return {ks.dot(lu.solve(yv)), p.signal_variance - ks.dot(lu.solve(ks))};
}

inline double dense_lml(const std::vector<ParamPoint>& pts, const std::vector<double>& y, const KernelParams& p,
                        double jitter) {
  const Eigen::MatrixXd k = gram(pts, p, jitter);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  const double n = static_cast<double>(pts.size());
  return -0.5 * yv.dot(lu.solve(yv)) - 0.5 * std::log(lu.determinant()) - 0.5 * n * std::log(2.0 * M_PI);
}

/// LML in extended precision at log-space parameters (log sf2, log l_1..p).
/// Central differences of this function stay accurate on kernels whose
/// condition number would swamp a double-precision difference quotient.
inline long double extended_lml(const std::vector<ParamPoint>& pts, const std::vector<double>& y,
                                const Eigen::VectorXd& log_params, long double offset, Eigen::Index which,
                                double jitter) {
  using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const auto n = static_cast<Eigen::Index>(pts.size());
  VecL lp = log_params.cast<long double>();
  lp[which] += offset;
  const long double sf2 = std::exp(lp[0]);
  MatL k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      long double r2 = 0.0L;
      for (Eigen::Index d = 0; d < pts[0].size(); ++d) {
        const long double diff = static_cast<long double>(pts[i][d]) - static_cast<long double>(pts[j][d]);
        r2 += diff * diff / std::exp(2.0L * lp[d + 1]);
      }
      k(i, j) = sf2 * std::exp(-0.5L * r2);
    }
  k.diagonal().array() += static_cast<long double>(jitter);
  const Eigen::LLT<MatL> llt(k);
  VecL yv(n);
  for (Eigen::Index i = 0; i < n; ++i) yv[i] = y[static_cast<std::size_t>(i)];
  const MatL lower = llt.matrixL();
  long double logdet = 0.0L;
  for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0L * std::log(lower(i, i));
  return -0.5L * yv.dot(llt.solve(yv)) - 0.5L * logdet -
         0.5L * static_cast<long double>(n) * std::log(2.0L * 3.141592653589793238462643383279502884L);
}

/// Random instance: N points in [0,1]^p, moderate lengthscales, smooth targets.
struct GpInstance {
  TrainingSet training;
  KernelParams params;
  std::vector<ParamPoint> queries;
};

inline GpInstance random_gp_instance(std::mt19937_64& rng, std::size_t p, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> log_l(std::log(0.15), std::log(0.8));
  GpInstance inst;
  inst.params.signal_variance = std::exp(std::uniform_real_distribution<double>(-1.0, 1.5)(rng));
  inst.params.lengthscales.resize(static_cast<Eigen::Index>(p));
  for (std::size_t d = 0; d < p; ++d) inst.params.lengthscales[static_cast<Eigen::Index>(d)] = std::exp(log_l(rng));
  std::vector<double> w(p);
  for (auto& v : w) v = u(rng) * 6.0 - 3.0;
  auto draw = [&] {
    ParamPoint x(static_cast<Eigen::Index>(p));
    for (std::size_t d = 0; d < p; ++d) x[static_cast<Eigen::Index>(d)] = u(rng);
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const ParamPoint x = draw();
    double y = 0.3;
    for (std::size_t d = 0; d < p; ++d) y += std::sin(w[d] * x[static_cast<Eigen::Index>(d)]);
    inst.training.add(x, y);
  }
  for (int q = 0; q < 10; ++q) inst.queries.push_back(draw());
  return inst;
}

/// Checks one instance against the GP oracle suite: interpolation, variance
/// bounds, variance monotonicity under a new point, and the LML gradient
/// against central differences. Returns an empty string on success.
inline std::string check_gp_instance(const GpInstance& inst, std::mt19937_64& rng) {
  const GpModel model = GpModel::fit(inst.training, inst.params);
  const double sf2 = inst.params.signal_variance;
  const double jitter = model.params().jitter;
  const auto& pts = inst.training.points();
  const auto& ys = inst.training.values();

  if (jitter <= 1e-10) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto d = model.predict(pts[i]);
      if (std::abs(d.mean - ys[i]) > 1e-6 * std::max(1.0, std::abs(ys[i])))
        return "interpolation mean off by " + std::to_string(d.mean - ys[i]);
      if (d.variance > 1e-6 * sf2) return "interpolation variance " + std::to_string(d.variance);
    }
  }

  std::uniform_real_distribution<double> u(0.0, 1.0);
  ParamPoint extra(pts.front().size());
  for (Eigen::Index d = 0; d < extra.size(); ++d) extra[d] = u(rng);
  TrainingSet bigger = inst.training;
  bigger.add(extra, 0.0);
  KernelParams fixed = model.params();
  const GpModel grown = GpModel::fit(bigger, fixed);
  for (const auto& q : inst.queries) {
    const auto d = model.predict(q);
    if (d.variance < 0.0 || d.variance > sf2 + jitter) return "variance out of bounds: " + std::to_string(d.variance);
    const auto g = grown.predict(q);
    if (g.variance > d.variance + 1e-8) return "variance grew after adding a point";
  }

  const LmlResult lml = log_marginal_likelihood(inst.training, model.params());
  const Eigen::VectorXd base = model.params().to_log();
  const double h = 1e-5;
  for (Eigen::Index k = 0; k < base.size(); ++k) {
    const long double fp = extended_lml(pts, ys, base, h, k, jitter);
    const long double fm = extended_lml(pts, ys, base, -h, k, jitter);
    const double fd = static_cast<double>((fp - fm) / (2.0L * h));
    const double rel = std::abs(fd - lml.gradient[k]) / std::max(1.0, std::abs(fd));
    if (rel > 1e-4) return "LML gradient component " + std::to_string(k) + " off by " + std::to_string(rel);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Brute-force subset probabilities for a k-DPP.

inline void subsets_of(std::size_t n, std::size_t k, std::size_t start, std::vector<std::size_t>& cur,
                       std::vector<std::vector<std::size_t>>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = start; i < n; ++i) {
    cur.push_back(i);
    subsets_of(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

inline std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  subsets_of(n, k, 0, cur, out);
  return out;
}

inline double principal_minor(const Eigen::MatrixXd& l, const std::vector<std::size_t>& s) {
  const auto k = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd sub(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      sub(i, j) = l(static_cast<Eigen::Index>(s[static_cast<std::size_t>(i)]), static_cast<Eigen::Index>(s[static_cast<std::size_t>(j)]));
  return sub.determinant();
}

/// e_k(lambda) as the sum over all k-subsets of the product of their values.
inline double esp_brute(const Eigen::VectorXd& lambda, std::size_t k) {
  if (k == 0) return 1.0;
  double sum = 0.0;
  for (const auto& s : subsets(static_cast<std::size_t>(lambda.size()), k)) {
    double prod = 1.0;
    for (auto i : s) prod *= lambda[static_cast<Eigen::Index>(i)];
    sum += prod;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// STL: direct per-sample evaluation. Every window is found by scanning all
// samples; no sliding extrema, no shared helpers.

inline double eval_predicate(const Predicate& p, double s) {
  if (p.abs_scale > 0.0) return p.offset - p.abs_scale * std::abs(p.abs_gain * s + p.abs_offset);
  return p.gain * s + p.offset;
}

inline bool time_in(double t, double lo, double hi) {
  return t >= lo - kTimeTolerance * std::max(1.0, std::abs(lo)) &&
         t <= hi + kTimeTolerance * std::max(1.0, std::abs(hi));
}

inline double stl_at(const FormulaNode& n, const Trace& tr, std::size_t i) {
  using K = FormulaNode::Kind;
  const auto& ts = tr.times();
  switch (n.kind) {
    case K::predicate:
      return eval_predicate(n.predicate, tr.channel(n.predicate.channel)[i]);
    case K::negation:
      return -stl_at(*n.children[0], tr, i);
    case K::conjunction: {
      double v = stl_at(*n.children[0], tr, i);
      for (std::size_t c = 1; c < n.children.size(); ++c) {
        const double w = stl_at(*n.children[c], tr, i);
        if (std::isnan(v) || std::isnan(w)) return std::nan("");
        v = std::min(v, w);
      }
      return v;
    }
    case K::disjunction: {
      double v = stl_at(*n.children[0], tr, i);
      for (std::size_t c = 1; c < n.children.size(); ++c) {
        const double w = stl_at(*n.children[c], tr, i);
        if (std::isnan(v) || std::isnan(w)) return std::nan("");
        v = std::max(v, w);
      }
      return v;
    }
    case K::always:
    case K::eventually: {
      const double lo = ts[i] + n.interval.lo, hi = ts[i] + n.interval.hi;
      if (ts.back() < hi - kTimeTolerance * std::max(1.0, std::abs(hi))) return std::nan("");
      bool any = false;
      double v = 0.0;
      for (std::size_t j = 0; j < ts.size(); ++j) {
        if (!time_in(ts[j], lo, hi)) continue;
        const double c = stl_at(*n.children[0], tr, j);
        if (std::isnan(c)) return std::nan("");
        if (!any) v = c;
        else v = n.kind == K::always ? std::min(v, c) : std::max(v, c);
        any = true;
      }
      if (!any) return std::nan("");
      return v;
    }
  }
  return std::nan("");
}

/// Random piecewise-linear trace on [0, t_final] sampled every dt.
inline Trace random_pwl_trace(std::mt19937_64& rng, const std::vector<std::string>& names, double t_final,
                              double dt, double amplitude) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  std::uniform_int_distribution<int> knots_n(2, 12);
  const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
  std::vector<double> times(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) times[k] = static_cast<double>(k) * dt;
  std::vector<std::vector<double>> chans;
  for (std::size_t c = 0; c < names.size(); ++c) {
    const int nk = knots_n(rng);
    std::vector<double> kt(static_cast<std::size_t>(nk) + 1), kv(static_cast<std::size_t>(nk) + 1);
    for (int k = 0; k <= nk; ++k) {
      kt[static_cast<std::size_t>(k)] = t_final * k / nk;
      kv[static_cast<std::size_t>(k)] = u(rng);
    }
    std::vector<double> v(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double t = times[k];
      std::size_t seg = std::min<std::size_t>(static_cast<std::size_t>(t / t_final * nk), static_cast<std::size_t>(nk) - 1);
      const double a = (t - kt[seg]) / (kt[seg + 1] - kt[seg]);
      v[k] = kv[seg] + a * (kv[seg + 1] - kv[seg]);
    }
    chans.push_back(std::move(v));
  }
  return Trace(std::move(times), names, std::move(chans));
}

}  // namespace clsv::oracle

namespace clsv::oracle {

// ---------------------------------------------------------------------------
// Fixed battery of small DPP instances: candidate coordinates (dim x n) and
// a bandwidth chosen so subset probabilities are far from uniform.

struct DppCase {
  std::string name;
  Eigen::MatrixXd points;
  double bandwidth;
};

inline std::vector<DppCase> dpp_battery() {
  std::vector<DppCase> cases;
  auto add = [&](std::string name, std::vector<std::vector<double>> cols, double l) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(cols.front().size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
      for (std::size_t d = 0; d < cols[j].size(); ++d) m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j)) = cols[j][d];
    cases.push_back({std::move(name), std::move(m), l});
  };
  add("line3", {{0.0}, {0.3}, {1.0}}, 0.6);
  add("coincident3", {{0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}}, 1.0);
  add("triangle3", {{0.0, 0.0}, {0.4, 0.1}, {0.1, 0.9}}, 0.8);
  add("cluster4", {{0.0, 0.0}, {0.2, 0.0}, {0.0, 0.5}, {1.0, 1.0}}, 0.7);
  add("line4", {{0.0}, {0.1}, {0.2}, {1.5}}, 0.5);
  add("spread4", {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.3, 0.3, 0.3}}, 1.2);
  return cases;
}

/// 0.999 quantiles of the chi-square distribution, dof 1..19.
inline double chi2_critical_0001(std::size_t dof) {
  static const double q[] = {10.828, 13.816, 16.266, 18.467, 20.515, 22.458, 24.322, 26.124, 27.877, 29.588,
                             31.264, 32.909, 34.528, 36.123, 37.697, 39.252, 40.790, 42.312, 43.820};
  return q[dof - 1];
}

}  // namespace clsv::oracle

namespace clsv::oracle {

struct SubsetFrequencies {
  double max_abs_diff = 0.0;      // |empirical - exact| over all subsets
  double chi_square = 0.0;        // over subsets with positive probability
  std::size_t dof = 0;
  std::size_t impossible_hits = 0;  // draws of zero-probability subsets
  std::size_t malformed = 0;        // draws that are not distinct in-range m-subsets
};

/// Compares `draws` samples of size m from `sample` (returning sorted or
/// unsorted index lists) with det(L_S) normalized over all m-subsets.
template <class Sampler>
SubsetFrequencies compare_subset_frequencies(const Eigen::MatrixXd& l, std::size_t m, std::size_t draws,
                                             Sampler&& sample) {
  const auto all = subsets(static_cast<std::size_t>(l.rows()), m);
  std::vector<double> p(all.size());
  double z = 0.0;
  for (std::size_t s = 0; s < all.size(); ++s) {
    p[s] = std::max(0.0, principal_minor(l, all[s]));
    if (p[s] < 1e-12) p[s] = 0.0;
    z += p[s];
  }
  for (auto& v : p) v /= z;
  std::vector<std::size_t> counts(all.size(), 0);
  std::size_t malformed = 0;
  for (std::size_t d = 0; d < draws; ++d) {
    std::vector<std::size_t> s = sample();
    std::sort(s.begin(), s.end());
    const auto it = std::find(all.begin(), all.end(), s);
    if (it == all.end()) {
      ++malformed;
      continue;
    }
    ++counts[static_cast<std::size_t>(it - all.begin())];
  }
  SubsetFrequencies r;
  r.malformed = malformed;
  std::size_t support = 0;
  for (std::size_t s = 0; s < all.size(); ++s) {
    const double f = static_cast<double>(counts[s]) / static_cast<double>(draws);
    r.max_abs_diff = std::max(r.max_abs_diff, std::abs(f - p[s]));
    if (p[s] == 0.0) {
      r.impossible_hits += counts[s];
      continue;
    }
    const double e = p[s] * static_cast<double>(draws);
    r.chi_square += (static_cast<double>(counts[s]) - e) * (static_cast<double>(counts[s]) - e) / e;
    ++support;
  }
  r.dof = support > 0 ? support - 1 : 0;
  return r;
}

}  // namespace clsv::oracle

#include "clsv/verify.hpp"

namespace clsv::oracle {

struct RefitDeviation {
  /// |P+ from held mean and pending variance - P+ from held mean and refit variance|.
  double probability = 0.0;
  /// Largest absolute variance difference, including the variance left at
  /// the pending points themselves.
  double variance = 0.0;
};

/// Pending-point covariance against a from-scratch fit on D plus S with the
/// same hyperparameters and jitter, checked after every addition. Both sides
/// use the mean of the model trained on D alone.
inline RefitDeviation refit_deviation(std::mt19937_64& rng, std::size_t p, std::size_t n, std::size_t pending) {
  GpInstance inst = random_gp_instance(rng, p, n);
  const GpModel model = GpModel::fit(inst.training, inst.params);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&] {
    ParamPoint x(static_cast<Eigen::Index>(p));
    for (Eigen::Index d = 0; d < x.size(); ++d) x[d] = u(rng);
    return x;
  };
  Eigen::MatrixXd queries(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(inst.queries.size()));
  for (std::size_t i = 0; i < inst.queries.size(); ++i) queries.col(static_cast<Eigen::Index>(i)) = inst.queries[i];

  PendingCovariance cov(model, queries);
  TrainingSet grown = model.training();
  std::vector<ParamPoint> added;
  RefitDeviation worst;
  for (std::size_t k = 0; k < pending; ++k) {
    const ParamPoint s = draw();
    cov.add(s);
    grown.add(s, 0.0);
    added.push_back(s);
    KernelParams same = model.params();
    const GpModel refit = GpModel::fit(grown, same);
    if (refit.params().jitter != same.jitter) throw Error("refit oracle: jitter escalated");
    for (std::size_t i = 0; i < inst.queries.size(); ++i) {
      const double mean = model.predict(inst.queries[i]).mean;
      const double v_ref = refit.predict(inst.queries[i]).variance;
      const double p_ref = prob_satisfaction({mean, v_ref});
      for (const double v : {cov.variances()[static_cast<Eigen::Index>(i)], cov.variance(inst.queries[i])}) {
        worst.variance = std::max(worst.variance, std::abs(v - v_ref));
        worst.probability = std::max(worst.probability, std::abs(prob_satisfaction({mean, v}) - p_ref));
      }
    }
    for (const auto& a : added) worst.variance = std::max(worst.variance, cov.variance(a));
  }
  return worst;
}

}  // namespace clsv::oracle
