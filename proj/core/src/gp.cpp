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


#include "clsv/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "clsv/error.hpp"

namespace clsv {

void KernelParams::validate() const {
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
    throw Error("kernel: signal variance must be positive and finite");
  if (lengthscales.size() == 0) throw DimensionError("kernel: no lengthscales");
  for (Eigen::Index d = 0; d < lengthscales.size(); ++d) {
    if (!(lengthscales[d] > 0.0) || !std::isfinite(lengthscales[d]))
      throw Error("kernel: lengthscales must be positive and finite");
  }
  if (!(jitter >= 0.0)) throw Error("kernel: jitter must be non-negative");
}

Eigen::VectorXd KernelParams::to_log() const {
  Eigen::VectorXd out(lengthscales.size() + 1);
  out[0] = std::log(signal_variance);
  out.tail(lengthscales.size()) = lengthscales.array().log();
  return out;
}

KernelParams KernelParams::from_log(const Eigen::VectorXd& log_params, double jitter) {
  KernelParams p;
  p.signal_variance = std::exp(log_params[0]);
  p.lengthscales = log_params.tail(log_params.size() - 1).array().exp();
  p.jitter = jitter;
  return p;
}

double kernel_eval(const ParamPoint& a, const ParamPoint& b, const KernelParams& params) {
  if (a.size() != b.size() || a.size() != params.lengthscales.size())
    throw DimensionError("kernel_eval: dimension mismatch");
  const double r2 = ((a - b).array() / params.lengthscales.array()).square().sum();
  return params.signal_variance * std::exp(-0.5 * r2);
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs,
                              const KernelParams& params) {
  if (lhs.rows() != rhs.rows() || lhs.rows() != params.lengthscales.size())
    throw DimensionError("kernel_matrix: dimension mismatch");
  const Eigen::ArrayXd inv_l = params.lengthscales.array().inverse();
  const Eigen::MatrixXd a = (lhs.array().colwise() * inv_l).matrix();
  const Eigen::MatrixXd b = (rhs.array().colwise() * inv_l).matrix();
  Eigen::MatrixXd out(lhs.cols(), rhs.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
      out(i, j) = params.signal_variance * std::exp(-0.5 * (a.col(i) - b.col(j)).squaredNorm());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

TrainingSet::TrainingSet(std::vector<ParamPoint> points, std::vector<double> values)
    : points_(std::move(points)), values_(std::move(values)) {
  if (points_.size() != values_.size())
    throw DimensionError("training set: point and value counts differ");
  for (const auto& p : points_) {
    if (p.size() != points_.front().size())
      throw DimensionError("training set: inconsistent point dimension");
  }
}

void TrainingSet::add(const ParamPoint& point, double value) {
  if (!points_.empty() && point.size() != points_.front().size())
    throw DimensionError("training set: inconsistent point dimension");
  points_.push_back(point);
  values_.push_back(value);
}

std::size_t TrainingSet::dim() const {
  return points_.empty() ? 0 : static_cast<std::size_t>(points_.front().size());
}

bool TrainingSet::contains(const ParamPoint& p) const {
  return std::any_of(points_.begin(), points_.end(),
                     [&](const ParamPoint& q) { return q.size() == p.size() && q == p; });
}

TrainingSet TrainingSet::deduplicated() const {
  TrainingSet out;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!out.contains(points_[i])) out.add(points_[i], values_[i]);
  }
  return out;
}

Eigen::MatrixXd TrainingSet::input_matrix() const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) x.col(static_cast<Eigen::Index>(i)) = points_[i];
  return x;
}

Eigen::VectorXd TrainingSet::value_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(values_.data(), static_cast<Eigen::Index>(values_.size()));
}

// ---------------------------------------------------------------------------

JitteredFactor factorize_with_jitter(const Eigen::MatrixXd& kernel, double signal_variance,
                                     double requested_jitter) {
  double jitter = requested_jitter > 0.0 ? requested_jitter : kJitterStartFraction * signal_variance;
  const double max_jitter = std::max(jitter, kJitterMaxFraction * signal_variance);
  const Eigen::Index n = kernel.rows();
  while (true) {
    Eigen::MatrixXd shifted = kernel;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd lower = llt.matrixL();
      bool finite_pivots = true;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!(lower(i, i) > 0.0) || !std::isfinite(lower(i, i))) finite_pivots = false;
      }
      if (finite_pivots) return {std::move(lower), jitter};
    }
    if (jitter >= max_jitter) {
      std::ostringstream msg;
      msg << "Cholesky factorization failed; last jitter tried " << jitter;
      throw FactorizationError(msg.str(), jitter);
    }
    jitter = std::min(jitter * kJitterGrowth, max_jitter);
  }
}

GpModel GpModel::fit(const TrainingSet& training, const KernelParams& params) {
  params.validate();
  if (training.empty()) throw Error("fit: empty training set");
  if (training.dim() != params.dim()) throw DimensionError("fit: training/kernel dimension mismatch");

  GpModel m;
  m.training_ = training.deduplicated();
  m.inputs_ = m.training_.input_matrix();
  const Eigen::MatrixXd k = kernel_matrix(m.inputs_, m.inputs_, params);
  JitteredFactor f = factorize_with_jitter(k, params.signal_variance, params.jitter);
  m.params_ = params;
  m.params_.jitter = f.jitter;
  m.chol_ = std::move(f.lower);
  const Eigen::MatrixXd& lf = m.chol_;
  const auto l = lf.triangularView<Eigen::Lower>();
  m.alpha_ = l.transpose().solve(l.solve(m.training_.value_vector()));
  return m;
}

PredictiveDistribution GpModel::predict(const ParamPoint& query) const {
  if (static_cast<std::size_t>(query.size()) != dim())
    throw DimensionError("predict: query dimension mismatch");
  const Eigen::VectorXd ks = kernel_matrix(inputs_, query, params_).col(0);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(ks);
  PredictiveDistribution out;
  out.mean = ks.dot(alpha_);
  out.variance = std::max(0.0, params_.signal_variance - v.squaredNorm());
  return out;
}

PredictiveField GpModel::predict_many(const Eigen::MatrixXd& queries) const {
  if (static_cast<std::size_t>(queries.rows()) != dim())
    throw DimensionError("predict_many: query dimension mismatch");
  const Eigen::MatrixXd ks = kernel_matrix(inputs_, queries, params_);
  const Eigen::MatrixXd v = chol_.triangularView<Eigen::Lower>().solve(ks);
  PredictiveField out;
  out.mean = ks.transpose() * alpha_;
  out.variance = (params_.signal_variance - v.colwise().squaredNorm().array()).max(0.0).matrix().transpose();
  return out;
}

// ---------------------------------------------------------------------------

LmlResult log_marginal_likelihood(const TrainingSet& training, const KernelParams& params) {
  params.validate();
  if (training.empty()) throw Error("log_marginal_likelihood: empty training set");
  const TrainingSet data = training.deduplicated();
  const Eigen::MatrixXd x = data.input_matrix();
  const Eigen::VectorXd y = data.value_vector();
  const Eigen::Index n = x.cols();
  const Eigen::Index p = x.rows();

  const Eigen::MatrixXd k0 = kernel_matrix(x, x, params);
  const JitteredFactor f = factorize_with_jitter(k0, params.signal_variance, params.jitter);
  const auto l = f.lower.triangularView<Eigen::Lower>();
  const Eigen::VectorXd alpha = l.transpose().solve(l.solve(y));

  LmlResult out;
  out.jitter = f.jitter;
  out.value = -0.5 * y.dot(alpha) - f.lower.diagonal().array().log().sum() -
              0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  // dLML/dpsi = 0.5 * tr((alpha alpha^T - K^-1) dK/dpsi)
  Eigen::MatrixXd k_inv = Eigen::MatrixXd::Identity(n, n);
  l.solveInPlace(k_inv);
  l.transpose().solveInPlace(k_inv);
  const Eigen::MatrixXd w = alpha * alpha.transpose() - k_inv;

  out.gradient.resize(p + 1);
  out.gradient[0] = 0.5 * (w.array() * k0.array()).sum();
  for (Eigen::Index d = 0; d < p; ++d) {
    const double inv_l2 = 1.0 / (params.lengthscales[d] * params.lengthscales[d]);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double diff = x(d, i) - x(d, j);
        acc += w(i, j) * k0(i, j) * diff * diff * inv_l2;
      }
    }
    out.gradient[d + 1] = 0.5 * acc;
  }
  return out;
}

double prob_satisfaction(const PredictiveDistribution& dist) {
  if (!(dist.variance > 0.0)) {
    if (dist.mean > 0.0) return 1.0;
    if (dist.mean < 0.0) return 0.0;
    return 0.5;
  }
  // 0.5 + 0.5 erf(z) written via erfc to keep the lower tail accurate.
  const double z = dist.mean / std::sqrt(2.0 * dist.variance);
  return 0.5 * std::erfc(-z);
}

KernelParams initial_kernel_params(const TrainingSet& training, const ParamGrid& grid) {
  if (training.dim() != grid.dim()) throw DimensionError("initial params: dimension mismatch");
  KernelParams p;
  const Eigen::VectorXd y = training.value_vector();
  double var = 0.0;
  if (y.size() > 0) {
    const double mean = y.mean();
    var = (y.array() - mean).square().mean();
  }
  p.signal_variance = std::max(var, 1e-6);
  p.lengthscales.resize(static_cast<Eigen::Index>(grid.dim()));
  for (std::size_t d = 0; d < grid.dim(); ++d)
    p.lengthscales[static_cast<Eigen::Index>(d)] = 0.25 * grid.span(d);
  return p;
}

}  // namespace clsv
