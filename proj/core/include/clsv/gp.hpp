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

// Noise-free Gaussian-process regression over a zero-mean prior with an ARD
// squared-exponential kernel
//
//   k(a, b) = sf2 * exp(-0.5 * sum_d (a_d - b_d)^2 / l_d^2)
//
// A small jitter is added to the kernel diagonal so that the factorization of
// K stays positive definite. The jitter starts at the requested value (or
// 1e-10 * sf2 when none is given) and is raised by x10 per failed attempt up
// to 1e-4 * sf2.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "clsv/grid.hpp"

namespace clsv {

struct KernelParams {
  double signal_variance = 1.0;   // sf2
  Eigen::VectorXd lengthscales;   // one per input dimension
  double jitter = 0.0;            // added to the diagonal of K

  std::size_t dim() const noexcept { return static_cast<std::size_t>(lengthscales.size()); }
  void validate() const;

  /// [log sf2, log l_1, ..., log l_p]
  Eigen::VectorXd to_log() const;
  static KernelParams from_log(const Eigen::VectorXd& log_params, double jitter = 0.0);
};

inline constexpr double kJitterStartFraction = 1e-10;
inline constexpr double kJitterMaxFraction = 1e-4;
inline constexpr double kJitterGrowth = 10.0;

double kernel_eval(const ParamPoint& a, const ParamPoint& b, const KernelParams& params);

/// Kernel between the columns of two dim x n matrices, without jitter.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs,
                              const KernelParams& params);

/// Observed pairs (theta_i, y_i).
class TrainingSet {
 public:
  TrainingSet() = default;
  TrainingSet(std::vector<ParamPoint> points, std::vector<double> values);

  void add(const ParamPoint& point, double value);
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  std::size_t dim() const;

  const std::vector<ParamPoint>& points() const noexcept { return points_; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool contains(const ParamPoint& p) const;
  /// Keeps the first occurrence of every exactly repeated point.
  TrainingSet deduplicated() const;

  Eigen::MatrixXd input_matrix() const;  // dim x N
  Eigen::VectorXd value_vector() const;

 private:
  std::vector<ParamPoint> points_;
  std::vector<double> values_;
};

struct PredictiveDistribution {
  double mean = 0.0;
  double variance = 0.0;
};

struct PredictiveField {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

/// Lower Cholesky factor of K + jitter * I, found by walking the jitter ladder.
struct JitteredFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

JitteredFactor factorize_with_jitter(const Eigen::MatrixXd& kernel, double signal_variance,
                                     double requested_jitter);

class GpModel {
 public:
  /// Deduplicates the training set, factors K and solves for alpha.
  /// Throws FactorizationError when the jitter ladder is exhausted.
  static GpModel fit(const TrainingSet& training, const KernelParams& params);

  PredictiveDistribution predict(const ParamPoint& query) const;
  /// Queries are the columns of a dim x Q matrix.
  PredictiveField predict_many(const Eigen::MatrixXd& queries) const;

  /// params().jitter is the jitter actually used by the factorization.
  const KernelParams& params() const noexcept { return params_; }
  const TrainingSet& training() const noexcept { return training_; }
  const Eigen::MatrixXd& inputs() const noexcept { return inputs_; }
  const Eigen::MatrixXd& chol_factor() const noexcept { return chol_; }
  const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
  std::size_t dim() const noexcept { return params_.dim(); }

 private:
  KernelParams params_;
  TrainingSet training_;
  Eigen::MatrixXd inputs_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
};

struct LmlResult {
  double value = 0.0;
  /// d LML / d [log sf2, log l_1, ..., log l_p]; the jitter is held fixed.
  Eigen::VectorXd gradient;
  double jitter = 0.0;
};

LmlResult log_marginal_likelihood(const TrainingSet& training, const KernelParams& params);

/// P(y > 0) under N(mean, variance). Zero variance resolves by the sign of the
/// mean: 1 for mean > 0, 0 for mean < 0 and 0.5 at exactly zero.
double prob_satisfaction(const PredictiveDistribution& dist);

/// sf2 = variance of the observed values (floored at 1e-6); each lengthscale
/// is a quarter of the grid span in its dimension.
KernelParams initial_kernel_params(const TrainingSet& training, const ParamGrid& grid);

}  // namespace clsv
