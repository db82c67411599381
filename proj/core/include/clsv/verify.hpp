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

// Closed-loop verification drivers. A run starts from a random initial
// training set, then repeats T times: score the unobserved grid locations,
// pick a batch of M, measure them, retrain the GP, and record the
// misclassification error of the updated sat/fail estimate against the
// exhaustive ground truth.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "clsv/acquisition.hpp"
#include "clsv/error.hpp"
#include "clsv/gp.hpp"
#include "clsv/grid.hpp"
#include "clsv/hyperopt.hpp"

namespace clsv {

enum class BatchMethod { kdpp, approx_entropy, plain_argmax };
enum class HyperMode { optimize_each_batch, fixed };

std::string_view batch_method_name(BatchMethod m) noexcept;
BatchMethod parse_batch_method(std::string_view name);
/// "optimize_each_batch" or "static".
std::string_view hyper_mode_name(HyperMode m) noexcept;
HyperMode parse_hyper_mode(std::string_view name);

struct LoopConfig {
  std::size_t initial_count = 50;
  std::size_t batch_size = 5;    // M
  std::size_t batch_count = 20;  // T
  Strategy strategy = Strategy::entropy;
  BatchMethod batch_method = BatchMethod::kdpp;
  HyperMode hyper_mode = HyperMode::optimize_each_batch;
  /// Seed of the run. The initial set depends on it alone, so strategies
  /// sharing a seed share their initial training set and first model.
  std::uint64_t seed = 0;
  std::size_t candidate_count = 1000;  // M_T
  double dpp_bandwidth = 5.0;
  /// Initial lengthscale in each dimension, as a fraction of the grid span.
  double initial_lengthscale = 0.25;
  int restarts = 3;
  int max_iterations = 100;
  double confidence_threshold = 0.95;

  std::size_t total_budget() const noexcept { return initial_count + batch_size * batch_count; }
  void validate(std::size_t grid_size) const;
};

struct RegionEstimate {
  std::vector<bool> sat_mask;     // mean > 0
  std::vector<double> confidence; // P+
};

RegionEstimate classify_field(const Eigen::VectorXd& mean, const Eigen::VectorXd& variance);
RegionEstimate classify_regions(const GpModel& model, const ParamGrid& grid);
RegionEstimate classify_regions(const GpModel& model, const Eigen::MatrixXd& grid_points);

double misclassification_error(const RegionEstimate& estimate, const std::vector<bool>& truth);

struct FilteredError {
  double error = 0.0;
  double coverage = 0.0;
  bool empty = false;  // no location reached the threshold
};

/// Error over the locations with max(P+, 1 - P+) >= threshold.
FilteredError confidence_filtered_error(const RegionEstimate& estimate, const std::vector<bool>& truth,
                                        double threshold = 0.95);

/// Posterior variance of the GP trained on D plus pending points S, with the
/// hyperparameters and jitter of `model`. Measurements are not needed.
class PendingCovariance {
 public:
  /// `queries` (dim x Q) is the set tracked by variances(); may be empty.
  explicit PendingCovariance(const GpModel& model, Eigen::MatrixXd queries = {});

  /// Throws Error if the point repeats a training or pending point.
  void add(const ParamPoint& point);

  std::size_t pending_count() const noexcept { return pending_.size(); }
  double variance(const ParamPoint& query) const;
  /// Variances at the tracked queries, clamped at zero.
  const Eigen::VectorXd& variances() const noexcept { return variances_; }

 private:
  KernelParams params_;
  Eigen::MatrixXd inputs_;  // dim x (N + pending)
  Eigen::MatrixXd lower_;   // Cholesky factor over the same columns
  std::vector<ParamPoint> pending_;
  Eigen::MatrixXd queries_;
  Eigen::MatrixXd solved_;  // lower^{-1} K(inputs, queries)
  Eigen::VectorXd variances_;
};

/// Measures the robustness at a grid location.
using MeasureFn = std::function<double(std::size_t grid_index)>;

struct BatchRecord {
  std::size_t batch = 0;  // 0 is the initial model
  std::size_t training_size = 0;
  std::size_t simulations = 0;  // cumulative
  double error = 0.0;
  double filtered_error = 0.0;
  double coverage = 0.0;
  bool filter_empty = false;
  KernelParams params;
  bool uniform_fallback = false;  // P_H degenerated to uniform in this batch
  double seconds = 0.0;
  std::vector<std::size_t> selected;  // locations added in this batch
};

struct RunResult {
  std::vector<BatchRecord> batches;  // T + 1 records
  RegionEstimate estimate;
  std::vector<std::size_t> observed;  // every measured location, in order
  std::size_t simulations = 0;
};

class RunError : public Error {
 public:
  RunError(const std::string& what, std::size_t batch)
      : Error("batch " + std::to_string(batch) + ": " + what), batch_(batch) {}
  std::size_t batch() const noexcept { return batch_; }

 private:
  std::size_t batch_;
};

/// Uniformly random distinct grid locations for the initial training set.
std::vector<std::size_t> initial_locations(std::size_t grid_size, std::size_t count, std::uint64_t seed);

/// Drives a run with the configured strategy and batch method.
RunResult run_closed_loop(const ParamGrid& grid, const MeasureFn& measure,
                          const std::vector<bool>& truth, const LoopConfig& config);

/// Same loop with the batch chosen by approximate entropy reduction.
RunResult run_batch_approx_entropy(const ParamGrid& grid, const MeasureFn& measure,
                                   const std::vector<bool>& truth, LoopConfig config);

/// Greedy batch under a held mean and pending-updated variance. `available`
/// lists candidate grid indices; the result has `m` distinct entries.
std::vector<std::size_t> select_approx_entropy_batch(const GpModel& model, const Eigen::MatrixXd& grid_points,
                                                     const std::vector<std::size_t>& available,
                                                     Strategy strategy, std::size_t m, Rng& rng);

}  // namespace clsv
