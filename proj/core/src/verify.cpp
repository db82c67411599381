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


#include "clsv/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "clsv/kdpp.hpp"
#include "clsv/rng.hpp"

namespace clsv {

std::string_view batch_method_name(BatchMethod m) noexcept {
  switch (m) {
    case BatchMethod::kdpp: return "kdpp";
    case BatchMethod::approx_entropy: return "approx_entropy";
    case BatchMethod::plain_argmax: return "plain_argmax";
  }
  return "?";
}

BatchMethod parse_batch_method(std::string_view name) {
  for (auto m : {BatchMethod::kdpp, BatchMethod::approx_entropy, BatchMethod::plain_argmax}) {
    if (batch_method_name(m) == name) return m;
  }
  throw Error("unknown batch method '" + std::string(name) + "'");
}

std::string_view hyper_mode_name(HyperMode m) noexcept {
  return m == HyperMode::fixed ? "static" : "optimize_each_batch";
}

HyperMode parse_hyper_mode(std::string_view name) {
  if (name == "optimize_each_batch") return HyperMode::optimize_each_batch;
  if (name == "static") return HyperMode::fixed;
  throw Error("unknown hyperparameter mode '" + std::string(name) + "'");
}

void LoopConfig::validate(std::size_t grid_size) const {
  if (initial_count < 2) throw Error("loop config: initial_count must be at least 2");
  if (batch_size < 1) throw Error("loop config: batch_size must be at least 1");
  if (batch_count < 1) throw Error("loop config: batch_count must be at least 1");
  if (total_budget() > grid_size)
    throw Error("loop config: budget " + std::to_string(total_budget()) + " exceeds the grid size " +
                std::to_string(grid_size));
  if (batch_method == BatchMethod::kdpp && candidate_count < batch_size)
    throw Error("loop config: m_t must be at least the batch size");
  if (!(dpp_bandwidth > 0.0)) throw Error("loop config: dpp_bandwidth must be positive");
  if (!(initial_lengthscale > 0.0)) throw Error("loop config: initial lengthscale must be positive");
  if (restarts < 1) throw Error("loop config: restarts must be at least 1");
  if (!(confidence_threshold >= 0.5 && confidence_threshold <= 1.0))
    throw Error("loop config: confidence threshold must lie in [0.5, 1]");
}

// ---------------------------------------------------------------------------

RegionEstimate classify_field(const Eigen::VectorXd& mean, const Eigen::VectorXd& variance) {
  if (mean.size() != variance.size()) throw DimensionError("classify: moment sizes differ");
  RegionEstimate r;
  r.sat_mask.resize(static_cast<std::size_t>(mean.size()));
  r.confidence.resize(static_cast<std::size_t>(mean.size()));
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    r.sat_mask[static_cast<std::size_t>(i)] = mean[i] > 0.0;
    r.confidence[static_cast<std::size_t>(i)] = prob_satisfaction({mean[i], variance[i]});
  }
  return r;
}

RegionEstimate classify_regions(const GpModel& model, const Eigen::MatrixXd& grid_points) {
  const PredictiveField f = model.predict_many(grid_points);
  return classify_field(f.mean, f.variance);
}

RegionEstimate classify_regions(const GpModel& model, const ParamGrid& grid) {
  return classify_regions(model, grid.points());
}

double misclassification_error(const RegionEstimate& estimate, const std::vector<bool>& truth) {
  if (estimate.sat_mask.size() != truth.size()) throw DimensionError("error metric: mask sizes differ");
  if (truth.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += estimate.sat_mask[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

FilteredError confidence_filtered_error(const RegionEstimate& estimate, const std::vector<bool>& truth,
                                        double threshold) {
  if (estimate.sat_mask.size() != truth.size() || estimate.confidence.size() != truth.size())
    throw DimensionError("filtered error: mask sizes differ");
  if (!(threshold >= 0.5 && threshold <= 1.0)) throw Error("filtered error: threshold must lie in [0.5, 1]");
  std::size_t kept = 0, wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double p = estimate.confidence[i];
    if (std::max(p, 1.0 - p) < threshold) continue;
    ++kept;
    wrong += estimate.sat_mask[i] != truth[i];
  }
  if (kept == 0) return {0.0, 0.0, true};
  return {static_cast<double>(wrong) / static_cast<double>(kept),
          static_cast<double>(kept) / static_cast<double>(truth.size()), false};
}

// ---------------------------------------------------------------------------

PendingCovariance::PendingCovariance(const GpModel& model, Eigen::MatrixXd queries)
    : params_(model.params()),
      inputs_(model.inputs()),
      lower_(model.chol_factor()),
      queries_(std::move(queries)) {
  if (queries_.cols() > 0) {
    if (static_cast<std::size_t>(queries_.rows()) != params_.dim())
      throw DimensionError("pending covariance: query dimension mismatch");
    solved_ = lower_.triangularView<Eigen::Lower>().solve(kernel_matrix(inputs_, queries_, params_));
    variances_ = (params_.signal_variance - solved_.colwise().squaredNorm().array()).max(0.0).matrix().transpose();
  }
}

void PendingCovariance::add(const ParamPoint& point) {
  if (static_cast<std::size_t>(point.size()) != params_.dim())
    throw DimensionError("pending covariance: point dimension mismatch");
  for (Eigen::Index c = 0; c < inputs_.cols(); ++c) {
    if (inputs_.col(c) == point) throw Error("pending covariance: point already in the training or pending set");
  }
  const Eigen::VectorXd k = kernel_matrix(inputs_, point, params_).col(0);
  const Eigen::VectorXd l = lower_.triangularView<Eigen::Lower>().solve(k);
  const double d2 = params_.signal_variance + params_.jitter - l.squaredNorm();
  if (!(d2 > 0.0)) throw FactorizationError("pending covariance: update lost positive definiteness", params_.jitter);
  const double d = std::sqrt(d2);

  const Eigen::Index n = lower_.rows();
  Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(n + 1, n + 1);
  grown.topLeftCorner(n, n) = lower_;
  grown.block(n, 0, 1, n) = l.transpose();
  grown(n, n) = d;
  lower_ = std::move(grown);

  inputs_.conservativeResize(Eigen::NoChange, n + 1);
  inputs_.col(n) = point;
  pending_.push_back(point);

  if (queries_.cols() > 0) {
    const Eigen::RowVectorXd row =
        (kernel_matrix(point, queries_, params_).row(0) - l.transpose() * solved_) / d;
    solved_.conservativeResize(n + 1, Eigen::NoChange);
    solved_.row(n) = row;
    variances_ = (variances_.array() - row.transpose().array().square()).max(0.0).matrix();
  }
}

double PendingCovariance::variance(const ParamPoint& query) const {
  const Eigen::VectorXd k = kernel_matrix(inputs_, query, params_).col(0);
  const Eigen::VectorXd v = lower_.triangularView<Eigen::Lower>().solve(k);
  return std::max(0.0, params_.signal_variance - v.squaredNorm());
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> initial_locations(std::size_t grid_size, std::size_t count, std::uint64_t seed) {
  if (count > grid_size) throw Error("initial set larger than the grid");
  Rng rng(derive_seed(seed, {hash_label("init")}));
  std::vector<std::size_t> perm(grid_size);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const auto span = static_cast<double>(grid_size - i);
    const std::size_t j = i + std::min(static_cast<std::size_t>(uniform01(rng) * span), grid_size - i - 1);
    std::swap(perm[i], perm[j]);
  }
  perm.resize(count);
  return perm;
}

std::vector<std::size_t> select_approx_entropy_batch(const GpModel& model, const Eigen::MatrixXd& grid_points,
                                                     const std::vector<std::size_t>& available,
                                                     Strategy strategy, std::size_t m, Rng& rng) {
  if (m > available.size()) throw Error("approximate entropy batch: fewer candidates than the batch size");
  Eigen::MatrixXd queries(grid_points.rows(), static_cast<Eigen::Index>(available.size()));
  for (std::size_t i = 0; i < available.size(); ++i)
    queries.col(static_cast<Eigen::Index>(i)) = grid_points.col(static_cast<Eigen::Index>(available[i]));
  // The mean is held at the current training set; only the variance sees S.
  const Eigen::VectorXd held_mean = model.predict_many(queries).mean;
  PendingCovariance pending(model, queries);

  std::vector<bool> used(available.size(), false);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < m; ++j) {
    AcquisitionScores s = score_field(strategy, available, held_mean, pending.variances(), rng);
    for (std::size_t i = 0; i < used.size(); ++i) {
      if (used[i]) s.scores[i] = -std::numeric_limits<double>::infinity();
    }
    const std::size_t loc = select_sequential(s);
    const auto pos = static_cast<std::size_t>(std::lower_bound(available.begin(), available.end(), loc) - available.begin());
    used[pos] = true;
    out.push_back(loc);
    pending.add(queries.col(static_cast<Eigen::Index>(pos)));
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

class LoopRunner {
 public:
  LoopRunner(const ParamGrid& grid, const MeasureFn& measure, const std::vector<bool>& truth,
             const LoopConfig& config)
      : config_(config), measure_(measure), truth_(truth), pool_(grid) {
    config_.validate(grid.size());
    if (truth_.size() != grid.size()) throw DimensionError("run: truth mask does not match the grid");
  }

  RunResult run() {
    auto t0 = Clock::now();
    const auto init = initial_locations(pool_.grid().size(), config_.initial_count, config_.seed);
    observe(init, 0);
    params_ = initial_kernel_params(training_, pool_.grid());
    for (std::size_t d = 0; d < pool_.grid().dim(); ++d)
      params_.lengthscales[static_cast<Eigen::Index>(d)] = config_.initial_lengthscale * pool_.grid().span(d);
    GpModel model = train(0);
    record(0, model, init, false, t0);

    Rng select_rng(derive_seed(config_.seed, {hash_label("select"), hash_label(strategy_name(config_.strategy))}));
    for (std::size_t b = 1; b <= config_.batch_count; ++b) {
      t0 = Clock::now();
      bool fallback = false;
      std::vector<std::size_t> batch;
      try {
        batch = choose(model, select_rng, fallback);
      } catch (const RunError&) {
        throw;
      } catch (const std::exception& e) {
        throw RunError(e.what(), b);
      }
      observe(batch, b);
      model = train(b);
      record(b, model, batch, fallback, t0);
    }
    result_.estimate = classify_regions(model, pool_.grid_points());
    result_.simulations = simulations_;
    return std::move(result_);
  }

 private:
  std::vector<std::size_t> choose(const GpModel& model, Rng& rng, bool& fallback) {
    const std::size_t m = config_.batch_size;
    switch (config_.batch_method) {
      case BatchMethod::plain_argmax:
        return select_top(score_pool(model, pool_, config_.strategy, rng), m);
      case BatchMethod::approx_entropy:
        return select_approx_entropy_batch(model, pool_.grid_points(), pool_.available_indices(),
                                           config_.strategy, m, rng);
      case BatchMethod::kdpp: {
        const ImportanceDistribution dist =
            importance_distribution(score_pool(model, pool_, config_.strategy, rng));
        fallback = dist.uniform_fallback;
        return select_kdpp_batch(pool_.grid(), dist, m, config_.candidate_count, config_.dpp_bandwidth, rng);
      }
    }
    throw Error("unhandled batch method");
  }

  void observe(const std::vector<std::size_t>& locations, std::size_t batch) {
    std::vector<double> ys(locations.size());
    for (std::size_t i = 0; i < locations.size(); ++i) {
      if (!pool_.available(locations[i]))
        throw RunError("location " + std::to_string(locations[i]) + " selected twice", batch);
      try {
        ys[i] = measure_(locations[i]);
      } catch (const std::exception& e) {
        throw RunError(e.what(), batch);
      }
      ++simulations_;
      if (!std::isfinite(ys[i])) throw RunError("non-finite measurement", batch);
    }
    for (std::size_t i = 0; i < locations.size(); ++i) {
      pool_.remove(locations[i]);
      training_.add(pool_.grid_points().col(static_cast<Eigen::Index>(locations[i])), ys[i]);
      result_.observed.push_back(locations[i]);
    }
  }

  GpModel train(std::size_t batch) {
    try {
      if (config_.hyper_mode == HyperMode::optimize_each_batch) {
        HyperOptOptions opts;
        opts.restarts = config_.restarts;
        opts.max_iterations = config_.max_iterations;
        opts.seed = derive_seed(config_.seed, {hash_label("hyper"), batch});
        params_ = optimize_hyperparams(training_, params_, opts).params;
        params_.jitter = 0.0;
      }
      return GpModel::fit(training_, params_);
    } catch (const std::exception& e) {
      throw RunError(e.what(), batch);
    }
  }

  void record(std::size_t batch, const GpModel& model, const std::vector<std::size_t>& selected,
              bool fallback, Clock::time_point t0) {
    const RegionEstimate est = classify_regions(model, pool_.grid_points());
    const FilteredError f = confidence_filtered_error(est, truth_, config_.confidence_threshold);
    BatchRecord r;
    r.batch = batch;
    r.training_size = training_.size();
    r.simulations = simulations_;
    r.error = misclassification_error(est, truth_);
    r.filtered_error = f.error;
    r.coverage = f.coverage;
    r.filter_empty = f.empty;
    r.params = model.params();
    r.uniform_fallback = fallback;
    r.selected = selected;
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    result_.batches.push_back(std::move(r));
  }

  LoopConfig config_;
  const MeasureFn& measure_;
  const std::vector<bool>& truth_;
  CandidatePool pool_;
  TrainingSet training_;
  KernelParams params_;
  std::size_t simulations_ = 0;
  RunResult result_;
};

}  // namespace

RunResult run_closed_loop(const ParamGrid& grid, const MeasureFn& measure, const std::vector<bool>& truth,
                          const LoopConfig& config) {
  return LoopRunner(grid, measure, truth, config).run();
}

RunResult run_batch_approx_entropy(const ParamGrid& grid, const MeasureFn& measure,
                                   const std::vector<bool>& truth, LoopConfig config) {
  config.batch_method = BatchMethod::approx_entropy;
  return LoopRunner(grid, measure, truth, config).run();
}

}  // namespace clsv
