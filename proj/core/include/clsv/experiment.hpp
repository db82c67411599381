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

// Multi-seed, multi-strategy comparisons. Each run index i gets the seed
// derive_seed(master, {i}); every strategy in that run starts from the same
// initial training set and the same first model.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "clsv/acquisition.hpp"
#include "clsv/grid.hpp"
#include "clsv/stl.hpp"
#include "clsv/systems.hpp"
#include "clsv/verify.hpp"

namespace clsv {

struct ExperimentConfig {
  std::string name = "default";
  std::string benchmark = "mrac2d";
  /// Formula text, "preset:<name>", or empty for the benchmark default.
  std::string formula;
  std::vector<std::size_t> grid;  // empty: benchmark default
  LoopConfig loop;                // strategy and batch_method are set per strategy
  std::vector<Strategy> strategies{Strategy::entropy, Strategy::variance, Strategy::emc, Strategy::random};
  BatchMethod entropy_batch_method = BatchMethod::kdpp;
  BatchMethod competitor_batch_method = BatchMethod::plain_argmax;
  std::size_t runs = 1;
  std::uint64_t seed = 1;
  std::string output_dir = "results";
  std::string cache_dir;  // empty: <output_dir>/cache
  double dt = 0.0;        // 0: benchmark default
  double t_final = 0.0;   // 0: benchmark default
  bool timing = false;    // write wall-clock seconds instead of zeros
  bool live_measurements = false;  // re-simulate instead of reading the sweep

  BatchMethod batch_method_for(Strategy s) const noexcept {
    return s == Strategy::entropy ? entropy_batch_method : competitor_batch_method;
  }
  void validate() const;
};

/// INI-style text: `key = value` lines, '#' or ';' comments, and optional
/// `[name]` sections. Keys before the first section are defaults shared by
/// all sections. Without sections, a single experiment named "default".
std::vector<ExperimentConfig> parse_config(std::string_view text);
std::vector<ExperimentConfig> load_config(const std::filesystem::path& path);

/// The formula, grid and integrator settings an experiment resolves to.
Formula resolve_formula(const ExperimentConfig& config, const SystemSpec& spec);
ParamGrid resolve_grid(const ExperimentConfig& config, const SystemSpec& spec);
SimConfig resolve_sim_config(const ExperimentConfig& config);
/// Loop settings for one (run index, strategy) cell.
LoopConfig loop_for(const ExperimentConfig& config, std::size_t run, Strategy strategy);

/// One row of runs.csv.
struct RunRow {
  std::size_t run = 0;
  std::string strategy;
  std::string batch_method;
  std::size_t batch = 0;
  std::size_t training_size = 0;
  std::size_t simulations = 0;
  double error = 0.0;
  double filtered_error = 0.0;
  double coverage = 0.0;
  double signal_variance = 0.0;
  std::vector<double> lengthscales;
  double seconds = 0.0;
};

void write_runs_csv(std::ostream& out, const std::vector<RunRow>& rows);
std::vector<RunRow> read_runs_csv(std::istream& in);

struct StrategyCurves {
  std::string strategy;
  std::size_t complete_runs = 0;
  std::vector<double> mean_error, std_error;
  std::vector<double> mean_filtered, std_filtered;
  std::vector<double> mean_coverage;
};

struct WinRateCurve {
  std::string competitor;
  std::vector<std::size_t> runs;  // paired complete runs per batch
  std::vector<double> rate;       // fraction with reference error <= competitor error
};

struct IncompleteRun {
  std::size_t run = 0;
  std::string strategy;
  std::string message;
};

struct ComparisonReport {
  std::string title;
  std::string reference;  // strategy the win rates are measured for
  std::vector<std::size_t> training_sizes;  // T + 1 points
  std::vector<StrategyCurves> strategies;
  std::vector<WinRateCurve> win_rates;
  std::vector<IncompleteRun> incomplete;

  bool complete() const noexcept { return incomplete.empty(); }
  const StrategyCurves* find(std::string_view strategy) const;
};

/// Means use complete runs only (T + 1 rows); standard deviations are sample
/// deviations (n - 1), zero for a single run. `strategies` fixes the order;
/// the reference is "entropy" when present, otherwise the first strategy.
ComparisonReport aggregate_rows(const std::vector<RunRow>& rows, const std::vector<std::string>& strategies,
                                std::size_t batch_count, std::size_t runs);

struct ExperimentResult {
  ExperimentConfig config;
  ComparisonReport report;
  std::vector<RunRow> rows;
  std::size_t truth_satisfied = 0;
  std::size_t grid_size = 0;
};

/// Runs every (run, strategy) pair on `jobs` workers, writes runs.csv,
/// aggregate.csv, winrate.csv, summary.json and the SVG plots into
/// <output_dir>/<name>/, and returns the report. Failed runs are recorded as
/// incomplete rather than aborting the experiment.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned jobs = 1);

/// Writes aggregate.csv, winrate.csv and the plots for an existing report.
void write_report_files(const ComparisonReport& report, const std::filesystem::path& dir);

}  // namespace clsv
