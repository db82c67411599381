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


// clsv: command-line front end for sweeps, single runs, experiments and plots.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "clsv/experiment.hpp"
#include "clsv/svg.hpp"
#include "clsv/systems.hpp"
#include "clsv/truth.hpp"

namespace fs = std::filesystem;
using namespace clsv;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string section;
};

std::vector<ExperimentConfig> load(const Common& c) {
  auto all = load_config(c.config);
  std::vector<ExperimentConfig> picked;
  for (auto& e : all) {
    if (!c.section.empty() && e.name != c.section) continue;
    if (!c.out.empty()) e.output_dir = c.out;
    if (c.seed) e.seed = *c.seed;
    picked.push_back(std::move(e));
  }
  if (picked.empty()) throw Error("no experiment named '" + c.section + "' in " + c.config);
  return picked;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

int cmd_sweep(const Common& c) {
  for (const auto& e : load(c)) {
    const SystemSpec spec = make_system(e.benchmark);
    const Formula formula = resolve_formula(e, spec);
    const ParamGrid grid = resolve_grid(e, spec);
    const SimConfig sim = resolve_sim_config(e);
    const std::string cache = e.cache_dir.empty() ? (fs::path(e.output_dir) / "cache").string() : e.cache_dir;
    const GroundTruth t = ground_truth_sweep(spec, formula, grid, sim, cache, c.jobs);
    const fs::path dir = fs::path(e.output_dir) / e.name;
    fs::create_directories(dir);
    std::ofstream out(dir / "truth.csv", std::ios::binary);
    out << "index";
    for (std::size_t d = 0; d < grid.dim(); ++d) out << ",theta_" << d + 1;
    out << ",robustness,satisfied\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const ParamPoint p = grid.point(i);
      out << i;
      for (Eigen::Index d = 0; d < p.size(); ++d) out << ',' << p[d];
      out << ',' << t.robustness[i] << ',' << (t.mask[i] ? 1 : 0) << '\n';
    }
    std::cout << e.name << ": " << t.satisfied_count() << " of " << grid.size() << " locations satisfy "
              << formula.to_string() << " -> " << (dir / "truth.csv").string() << '\n';
  }
  return 0;
}

int cmd_run(const Common& c, const std::string& strategy, std::size_t run_index) {
  const auto experiments = load(c);
  const ExperimentConfig& e = experiments.front();
  const SystemSpec spec = make_system(e.benchmark);
  const Formula formula = resolve_formula(e, spec);
  const ParamGrid grid = resolve_grid(e, spec);
  const SimConfig sim = resolve_sim_config(e);
  const std::string cache = e.cache_dir.empty() ? (fs::path(e.output_dir) / "cache").string() : e.cache_dir;
  const GroundTruth truth = ground_truth_sweep(spec, formula, grid, sim, cache, c.jobs);
  const Strategy s = parse_strategy(strategy);
  const MeasureFn measure_fn = [&](std::size_t i) {
    return e.live_measurements ? measure(spec, formula, grid.point(i), sim).value : truth.robustness.at(i);
  };
  const RunResult r = run_closed_loop(grid, measure_fn, truth.mask, loop_for(e, run_index, s));

  std::vector<RunRow> rows;
  for (const auto& b : r.batches) {
    RunRow row{run_index, strategy, std::string(batch_method_name(e.batch_method_for(s))), b.batch,
               b.training_size, b.simulations, b.error, b.filtered_error, b.coverage,
               b.params.signal_variance,
               std::vector<double>(b.params.lengthscales.data(), b.params.lengthscales.data() + b.params.lengthscales.size()),
               e.timing ? b.seconds : 0.0};
    rows.push_back(std::move(row));
    std::cout << "batch " << b.batch << "  |L| = " << b.training_size << "  error " << fmt(b.error)
              << "  filtered " << fmt(b.filtered_error) << " (coverage " << fmt(b.coverage) << ")\n";
  }
  const fs::path dir = fs::path(e.output_dir) / e.name;
  fs::create_directories(dir);
  const fs::path path = dir / ("run-" + std::to_string(run_index) + "-" + strategy + ".csv");
  std::ofstream out(path, std::ios::binary);
  write_runs_csv(out, rows);
  std::cout << "simulations: " << r.simulations << " -> " << path.string() << '\n';
  return 0;
}

int cmd_experiment(const Common& c) {
  int code = 0;
  for (const auto& e : load(c)) {
    const ExperimentResult r = run_experiment(e, c.jobs);
    std::cout << e.name << " (" << e.benchmark << ", " << e.runs << " runs, truth " << r.truth_satisfied << "/"
              << r.grid_size << " satisfied)\n";
    for (const auto& s : r.report.strategies) {
      std::cout << "  " << s.strategy << ": final error " << fmt(s.mean_error.back()) << " +/- "
                << fmt(s.std_error.back()) << ", filtered " << fmt(s.mean_filtered.back()) << " ("
                << s.complete_runs << " complete runs)\n";
    }
    for (const auto& w : r.report.win_rates) {
      std::cout << "  " << r.report.reference << " matches or beats " << w.competitor << " in "
                << fmt(w.rate.back()) << " of runs\n";
    }
    for (const auto& i : r.report.incomplete) {
      std::cerr << "  incomplete: run " << i.run << " " << i.strategy << ": " << i.message << '\n';
      code = 2;
    }
    std::cout << "  outputs in " << (fs::path(e.output_dir) / e.name).string() << '\n';
  }
  return code;
}

int cmd_plot(const std::string& in_dir) {
  std::ifstream in(fs::path(in_dir) / "runs.csv");
  if (!in) throw Error("cannot open " + (fs::path(in_dir) / "runs.csv").string());
  const auto rows = read_runs_csv(in);
  std::vector<std::string> strategies;
  std::size_t batches = 0, runs = 0;
  for (const auto& r : rows) {
    if (std::find(strategies.begin(), strategies.end(), r.strategy) == strategies.end()) strategies.push_back(r.strategy);
    batches = std::max(batches, r.batch);
    runs = std::max(runs, r.run + 1);
  }
  ComparisonReport report = aggregate_rows(rows, strategies, batches, runs);
  report.title = fs::path(in_dir).filename().string();
  write_report_files(report, in_dir);
  std::cout << "re-rendered " << in_dir << " from " << rows.size() << " rows\n";
  return report.complete() ? 0 : 2;
}

int cmd_trace(const std::string& benchmark, const std::vector<double>& theta, const std::string& formula_text,
              double dt, const std::string& out_path) {
  const SystemSpec spec = make_system(benchmark);
  SimConfig sim = default_sim_config(benchmark);
  if (dt > 0.0) sim.dt = dt;
  ParamPoint p = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
  const Trace trace = simulate(spec, p, sim);
  ExperimentConfig e;
  e.benchmark = benchmark;
  e.formula = formula_text;
  const Formula f = resolve_formula(e, spec);
  const RobustnessMeasurement m = robustness(f, trace);
  if (out_path.empty() || out_path == "-") {
    trace.write_csv(std::cout);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    trace.write_csv(out);
  }
  std::cerr << f.to_string() << ": robustness " << m.value << (m.satisfied ? " (satisfied)" : " (violated)") << '\n';
  return 0;
}

void cmd_list() {
  std::cout << "benchmarks:\n";
  for (const auto& n : system_names()) {
    const SystemSpec s = make_system(n);
    std::cout << "  " << n << "  (" << s.param_dim << " parameters, default formula " << s.default_formula << ")\n";
  }
  std::cout << "formula presets:\n";
  for (const auto& n : formula_preset_names()) std::cout << "  " << n << ": " << formula_preset(n) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop statistical verification with Gaussian processes and entropy-driven batch sampling"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool with_seed) {
    sub->add_option("--config", common.config, "Experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "Output directory (overrides the config)");
    sub->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--section", common.section, "Only this experiment section");
    if (with_seed) sub->add_option("--seed", common.seed, "Master seed (overrides the config)");
  };

  auto* sweep = app.add_subcommand("sweep", "Exhaustive ground-truth sweep over the grid");
  add_common(sweep, false);

  auto* run = app.add_subcommand("run", "A single closed-loop run");
  add_common(run, true);
  std::string strategy = "entropy";
  std::size_t run_index = 0;
  run->add_option("--strategy", strategy, "entropy | variance | emc | random");
  run->add_option("--run-index", run_index, "Run index used for seed derivation");

  auto* experiment = app.add_subcommand("experiment", "Multi-run, multi-strategy comparison");
  add_common(experiment, true);

  auto* plot = app.add_subcommand("plot", "Re-render aggregates and SVG plots from runs.csv");
  std::string in_dir;
  plot->add_option("--in", in_dir, "Experiment output directory containing runs.csv")->required();

  auto* trace = app.add_subcommand("trace", "Simulate one parameter point and export the trace as CSV");
  std::string benchmark = "mrac2d", formula_text, out_path;
  std::vector<double> theta;
  double dt = 0.0;
  trace->add_option("--benchmark", benchmark, "mrac2d | mrac3d | autopilot");
  trace->add_option("--theta", theta, "Parameter point, comma separated")->required()->delimiter(',');
  trace->add_option("--formula", formula_text, "Formula text or preset:<name>");
  trace->add_option("--dt", dt, "Integrator step");
  trace->add_option("--out", out_path, "CSV path (stdout when omitted)");

  app.add_subcommand("list", "List benchmarks and formula presets");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sweep) return cmd_sweep(common);
    if (*run) return cmd_run(common, strategy, run_index);
    if (*experiment) return cmd_experiment(common);
    if (*plot) return cmd_plot(in_dir);
    if (*trace) return cmd_trace(benchmark, theta, formula_text, dt, out_path);
    cmd_list();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
