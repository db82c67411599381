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


#include "clsv/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "clsv/rng.hpp"
#include "clsv/svg.hpp"
#include "clsv/truth.hpp"
#include "parallel.hpp"
#include "text.hpp"

namespace clsv {

Formula resolve_formula(const ExperimentConfig& config, const SystemSpec& spec) {
  std::string text = config.formula;
  if (text.empty()) {
    text = formula_preset(spec.default_formula);
  } else if (text.rfind("preset:", 0) == 0) {
    text = formula_preset(text.substr(7));
  }
  Formula f = parse_formula(text);
  for (const auto& ch : f.channels()) {
    if (std::find(spec.channels.begin(), spec.channels.end(), ch) == spec.channels.end())
      throw Error("formula uses channel '" + ch + "' which " + spec.name + " does not produce");
  }
  return f;
}

ParamGrid resolve_grid(const ExperimentConfig& config, const SystemSpec& spec) {
  auto counts = config.grid.empty() ? spec.default_grid : config.grid;
  if (counts.size() != spec.param_dim)
    throw Error("grid has " + std::to_string(counts.size()) + " dimensions; " + spec.name + " needs " +
                std::to_string(spec.param_dim));
  return ParamGrid(spec.box, counts);
}

SimConfig resolve_sim_config(const ExperimentConfig& config) {
  SimConfig sim = default_sim_config(config.benchmark);
  if (config.dt > 0.0) sim.dt = config.dt;
  if (config.t_final > 0.0) sim.t_final = config.t_final;
  sim.validate();
  return sim;
}

LoopConfig loop_for(const ExperimentConfig& config, std::size_t run, Strategy strategy) {
  LoopConfig loop = config.loop;
  loop.strategy = strategy;
  loop.batch_method = config.batch_method_for(strategy);
  loop.seed = derive_seed(config.seed, {static_cast<std::uint64_t>(run)});
  return loop;
}

// ---------------------------------------------------------------------------

void write_runs_csv(std::ostream& out, const std::vector<RunRow>& rows) {
  std::size_t dims = 0;
  for (const auto& r : rows) dims = std::max(dims, r.lengthscales.size());
  out << "run,strategy,batch_method,batch,training_size,simulations,error,filtered_error,coverage,signal_variance";
  for (std::size_t d = 0; d < dims; ++d) out << ",lengthscale_" << d + 1;
  out << ",seconds\n";
  for (const auto& r : rows) {
    out << r.run << ',' << r.strategy << ',' << r.batch_method << ',' << r.batch << ',' << r.training_size << ','
        << r.simulations << ',' << text::fmt(r.error) << ',' << text::fmt(r.filtered_error) << ','
        << text::fmt(r.coverage) << ',' << text::fmt(r.signal_variance);
    for (std::size_t d = 0; d < dims; ++d)
      out << ',' << (d < r.lengthscales.size() ? text::fmt(r.lengthscales[d]) : std::string());
    out << ',' << text::fmt(r.seconds) << '\n';
  }
}

namespace {

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.emplace_back(text::trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double cell_double(const std::string& s, std::size_t row) {
  double v = 0.0;
  if (!text::parse(s, v)) throw Error("runs csv: bad number '" + s + "' on row " + std::to_string(row));
  return v;
}

std::size_t cell_size(const std::string& s, std::size_t row) {
  const double v = cell_double(s, row);
  if (v < 0.0 || v != std::floor(v)) throw Error("runs csv: bad count '" + s + "' on row " + std::to_string(row));
  return static_cast<std::size_t>(v);
}

}  // namespace

std::vector<RunRow> read_runs_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("runs csv: missing header");
  const auto header = split_cells(line);
  if (header.size() < 11 || header[0] != "run" || header.back() != "seconds")
    throw Error("runs csv: unexpected header");
  const std::size_t dims = header.size() - 11;
  std::vector<RunRow> rows;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (text::trim(line).empty()) continue;
    const auto c = split_cells(line);
    if (c.size() != header.size()) throw Error("runs csv: wrong column count on row " + std::to_string(row_no));
    RunRow r;
    r.run = cell_size(c[0], row_no);
    r.strategy = c[1];
    r.batch_method = c[2];
    r.batch = cell_size(c[3], row_no);
    r.training_size = cell_size(c[4], row_no);
    r.simulations = cell_size(c[5], row_no);
    r.error = cell_double(c[6], row_no);
    r.filtered_error = cell_double(c[7], row_no);
    r.coverage = cell_double(c[8], row_no);
    r.signal_variance = cell_double(c[9], row_no);
    for (std::size_t d = 0; d < dims; ++d) {
      if (!c[10 + d].empty()) r.lengthscales.push_back(cell_double(c[10 + d], row_no));
    }
    r.seconds = cell_double(c.back(), row_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------

const StrategyCurves* ComparisonReport::find(std::string_view strategy) const {
  for (const auto& s : strategies) {
    if (s.strategy == strategy) return &s;
  }
  return nullptr;
}

namespace {

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (v.empty()) {
    mean = std::nan("");
    sd = std::nan("");
    return;
  }
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

ComparisonReport aggregate_rows(const std::vector<RunRow>& rows, const std::vector<std::string>& strategies,
                                std::size_t batch_count, std::size_t runs) {
  const std::size_t points = batch_count + 1;
  // cells[(strategy, run)][batch] -> row
  std::map<std::pair<std::string, std::size_t>, std::vector<const RunRow*>> cells;
  for (const auto& r : rows) {
    if (r.batch >= points || r.run >= runs) throw Error("aggregate: row outside the experiment shape");
    auto& cell = cells[{r.strategy, r.run}];
    cell.resize(points, nullptr);
    cell[r.batch] = &r;
  }
  auto complete = [&](const std::string& s, std::size_t run) -> const std::vector<const RunRow*>* {
    const auto it = cells.find({s, run});
    if (it == cells.end()) return nullptr;
    for (const auto* p : it->second) {
      if (!p) return nullptr;
    }
    return &it->second;
  };

  ComparisonReport report;
  report.training_sizes.assign(points, 0);
  for (const auto& r : rows) report.training_sizes[r.batch] = r.training_size;
  report.reference = std::find(strategies.begin(), strategies.end(), "entropy") != strategies.end()
                         ? "entropy"
                         : (strategies.empty() ? std::string() : strategies.front());

  for (const auto& s : strategies) {
    StrategyCurves c;
    c.strategy = s;
    for (std::size_t run = 0; run < runs; ++run) {
      if (complete(s, run)) {
        ++c.complete_runs;
      } else {
        report.incomplete.push_back({run, s, "missing batches"});
      }
    }
    for (std::size_t b = 0; b < points; ++b) {
      std::vector<double> err, filt, cov;
      for (std::size_t run = 0; run < runs; ++run) {
        if (const auto* cell = complete(s, run)) {
          err.push_back((*cell)[b]->error);
          filt.push_back((*cell)[b]->filtered_error);
          cov.push_back((*cell)[b]->coverage);
        }
      }
      double m = 0, sd = 0;
      mean_std(err, m, sd);
      c.mean_error.push_back(m);
      c.std_error.push_back(sd);
      mean_std(filt, m, sd);
      c.mean_filtered.push_back(m);
      c.std_filtered.push_back(sd);
      mean_std(cov, m, sd);
      c.mean_coverage.push_back(m);
    }
    report.strategies.push_back(std::move(c));
  }

  for (const auto& s : strategies) {
    if (s == report.reference) continue;
    WinRateCurve w;
    w.competitor = s;
    for (std::size_t b = 0; b < points; ++b) {
      std::size_t paired = 0, wins = 0;
      for (std::size_t run = 0; run < runs; ++run) {
        const auto* ref = complete(report.reference, run);
        const auto* comp = complete(s, run);
        if (!ref || !comp) continue;
        ++paired;
        wins += (*ref)[b]->error <= (*comp)[b]->error;
      }
      w.runs.push_back(paired);
      w.rate.push_back(paired ? static_cast<double>(wins) / static_cast<double>(paired) : std::nan(""));
    }
    report.win_rates.push_back(std::move(w));
  }
  return report;
}

void write_report_files(const ComparisonReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "aggregate.csv", std::ios::binary);
    out << "strategy,batch,training_size,complete_runs,mean_error,std_error,mean_filtered_error,"
           "std_filtered_error,mean_coverage\n";
    for (const auto& s : report.strategies) {
      for (std::size_t b = 0; b < s.mean_error.size(); ++b) {
        out << s.strategy << ',' << b << ',' << report.training_sizes[b] << ',' << s.complete_runs << ','
            << text::fmt(s.mean_error[b]) << ',' << text::fmt(s.std_error[b]) << ','
            << text::fmt(s.mean_filtered[b]) << ',' << text::fmt(s.std_filtered[b]) << ','
            << text::fmt(s.mean_coverage[b]) << '\n';
      }
    }
    if (!out) throw Error("cannot write " + (dir / "aggregate.csv").string());
  }
  {
    std::ofstream out(dir / "winrate.csv", std::ios::binary);
    out << "reference,competitor,batch,training_size,paired_runs,win_rate\n";
    for (const auto& w : report.win_rates) {
      for (std::size_t b = 0; b < w.rate.size(); ++b) {
        out << report.reference << ',' << w.competitor << ',' << b << ',' << report.training_sizes[b] << ','
            << w.runs[b] << ',' << text::fmt(w.rate[b]) << '\n';
      }
    }
    if (!out) throw Error("cannot write " + (dir / "winrate.csv").string());
  }
  render_plots(report, dir);
}

// ---------------------------------------------------------------------------

namespace {

struct Cell {
  std::size_t run = 0;
  Strategy strategy = Strategy::entropy;
  bool ok = false;
  std::string message;
  RunResult result;
};

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned jobs) {
  config.validate();
  const SystemSpec spec = make_system(config.benchmark);
  const Formula formula = resolve_formula(config, spec);
  const ParamGrid grid = resolve_grid(config, spec);
  const SimConfig sim = resolve_sim_config(config);
  config.loop.validate(grid.size());

  const std::filesystem::path out_dir = std::filesystem::path(config.output_dir) / config.name;
  const std::string cache_dir =
      config.cache_dir.empty() ? (std::filesystem::path(config.output_dir) / "cache").string() : config.cache_dir;
  const GroundTruth truth = ground_truth_sweep(spec, formula, grid, sim, cache_dir, jobs);

  const std::size_t strategy_count = config.strategies.size();
  std::vector<Cell> cells(config.runs * strategy_count);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i].run = i / strategy_count;
    cells[i].strategy = config.strategies[i % strategy_count];
  }

  const MeasureFn lookup = [&](std::size_t i) { return truth.robustness.at(i); };
  const MeasureFn live = [&](std::size_t i) { return measure(spec, formula, grid.point(i), sim).value; };
  detail::parallel_for(cells.size(), jobs, [&](std::size_t i) {
    Cell& cell = cells[i];
    try {
      cell.result = run_closed_loop(grid, config.live_measurements ? live : lookup, truth.mask,
                                    loop_for(config, cell.run, cell.strategy));
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.message = e.what();
    }
  });

  ExperimentResult out;
  out.config = config;
  out.truth_satisfied = truth.satisfied_count();
  out.grid_size = grid.size();
  for (const auto& cell : cells) {
    if (!cell.ok) continue;
    for (const auto& b : cell.result.batches) {
      RunRow r;
      r.run = cell.run;
      r.strategy = std::string(strategy_name(cell.strategy));
      r.batch_method = std::string(batch_method_name(config.batch_method_for(cell.strategy)));
      r.batch = b.batch;
      r.training_size = b.training_size;
      r.simulations = b.simulations;
      r.error = b.error;
      r.filtered_error = b.filtered_error;
      r.coverage = b.coverage;
      r.signal_variance = b.params.signal_variance;
      r.lengthscales.assign(b.params.lengthscales.data(), b.params.lengthscales.data() + b.params.lengthscales.size());
      r.seconds = config.timing ? b.seconds : 0.0;
      out.rows.push_back(std::move(r));
    }
  }

  std::vector<std::string> names;
  for (auto s : config.strategies) names.emplace_back(strategy_name(s));
  out.report = aggregate_rows(out.rows, names, config.loop.batch_count, config.runs);
  out.report.title = config.name + " (" + spec.name + ")";
  for (auto& inc : out.report.incomplete) {
    for (const auto& cell : cells) {
      if (cell.run == inc.run && strategy_name(cell.strategy) == inc.strategy && !cell.message.empty())
        inc.message = cell.message;
    }
  }

  std::filesystem::create_directories(out_dir);
  {
    std::ofstream csv(out_dir / "runs.csv", std::ios::binary);
    write_runs_csv(csv, out.rows);
    if (!csv) throw Error("cannot write " + (out_dir / "runs.csv").string());
  }
  write_report_files(out.report, out_dir);

  nlohmann::ordered_json j;
  j["name"] = config.name;
  j["benchmark"] = spec.name;
  j["formula"] = formula.to_string();
  j["grid"] = grid.counts();
  j["grid_size"] = grid.size();
  j["truth_satisfied"] = out.truth_satisfied;
  j["runs"] = config.runs;
  j["seed"] = config.seed;
  j["initial_count"] = config.loop.initial_count;
  j["batch_size"] = config.loop.batch_size;
  j["batch_count"] = config.loop.batch_count;
  j["budget"] = config.loop.total_budget();
  j["hyperparameter_mode"] = std::string(hyper_mode_name(config.loop.hyper_mode));
  j["dt"] = sim.dt;
  j["t_final"] = sim.t_final;
  j["reference"] = out.report.reference;
  auto& strategies = j["strategies"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < out.report.strategies.size(); ++k) {
    const auto& s = out.report.strategies[k];
    strategies.push_back({{"name", s.strategy},
                          {"batch_method", std::string(batch_method_name(config.batch_method_for(config.strategies[k])))},
                          {"complete_runs", s.complete_runs},
                          {"final_mean_error", finite_or_null(s.mean_error.back())},
                          {"final_std_error", finite_or_null(s.std_error.back())},
                          {"final_mean_filtered_error", finite_or_null(s.mean_filtered.back())},
                          {"final_mean_coverage", finite_or_null(s.mean_coverage.back())}});
  }
  auto& wins = j["win_rates"] = nlohmann::ordered_json::array();
  for (const auto& w : out.report.win_rates)
    wins.push_back({{"competitor", w.competitor}, {"final", finite_or_null(w.rate.back())}});
  auto& inc = j["incomplete"] = nlohmann::ordered_json::array();
  for (const auto& i : out.report.incomplete)
    inc.push_back({{"run", i.run}, {"strategy", i.strategy}, {"message", i.message}});
  j["complete"] = out.report.complete();
  std::ofstream js(out_dir / "summary.json", std::ios::binary);
  js << j.dump(2) << '\n';
  if (!js) throw Error("cannot write " + (out_dir / "summary.json").string());
  return out;
}

}  // namespace clsv
