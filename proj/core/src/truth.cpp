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


#include "clsv/truth.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "clsv/rng.hpp"
#include "parallel.hpp"
#include "text.hpp"

namespace clsv {

namespace {
// Bumped whenever the benchmark dynamics change.
constexpr int kModelRevision = 4;
}  // namespace

std::size_t GroundTruth::satisfied_count() const {
  std::size_t n = 0;
  for (bool b : mask) n += b;
  return n;
}

std::string truth_cache_key(const SystemSpec& spec, const Formula& formula, const ParamGrid& grid,
                            const SimConfig& config) {
  std::ostringstream key;
  key << "benchmark=" << spec.name << ";formula=" << formula.to_string() << ";grid=";
  for (std::size_t d = 0; d < grid.dim(); ++d) {
    if (d) key << 'x';
    key << grid.counts()[d] << '[' << text::fmt(grid.box().lower[d]) << ',' << text::fmt(grid.box().upper[d]) << ']';
  }
  key << ";dt=" << text::fmt(config.dt) << ";t_final=" << text::fmt(config.t_final);
  // Dynamics revision and constants: a cached sweep is only valid for the
  // exact model that produced it.
  key << ";model=" << kModelRevision << ";constants=";
  if (spec.name.rfind("mrac", 0) == 0) {
    const MracConstants& m = config.mrac;
    for (double v : {m.natural_frequency, m.damping, m.adaptation_gain, m.concurrent_gain,
                     static_cast<double>(m.history_capacity), m.history_min_separation, m.history_interval})
      key << text::fmt(v) << ',';
    for (const auto& [t, r] : m.reference_steps) key << text::fmt(t) << ':' << text::fmt(r) << ',';
  } else {
    const AutopilotConstants& a = config.autopilot;
    for (double v : {a.airspeed, a.gravity, a.reference_heading, a.trim_alpha, a.nominal_iyy, a.y_beta, a.l_beta,
                     a.l_p, a.l_r, a.l_aileron, a.n_beta, a.n_p, a.n_r, a.n_rudder, a.lift_slope, a.m_alpha, a.m_q,
                     a.m_elevator, a.heading_gain, a.bank_limit, a.roll_gain, a.roll_rate_gain, a.yaw_damper_gain,
                     a.altitude_gain, a.climb_rate_gain, a.pitch_command_limit, a.pitch_gain, a.pitch_rate_gain,
                     a.aileron_limit, a.rudder_limit, a.elevator_limit})
      key << text::fmt(v) << ',';
  }
  return key.str();
}

namespace {

std::filesystem::path cache_path(const std::string& dir, const std::string& key) {
  char name[64];
  std::snprintf(name, sizeof(name), "truth-%016llx.csv", static_cast<unsigned long long>(hash_label(key)));
  return std::filesystem::path(dir) / name;
}

bool load_cache(const std::filesystem::path& path, const std::string& key, std::size_t n, GroundTruth& out) {
  std::ifstream in(path);
  if (!in) return false;
  std::string line;
  if (!std::getline(in, line) || line != "# " + key) return false;
  if (!std::getline(in, line) || line != "index,robustness") return false;
  GroundTruth t;
  t.robustness.reserve(n);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    double v = 0.0;
    if (comma == std::string::npos || !text::parse(std::string_view(line).substr(comma + 1), v)) return false;
    if (std::stoull(line.substr(0, comma)) != t.robustness.size()) return false;
    t.robustness.push_back(v);
  }
  if (t.robustness.size() != n) return false;
  for (double v : t.robustness) t.mask.push_back(v > 0.0);
  out = std::move(t);
  return true;
}

void store_cache(const std::filesystem::path& path, const std::string& key, const GroundTruth& t) {
  std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("truth cache: cannot write " + tmp);
    out << "# " << key << "\nindex,robustness\n";
    for (std::size_t i = 0; i < t.robustness.size(); ++i) out << i << ',' << text::fmt(t.robustness[i]) << '\n';
    if (!out) throw Error("truth cache: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

GroundTruth ground_truth_sweep(const SystemSpec& spec, const Formula& formula, const ParamGrid& grid,
                               const SimConfig& config, const std::string& cache_dir, unsigned threads) {
  const std::string key = truth_cache_key(spec, formula, grid, config);
  GroundTruth out;
  if (!cache_dir.empty() && load_cache(cache_path(cache_dir, key), key, grid.size(), out)) return out;

  out.robustness.assign(grid.size(), 0.0);
  detail::parallel_for(grid.size(), threads, [&](std::size_t i) {
    out.robustness[i] = measure(spec, formula, grid.point(i), config).value;
  });
  out.mask.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out.mask[i] = out.robustness[i] > 0.0;
  if (!cache_dir.empty()) store_cache(cache_path(cache_dir, key), key, out);
  return out;
}

}  // namespace clsv
