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


#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "clsv/experiment.hpp"
#include "clsv/systems.hpp"
#include "text.hpp"

namespace clsv {

void ExperimentConfig::validate() const {
  if (strategies.empty()) throw Error("config: strategy list is empty");
  if (runs < 1) throw Error("config: runs must be at least 1");
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (strategies[i] == strategies[j]) throw Error("config: strategy listed twice");
    }
  }
  make_system(benchmark);  // throws for unknown names
  if (dt < 0.0 || t_final < 0.0) throw Error("config: dt and t_final must be non-negative");
}

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    const auto piece = text::trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!piece.empty()) out.emplace_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& v) {
  double d = 0.0;
  if (!text::parse(v, d)) throw Error("expected a number, got '" + v + "'");
  return d;
}

std::uint64_t to_u64(const std::string& v) {
  std::size_t used = 0;
  std::uint64_t out = 0;
  try {
    out = std::stoull(v, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty() || v.front() == '-') throw Error("expected a non-negative integer, got '" + v + "'");
  return out;
}

std::size_t to_size(const std::string& v) { return static_cast<std::size_t>(to_u64(v)); }

bool to_bool(const std::string& v) {
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw Error("expected a boolean, got '" + v + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"benchmark", [](auto& c, const auto& v) { c.benchmark = v; }},
      {"formula", [](auto& c, const auto& v) { c.formula = v; }},
      {"grid",
       [](auto& c, const auto& v) {
         c.grid.clear();
         for (const auto& n : split(v, v.find('x') != std::string::npos ? 'x' : ',')) c.grid.push_back(to_size(n));
       }},
      {"initial_count", [](auto& c, const auto& v) { c.loop.initial_count = to_size(v); }},
      {"batch_size", [](auto& c, const auto& v) { c.loop.batch_size = to_size(v); }},
      {"batch_count", [](auto& c, const auto& v) { c.loop.batch_count = to_size(v); }},
      {"strategies",
       [](auto& c, const auto& v) {
         c.strategies.clear();
         for (const auto& s : split(v, ',')) c.strategies.push_back(parse_strategy(s));
       }},
      {"batch_method", [](auto& c, const auto& v) { c.entropy_batch_method = parse_batch_method(v); }},
      {"competitor_batch_method", [](auto& c, const auto& v) { c.competitor_batch_method = parse_batch_method(v); }},
      {"hyperparameter_mode", [](auto& c, const auto& v) { c.loop.hyper_mode = parse_hyper_mode(v); }},
      {"runs", [](auto& c, const auto& v) { c.runs = to_size(v); }},
      {"seed", [](auto& c, const auto& v) { c.seed = to_u64(v); }},
      {"m_t", [](auto& c, const auto& v) { c.loop.candidate_count = to_size(v); }},
      {"dpp_bandwidth", [](auto& c, const auto& v) { c.loop.dpp_bandwidth = to_double(v); }},
      {"initial_lengthscale", [](auto& c, const auto& v) { c.loop.initial_lengthscale = to_double(v); }},
      {"restarts", [](auto& c, const auto& v) { c.loop.restarts = static_cast<int>(to_size(v)); }},
      {"max_iterations", [](auto& c, const auto& v) { c.loop.max_iterations = static_cast<int>(to_size(v)); }},
      {"confidence_threshold", [](auto& c, const auto& v) { c.loop.confidence_threshold = to_double(v); }},
      {"dt", [](auto& c, const auto& v) { c.dt = to_double(v); }},
      {"t_final", [](auto& c, const auto& v) { c.t_final = to_double(v); }},
      {"output", [](auto& c, const auto& v) { c.output_dir = v; }},
      {"cache_dir", [](auto& c, const auto& v) { c.cache_dir = v; }},
      {"timing", [](auto& c, const auto& v) { c.timing = to_bool(v); }},
      {"live_measurements", [](auto& c, const auto& v) { c.live_measurements = to_bool(v); }},
  };
  return table;
}

}  // namespace

std::vector<ExperimentConfig> parse_config(std::string_view input) {
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
    std::vector<std::size_t> lines;
  };
  Section defaults;
  std::vector<Section> sections;
  Section* current = &defaults;

  std::istringstream in{std::string(input)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = text::trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error("config line " + std::to_string(line_no) + ": unterminated section header");
      const auto name = text::trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw Error("config line " + std::to_string(line_no) + ": empty section name");
      for (const auto& s : sections) {
        if (s.name == name) throw Error("config line " + std::to_string(line_no) + ": duplicate section '" + std::string(name) + "'");
      }
      sections.push_back({std::string(name), {}, {}});
      current = &sections.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(text::trim(line.substr(0, eq)));
    const std::string value(text::trim(line.substr(eq + 1)));
    if (!setters().count(key)) throw Error("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    current->entries.emplace_back(key, value);
    current->lines.push_back(line_no);
  }

  auto apply = [](ExperimentConfig& c, const Section& s) {
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
      try {
        setters().at(s.entries[i].first)(c, s.entries[i].second);
      } catch (const Error& e) {
        throw Error("config line " + std::to_string(s.lines[i]) + " (" + s.entries[i].first + "): " + e.what());
      }
    }
  };

  std::vector<ExperimentConfig> out;
  if (sections.empty()) {
    ExperimentConfig c;
    apply(c, defaults);
    c.validate();
    out.push_back(std::move(c));
    return out;
  }
  for (const auto& s : sections) {
    ExperimentConfig c;
    apply(c, defaults);
    apply(c, s);
    c.name = s.name;
    c.validate();
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ExperimentConfig> load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace clsv
