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


#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "clsv/stl.hpp"

namespace clsv {

bool in_time_window(double t, double lo, double hi) noexcept {
  const double tol_lo = kTimeTolerance * std::max(1.0, std::abs(lo));
  const double tol_hi = kTimeTolerance * std::max(1.0, std::abs(hi));
  return t >= lo - tol_lo && t <= hi + tol_hi;
}

Trace::Trace(std::vector<double> times, std::vector<std::string> names,
             std::vector<std::vector<double>> channels)
    : times_(std::move(times)), names_(std::move(names)), channels_(std::move(channels)) {
  if (times_.empty()) throw Error("trace: no samples");
  if (times_.front() != 0.0) throw Error("trace: first sample time must be 0");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) throw Error("trace: times must be strictly increasing");
  }
  if (names_.size() != channels_.size()) throw Error("trace: channel name/data count mismatch");
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    if (channels_[c].size() != times_.size())
      throw Error("trace: channel '" + names_[c] + "' length differs from time vector");
    for (std::size_t k = 0; k < c; ++k) {
      if (names_[k] == names_[c]) throw Error("trace: duplicate channel '" + names_[c] + "'");
    }
  }
}

bool Trace::has_channel(std::string_view name) const noexcept {
  for (const auto& n : names_) {
    if (n == name) return true;
  }
  return false;
}

const std::vector<double>& Trace::channel(std::string_view name) const {
  for (std::size_t c = 0; c < names_.size(); ++c) {
    if (names_[c] == name) return channels_[c];
  }
  throw Error("trace: missing channel '" + std::string(name) + "'");
}

namespace {

void put_double(std::ostream& out, double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, r.ptr - buf);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  return cells;
}

}  // namespace

void Trace::write_csv(std::ostream& out) const {
  out << "time";
  for (const auto& n : names_) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < times_.size(); ++i) {
    put_double(out, times_[i]);
    for (const auto& ch : channels_) {
      out << ',';
      put_double(out, ch[i]);
    }
    out << '\n';
  }
}

Trace Trace::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("trace csv: missing header");
  const auto header = split_csv_line(line);
  if (header.empty() || header.front() != "time")
    throw Error("trace csv: header must start with 'time'");
  std::vector<std::string> names(header.begin() + 1, header.end());
  std::vector<double> times;
  std::vector<std::vector<double>> channels(names.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw Error("trace csv: row " + std::to_string(row) + " has wrong column count");
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      const auto r = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
      if (r.ec != std::errc() || r.ptr != cells[c].data() + cells[c].size())
        throw Error("trace csv: bad number '" + cells[c] + "' on row " + std::to_string(row));
      if (c == 0) {
        times.push_back(v);
      } else {
        channels[c - 1].push_back(v);
      }
    }
  }
  return Trace(std::move(times), std::move(names), std::move(channels));
}

}  // namespace clsv
