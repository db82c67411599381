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


#include "clsv/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace clsv {

namespace {

constexpr double kWidth = 820.0, kHeight = 420.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v, const char* f = "%.3f") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    } else if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

}  // namespace

std::string render_svg(const PlotSpec& plot) {
  Range xr, yr;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      xr.add(s.x[i]);
      yr.add(s.y[i]);
      if (i < s.lower.size()) yr.add(s.lower[i]);
      if (i < s.upper.size()) yr.add(s.upper[i]);
    }
  }
  xr.finish();
  yr.finish();
  auto px = [&](double x) { return kPlotLeft + (x - xr.lo) / (xr.hi - xr.lo) * kPlotWidth; };
  auto py = [&](double y) { return kPlotTop + (yr.hi - y) / (yr.hi - yr.lo) * kPlotHeight; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth, "%.0f") << "\" height=\""
    << num(kHeight, "%.0f") << "\" viewBox=\"0 0 " << num(kWidth, "%.0f") << ' ' << num(kHeight, "%.0f")
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << num(kWidth, "%.0f") << "\" height=\"" << num(kHeight, "%.0f")
    << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(kPlotLeft + kPlotWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(plot.title) << "</text>\n";
  o << "<g class=\"plot\" data-x-min=\"" << num(xr.lo, "%.17g") << "\" data-x-max=\"" << num(xr.hi, "%.17g")
    << "\" data-y-min=\"" << num(yr.lo, "%.17g") << "\" data-y-max=\"" << num(yr.hi, "%.17g") << "\" data-left=\""
    << num(kPlotLeft) << "\" data-top=\"" << num(kPlotTop) << "\" data-width=\"" << num(kPlotWidth)
    << "\" data-height=\"" << num(kPlotHeight) << "\">\n";

  // Axes and ticks.
  o << "<rect class=\"frame\" x=\"" << num(kPlotLeft) << "\" y=\"" << num(kPlotTop) << "\" width=\""
    << num(kPlotWidth) << "\" height=\"" << num(kPlotHeight) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double fx = xr.lo + (xr.hi - xr.lo) * t / 5.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * t / 5.0;
    o << "<line x1=\"" << num(px(fx)) << "\" y1=\"" << num(kPlotTop + kPlotHeight) << "\" x2=\"" << num(px(fx))
      << "\" y2=\"" << num(kPlotTop + kPlotHeight + 5) << "\" stroke=\"#333\"/>\n";
    o << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(kPlotTop + kPlotHeight + 18)
      << "\" text-anchor=\"middle\">" << num(fx, "%.4g") << "</text>\n";
    o << "<line x1=\"" << num(kPlotLeft - 5) << "\" y1=\"" << num(py(fy)) << "\" x2=\"" << num(kPlotLeft)
      << "\" y2=\"" << num(py(fy)) << "\" stroke=\"#333\"/>\n";
    o << "<text x=\"" << num(kPlotLeft - 8) << "\" y=\"" << num(py(fy) + 4) << "\" text-anchor=\"end\">"
      << num(fy, "%.4g") << "</text>\n";
  }
  o << "<text x=\"" << num(kPlotLeft + kPlotWidth / 2) << "\" y=\"" << num(kHeight - 8)
    << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << num(kPlotTop + kPlotHeight / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << num(kPlotTop + kPlotHeight / 2) << ")\">" << escape(plot.y_label) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.lower.size() == n && s.upper.size() == n && n > 0) {
      std::string pts;
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.upper[i]) || !std::isfinite(s.x[i])) continue;
        pts += num(px(s.x[i])) + "," + num(py(s.upper[i])) + " ";
      }
      for (std::size_t i = n; i-- > 0;) {
        if (!std::isfinite(s.lower[i]) || !std::isfinite(s.x[i])) continue;
        pts += num(px(s.x[i])) + "," + num(py(s.lower[i])) + " ";
      }
      if (!pts.empty()) pts.pop_back();
      o << "<polygon class=\"band\" data-series=\"" << escape(s.name) << "\" points=\"" << pts << "\" fill=\""
        << color << "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
    }
    std::string pts;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.y[i]) || !std::isfinite(s.x[i])) continue;
      pts += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
    }
    if (!pts.empty()) pts.pop_back();
    o << "<polyline class=\"curve\" data-series=\"" << escape(s.name) << "\" points=\"" << pts
      << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
  }
  o << "</g>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const double y = kPlotTop + 12 + 18.0 * static_cast<double>(k);
    const double x = kPlotLeft + kPlotWidth + 15;
    o << "<line x1=\"" << num(x) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x + 20) << "\" y2=\"" << num(y)
      << "\" stroke=\"" << kPalette[k % std::size(kPalette)] << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << num(x + 26) << "\" y=\"" << num(y + 4) << "\">" << escape(plot.series[k].name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<std::filesystem::path> render_plots(const ComparisonReport& report, const std::filesystem::path& dir) {
  std::vector<double> x(report.training_sizes.begin(), report.training_sizes.end());
  auto banded = [&](const std::string& name, const std::vector<double>& mean, const std::vector<double>& sd) {
    PlotSeries s{name, x, mean, {}, {}};
    for (std::size_t i = 0; i < mean.size(); ++i) {
      s.lower.push_back(mean[i] - 0.5 * sd[i]);
      s.upper.push_back(mean[i] + 0.5 * sd[i]);
    }
    return s;
  };

  PlotSpec error{report.title + ": misclassification error (mean +/- 0.5 sd)", "training set size", "error", {}};
  PlotSpec filtered{report.title + ": error at >= 95% confidence (mean +/- 0.5 sd)", "training set size",
                    "filtered error", {}};
  PlotSpec wins{report.title + ": runs where " + report.reference + " matches or beats", "training set size",
                "fraction of runs", {}};
  for (const auto& s : report.strategies) {
    error.series.push_back(banded(s.strategy, s.mean_error, s.std_error));
    filtered.series.push_back(banded(s.strategy, s.mean_filtered, s.std_filtered));
  }
  for (const auto& w : report.win_rates) wins.series.push_back({w.competitor, x, w.rate, {}, {}});

  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& [name, plot] : {std::pair{"error.svg", &error}, std::pair{"filtered.svg", &filtered},
                                   std::pair{"winrate.svg", &wins}}) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    out << render_svg(*plot);
    if (!out) throw Error("cannot write " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace clsv
