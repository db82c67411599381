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

// Static line plots. Output is a pure function of the input: coordinates are
// printed with a fixed number of decimals and nothing depends on time or
// locale. The plot area carries its data ranges as data-* attributes so the
// curves can be mapped back to data coordinates.

#include <filesystem>
#include <string>
#include <vector>

#include "clsv/experiment.hpp"

namespace clsv {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  /// Optional band; empty or same length as y.
  std::vector<double> lower;
  std::vector<double> upper;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

inline constexpr double kPlotLeft = 70.0, kPlotTop = 40.0, kPlotWidth = 560.0, kPlotHeight = 320.0;

std::string render_svg(const PlotSpec& plot);

/// error.svg and filtered.svg (mean +/- 0.5 sigma) and winrate.svg.
/// Returns the written paths.
std::vector<std::filesystem::path> render_plots(const ComparisonReport& report,
                                                const std::filesystem::path& dir);

}  // namespace clsv
