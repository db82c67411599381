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

#include <Eigen/Core>
#include <cstddef>
#include <vector>

namespace clsv {

/// A point in the uncertainty space, one coordinate per uncertain parameter.
using ParamPoint = Eigen::VectorXd;

/// Axis-aligned parameter box, lower < upper in every dimension.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const noexcept { return lower.size(); }
  bool contains(const ParamPoint& p, double tol = 1e-12) const;
  void validate() const;
};

/// Regular discretization of a Box. Locations are indexed row-major with the
/// last dimension varying fastest.
class ParamGrid {
 public:
  ParamGrid() = default;
  ParamGrid(Box box, std::vector<std::size_t> counts);

  const Box& box() const noexcept { return box_; }
  const std::vector<std::size_t>& counts() const noexcept { return counts_; }
  std::size_t dim() const noexcept { return counts_.size(); }
  std::size_t size() const noexcept { return size_; }

  ParamPoint point(std::size_t index) const;
  /// Coordinates rescaled so the box maps onto [0,1]^p.
  ParamPoint normalized(std::size_t index) const;
  double span(std::size_t d) const { return box_.upper[d] - box_.lower[d]; }

  /// Index of the grid location nearest to p (coordinates clamped to the box).
  std::size_t snap(const ParamPoint& p) const;

  /// All locations as a dim x size matrix (column i is point(i)).
  Eigen::MatrixXd points() const;

 private:
  Box box_;
  std::vector<std::size_t> counts_;
  std::size_t size_ = 0;
};

}  // namespace clsv
