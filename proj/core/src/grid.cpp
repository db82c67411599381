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


#include "clsv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "clsv/error.hpp"

namespace clsv {

bool Box::contains(const ParamPoint& p, double tol) const {
  if (static_cast<std::size_t>(p.size()) != dim()) return false;
  for (std::size_t d = 0; d < dim(); ++d) {
    const double slack = tol * std::max(1.0, upper[d] - lower[d]);
    if (p[d] < lower[d] - slack || p[d] > upper[d] + slack) return false;
  }
  return true;
}

void Box::validate() const {
  if (lower.empty() || lower.size() != upper.size())
    throw DimensionError("box: lower/upper must be non-empty and equal length");
  for (std::size_t d = 0; d < dim(); ++d) {
    if (!std::isfinite(lower[d]) || !std::isfinite(upper[d]) || !(lower[d] < upper[d]))
      throw Error("box: dimension " + std::to_string(d) + " needs finite lower < upper");
  }
}

ParamGrid::ParamGrid(Box box, std::vector<std::size_t> counts)
    : box_(std::move(box)), counts_(std::move(counts)) {
  box_.validate();
  if (counts_.size() != box_.dim())
    throw DimensionError("grid: one count per box dimension required");
  size_ = 1;
  for (std::size_t c : counts_) {
    if (c < 2) throw Error("grid: at least two locations per dimension required");
    size_ *= c;
  }
}

ParamPoint ParamGrid::normalized(std::size_t index) const {
  ParamPoint u(static_cast<Eigen::Index>(dim()));
  for (std::size_t d = dim(); d-- > 0;) {
    const std::size_t k = index % counts_[d];
    index /= counts_[d];
    u[static_cast<Eigen::Index>(d)] =
        static_cast<double>(k) / static_cast<double>(counts_[d] - 1);
  }
  return u;
}

ParamPoint ParamGrid::point(std::size_t index) const {
  if (index >= size_) throw Error("grid: index out of range");
  ParamPoint p(static_cast<Eigen::Index>(dim()));
  for (std::size_t d = dim(); d-- > 0;) {
    const std::size_t k = index % counts_[d];
    index /= counts_[d];
    const double h = span(d) / static_cast<double>(counts_[d] - 1);
    // Pin the last node to the upper bound exactly.
    p[static_cast<Eigen::Index>(d)] =
        k + 1 == counts_[d] ? box_.upper[d] : box_.lower[d] + h * static_cast<double>(k);
  }
  return p;
}

std::size_t ParamGrid::snap(const ParamPoint& p) const {
  if (static_cast<std::size_t>(p.size()) != dim())
    throw DimensionError("grid: snap dimension mismatch");
  std::size_t index = 0;
  for (std::size_t d = 0; d < dim(); ++d) {
    const double t = (p[static_cast<Eigen::Index>(d)] - box_.lower[d]) / span(d);
    const double scaled = std::clamp(t, 0.0, 1.0) * static_cast<double>(counts_[d] - 1);
    index = index * counts_[d] + static_cast<std::size_t>(std::lround(scaled));
  }
  return index;
}

Eigen::MatrixXd ParamGrid::points() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(size_));
  for (std::size_t i = 0; i < size_; ++i) out.col(static_cast<Eigen::Index>(i)) = point(i);
  return out;
}

}  // namespace clsv
