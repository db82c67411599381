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

// Bounded signal temporal logic over discretely sampled traces.
//
// Concrete syntax (whitespace-insensitive):
//
//   formula   := disj
//   disj      := conj  ('or'  conj)*
//   conj      := unary ('and' unary)*
//   unary     := 'not' unary
//              | 'G' '[' t1 ',' t2 ']' unary        always
//              | 'F' '[' t1 ',' t2 ']' unary        eventually
//              | '(' formula ')'
//              | expr ('>=' | '<=') expr           predicate
//
// `expr` is arithmetic over numbers, one channel name, '+', '-', '*', '/'
// (by constants) and abs(). A predicate must reduce to either
//   gain * s + offset >= 0
// or
//   offset - scale * |inner_gain * s + inner_offset| >= 0,   scale > 0.
//
// Quantitative semantics are evaluated over the trace samples: a predicate
// yields its left-hand side, 'not' negates, 'and'/'or' take min/max, and
// G/F take min/max over the samples whose time falls in [t + t1, t + t2]
// (closed, with a 1e-9 relative tolerance on the endpoints).

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clsv/error.hpp"

namespace clsv {

inline constexpr double kTimeTolerance = 1e-9;

/// True when `t` lies in the closed window [lo, hi] up to the time tolerance.
bool in_time_window(double t, double lo, double hi) noexcept;

/// Discrete-time trajectory: strictly increasing sample times starting at 0
/// and named channels of equal length.
class Trace {
 public:
  Trace() = default;
  Trace(std::vector<double> times, std::vector<std::string> names,
        std::vector<std::vector<double>> channels);

  std::size_t size() const noexcept { return times_.size(); }
  const std::vector<double>& times() const noexcept { return times_; }
  double final_time() const { return times_.back(); }

  const std::vector<std::string>& channel_names() const noexcept { return names_; }
  bool has_channel(std::string_view name) const noexcept;
  /// Throws Error for unknown channels.
  const std::vector<double>& channel(std::string_view name) const;

  /// CSV with header `time,<ch1>,<ch2>,...`, one row per sample.
  void write_csv(std::ostream& out) const;
  static Trace read_csv(std::istream& in);

  friend bool operator==(const Trace&, const Trace&) = default;

 private:
  std::vector<double> times_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> channels_;
};

struct TimeInterval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

struct Predicate {
  std::string channel;
  double gain = 0.0;
  double offset = 0.0;
  // Absolute-value form when abs_scale > 0 (gain is then 0).
  double abs_scale = 0.0;
  double abs_gain = 0.0;
  double abs_offset = 0.0;

  bool is_abs() const noexcept { return abs_scale > 0.0; }
  double evaluate(double sample) const noexcept;
  friend bool operator==(const Predicate&, const Predicate&) = default;
};

struct FormulaNode;
using FormulaPtr = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  enum class Kind { predicate, conjunction, disjunction, negation, always, eventually };

  Kind kind = Kind::predicate;
  Predicate predicate;
  TimeInterval interval;
  std::vector<FormulaPtr> children;
};

/// Immutable STL formula. Equality is structural.
class Formula {
 public:
  Formula() = default;
  explicit Formula(FormulaPtr root);

  static Formula atom(Predicate p);
  static Formula conj(std::vector<Formula> parts);
  static Formula disj(std::vector<Formula> parts);
  static Formula negate(const Formula& f);
  static Formula always(TimeInterval interval, const Formula& f);
  static Formula eventually(TimeInterval interval, const Formula& f);

  const FormulaNode& root() const;
  const FormulaPtr& ptr() const noexcept { return root_; }
  bool valid() const noexcept { return root_ != nullptr; }
  std::vector<std::string> channels() const;
  std::string to_string() const;

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  FormulaPtr root_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

Formula parse_formula(std::string_view text);

struct RobustnessMeasurement {
  double value = 0.0;
  bool satisfied = false;  // value > 0; zero counts as failure
};

/// Robustness at time zero. Throws for missing channels and for temporal
/// windows that are empty or run past the end of the trace.
RobustnessMeasurement robustness(const Formula& formula, const Trace& trace);

/// Robustness at every sample time; NaN where a temporal window is undefined.
std::vector<double> robustness_signal(const Formula& formula, const Trace& trace);

/// Qualitative (true/false) semantics at time zero, evaluated independently
/// of the robustness recursion with direct comparisons.
bool boolean_semantics(const Formula& formula, const Trace& trace);

/// min over the values; throws on an empty list.
double conjunction_robustness(std::span<const double> values);

}  // namespace clsv
