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


#include "clsv/stl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>

namespace clsv {

double Predicate::evaluate(double s) const noexcept {
  if (!is_abs()) return gain * s + offset;
  // c - k|a s + b| == min(c - k(a s + b), c + k(a s + b))
  const double inner = abs_gain * s + abs_offset;
  return std::min(offset - abs_scale * inner, offset + abs_scale * inner);
}

// ---------------------------------------------------------------------------
// Formula construction and printing

Formula::Formula(FormulaPtr root) : root_(std::move(root)) {}

const FormulaNode& Formula::root() const {
  if (!root_) throw Error("formula: empty");
  return *root_;
}

namespace {

FormulaPtr make_node(FormulaNode node) { return std::make_shared<const FormulaNode>(std::move(node)); }

FormulaPtr root_ptr(const Formula& f) {
  if (!f.valid()) throw Error("formula: empty operand");
  return f.ptr();
}

void check_interval(TimeInterval iv) {
  if (!(iv.lo >= 0.0) || !(iv.hi >= iv.lo) || !std::isfinite(iv.hi))
    throw Error("formula: temporal interval needs 0 <= t1 <= t2");
}

bool nodes_equal(const FormulaNode& a, const FormulaNode& b) {
  if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
  switch (a.kind) {
    case FormulaNode::Kind::predicate:
      return a.predicate == b.predicate;
    case FormulaNode::Kind::always:
    case FormulaNode::Kind::eventually:
      if (!(a.interval == b.interval)) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!nodes_equal(*a.children[i], *b.children[i])) return false;
  }
  return true;
}

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

// "gain*ch + offset" with unit gains and zero offsets elided.
std::string affine_text(double gain, const std::string& ch, double offset) {
  std::string s;
  if (gain == 1.0) {
    s = ch;
  } else if (gain == -1.0) {
    s = "-" + ch;
  } else {
    s = num(gain) + "*" + ch;
  }
  if (offset > 0.0) {
    s += " + " + num(offset);
  } else if (offset < 0.0) {
    s += " - " + num(-offset);
  }
  return s;
}

void print_node(const FormulaNode& n, std::string& out) {
  using K = FormulaNode::Kind;
  auto child = [&](const FormulaNode& c) {
    out += '(';
    print_node(c, out);
    out += ')';
  };
  switch (n.kind) {
    case K::predicate: {
      const Predicate& p = n.predicate;
      if (p.is_abs()) {
        out += num(p.offset) + " - ";
        if (p.abs_scale != 1.0) out += num(p.abs_scale) + "*";
        out += "abs(" + affine_text(p.abs_gain, p.channel, p.abs_offset) + ")";
      } else {
        out += affine_text(p.gain, p.channel, p.offset);
      }
      out += " >= 0";
      break;
    }
    case K::conjunction:
    case K::disjunction: {
      const char* op = n.kind == K::conjunction ? " and " : " or ";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += op;
        child(*n.children[i]);
      }
      break;
    }
    case K::negation:
      out += "not ";
      child(*n.children[0]);
      break;
    case K::always:
    case K::eventually:
      out += n.kind == K::always ? "G[" : "F[";
      out += num(n.interval.lo) + "," + num(n.interval.hi) + "]";
      child(*n.children[0]);
      break;
  }
}

void collect_channels(const FormulaNode& n, std::set<std::string>& out) {
  if (n.kind == FormulaNode::Kind::predicate) out.insert(n.predicate.channel);
  for (const auto& c : n.children) collect_channels(*c, out);
}

}  // namespace

Formula Formula::atom(Predicate p) {
  if (p.channel.empty()) throw Error("formula: predicate without channel");
  FormulaNode n;
  n.kind = FormulaNode::Kind::predicate;
  n.predicate = std::move(p);
  return Formula(make_node(std::move(n)));
}

Formula Formula::conj(std::vector<Formula> parts) {
  if (parts.empty()) throw Error("formula: empty conjunction");
  if (parts.size() == 1) return parts.front();
  FormulaNode n;
  n.kind = FormulaNode::Kind::conjunction;
  for (const auto& p : parts) n.children.push_back(root_ptr(p));
  return Formula(make_node(std::move(n)));
}

Formula Formula::disj(std::vector<Formula> parts) {
  if (parts.empty()) throw Error("formula: empty disjunction");
  if (parts.size() == 1) return parts.front();
  FormulaNode n;
  n.kind = FormulaNode::Kind::disjunction;
  for (const auto& p : parts) n.children.push_back(root_ptr(p));
  return Formula(make_node(std::move(n)));
}

Formula Formula::negate(const Formula& f) {
  FormulaNode n;
  n.kind = FormulaNode::Kind::negation;
  n.children.push_back(root_ptr(f));
  return Formula(make_node(std::move(n)));
}

Formula Formula::always(TimeInterval interval, const Formula& f) {
  check_interval(interval);
  FormulaNode n;
  n.kind = FormulaNode::Kind::always;
  n.interval = interval;
  n.children.push_back(root_ptr(f));
  return Formula(make_node(std::move(n)));
}

Formula Formula::eventually(TimeInterval interval, const Formula& f) {
  check_interval(interval);
  FormulaNode n;
  n.kind = FormulaNode::Kind::eventually;
  n.interval = interval;
  n.children.push_back(root_ptr(f));
  return Formula(make_node(std::move(n)));
}

std::vector<std::string> Formula::channels() const {
  std::set<std::string> s;
  collect_channels(root(), s);
  return {s.begin(), s.end()};
}

std::string Formula::to_string() const {
  std::string out;
  print_node(root(), out);
  return out;
}

bool operator==(const Formula& a, const Formula& b) {
  if (!a.valid() || !b.valid()) return a.valid() == b.valid();
  return nodes_equal(a.root(), b.root());
}

// ---------------------------------------------------------------------------
// Parser

namespace {

// Affine arithmetic value: constant + sum coef*channel + sum k*|inner|.
struct Linear {
  struct AbsTerm {
    double scale;
    double constant;
    std::map<std::string, double> coef;
  };
  double constant = 0.0;
  std::map<std::string, double> coef;
  std::vector<AbsTerm> abs_terms;

  bool is_constant() const { return coef.empty() && abs_terms.empty(); }

  Linear& scale(double k) {
    constant *= k;
    for (auto& [_, c] : coef) c *= k;
    for (auto& t : abs_terms) t.scale *= k;
    return *this;
  }
  Linear& add(const Linear& o, double sign) {
    constant += sign * o.constant;
    for (const auto& [ch, c] : o.coef) coef[ch] += sign * c;
    for (auto t : o.abs_terms) {
      t.scale *= sign;
      abs_terms.push_back(std::move(t));
    }
    return *this;
  }
};

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Formula parse() {
    Formula f = disjunction();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek_char(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  bool accept(std::string_view tok) {
    skip();
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  // Keyword match that does not swallow the prefix of a longer identifier.
  bool accept_word(std::string_view word) {
    skip();
    if (s_.substr(pos_, word.size()) != word) return false;
    const std::size_t end = pos_ + word.size();
    if (end < s_.size() && ident_char(s_[end])) return false;
    pos_ = end;
    return true;
  }

  std::optional<std::string> identifier() {
    skip();
    if (pos_ >= s_.size()) return std::nullopt;
    const char c = s_[pos_];
    if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_')) return std::nullopt;
    std::size_t end = pos_ + 1;
    while (end < s_.size() && ident_char(s_[end])) ++end;
    std::string id(s_.substr(pos_, end - pos_));
    pos_ = end;
    return id;
  }

  std::optional<double> number() {
    skip();
    if (pos_ >= s_.size()) return std::nullopt;
    const char c = s_[pos_];
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.')) return std::nullopt;
    double v = 0.0;
    const auto r = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (r.ec != std::errc()) fail("malformed number");
    pos_ = static_cast<std::size_t>(r.ptr - s_.data());
    return v;
  }

  double signed_number() {
    const bool neg = accept("-");
    auto v = number();
    if (!v) fail("expected number");
    return neg ? -*v : *v;
  }

  bool temporal_ahead(char op) {
    skip();
    if (pos_ >= s_.size() || s_[pos_] != op) return false;
    std::size_t k = pos_ + 1;
    while (k < s_.size() && std::isspace(static_cast<unsigned char>(s_[k]))) ++k;
    return k < s_.size() && s_[k] == '[';
  }

  Formula disjunction() {
    std::vector<Formula> parts{conjunction()};
    while (accept_word("or") || accept("||")) parts.push_back(conjunction());
    return Formula::disj(std::move(parts));
  }

  Formula conjunction() {
    std::vector<Formula> parts{unary()};
    while (accept_word("and") || accept("&&")) parts.push_back(unary());
    return Formula::conj(std::move(parts));
  }

  Formula unary() {
    skip();
    if (accept_word("not") || accept("!")) return Formula::negate(unary());
    for (char op : {'G', 'F'}) {
      if (temporal_ahead(op)) {
        ++pos_;
        expect("[");
        const std::size_t at = pos_;
        TimeInterval iv;
        iv.lo = signed_number();
        expect(",");
        iv.hi = signed_number();
        expect("]");
        if (!(iv.lo >= 0.0) || !(iv.hi >= iv.lo)) {
          pos_ = at;
          fail("temporal interval needs 0 <= t1 <= t2");
        }
        Formula body = unary();
        return op == 'G' ? Formula::always(iv, body) : Formula::eventually(iv, body);
      }
    }
    // A leading '(' may open either a sub-formula or an arithmetic group.
    const std::size_t start = pos_;
    std::optional<ParseError> predicate_error;
    try {
      return predicate();
    } catch (const ParseError& e) {
      predicate_error = e;
    }
    pos_ = start;
    if (accept("(")) {
      try {
        Formula f = disjunction();
        expect(")");
        return f;
      } catch (const ParseError& e) {
        if (e.position() >= predicate_error->position()) throw;
        throw *predicate_error;
      }
    }
    throw *predicate_error;
  }

  Formula predicate() {
    Linear lhs = expression();
    Linear diff;
    if (accept(">=")) {
      Linear rhs = expression();
      diff = lhs.add(rhs, -1.0);
    } else if (accept("<=")) {
      Linear rhs = expression();
      diff = rhs.add(lhs, -1.0);
    } else {
      fail("expected '>=' or '<='");
    }
    return Formula::atom(normalize(diff));
  }

  Predicate normalize(const Linear& lin) {
    auto nonzero = [](const std::map<std::string, double>& m) {
      std::vector<std::pair<std::string, double>> out;
      for (const auto& [ch, c] : m) {
        if (c != 0.0) out.emplace_back(ch, c);
      }
      return out;
    };
    const auto outer = nonzero(lin.coef);
    Predicate p;
    p.offset = lin.constant;
    if (lin.abs_terms.empty()) {
      if (outer.size() != 1) fail("predicate must reference exactly one channel");
      p.channel = outer.front().first;
      p.gain = outer.front().second;
      return p;
    }
    if (lin.abs_terms.size() > 1) fail("at most one abs() term per predicate");
    if (!outer.empty()) fail("abs() predicates may not have a channel term outside abs()");
    const auto& t = lin.abs_terms.front();
    if (!(t.scale < 0.0)) fail("abs() must enter the predicate with a negative coefficient");
    const auto inner = nonzero(t.coef);
    if (inner.size() != 1) fail("abs() argument must reference exactly one channel");
    p.channel = inner.front().first;
    p.abs_scale = -t.scale;
    p.abs_gain = inner.front().second;
    p.abs_offset = t.constant;
    return p;
  }

  Linear expression() {
    Linear acc = term();
    while (true) {
      if (accept("+")) {
        acc.add(term(), 1.0);
      } else if (peek_char('-')) {
        ++pos_;
        acc.add(term(), -1.0);
      } else {
        return acc;
      }
    }
  }

  Linear term() {
    Linear acc = factor();
    while (true) {
      if (accept("*")) {
        Linear rhs = factor();
        if (rhs.is_constant()) {
          acc.scale(rhs.constant);
        } else if (acc.is_constant()) {
          acc = rhs.scale(acc.constant);
        } else {
          fail("products of signals are not affine");
        }
      } else if (accept("/")) {
        Linear rhs = factor();
        if (!rhs.is_constant() || rhs.constant == 0.0) fail("division only by a non-zero constant");
        acc.scale(1.0 / rhs.constant);
      } else {
        return acc;
      }
    }
  }

  Linear factor() {
    skip();
    if (accept("-")) return factor().scale(-1.0);
    if (accept("+")) return factor();
    if (auto v = number()) {
      Linear l;
      l.constant = *v;
      return l;
    }
    if (accept("(")) {
      Linear inner = expression();
      expect(")");
      return inner;
    }
    const std::size_t at = pos_;
    auto id = identifier();
    if (!id) fail("expected number, channel or abs()");
    if (*id == "abs") {
      expect("(");
      Linear inner = expression();
      expect(")");
      if (!inner.abs_terms.empty()) fail("nested abs() is not supported");
      Linear l;
      l.abs_terms.push_back({1.0, inner.constant, inner.coef});
      return l;
    }
    if (*id == "and" || *id == "or" || *id == "not") {
      pos_ = at;
      fail("unexpected keyword '" + *id + "'");
    }
    Linear l;
    l.coef[*id] = 1.0;
    return l;
  }
};

}  // namespace

Formula parse_formula(std::string_view text) {
  bool blank = true;
  for (char c : text) blank = blank && std::isspace(static_cast<unsigned char>(c));
  if (blank) throw ParseError("empty formula", 0);
  return Parser(text).parse();
}

// ---------------------------------------------------------------------------
// Quantitative semantics

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> sliding_extremum(const std::vector<double>& child, const std::vector<double>& t,
                                     TimeInterval iv, bool take_min) {
  const std::size_t n = t.size();
  std::vector<double> out(n, kNaN);
  std::vector<std::size_t> nan_prefix(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) nan_prefix[i + 1] = nan_prefix[i] + (std::isnan(child[i]) ? 1 : 0);

  const auto better = [take_min](double a, double b) { return take_min ? a <= b : a >= b; };
  std::deque<std::size_t> window;  // indices with monotone child values
  std::size_t lo_ptr = 0, hi_ptr = 0;
  const double t_end = t.back();
  for (std::size_t k = 0; k < n; ++k) {
    const double lo = t[k] + iv.lo;
    const double hi = t[k] + iv.hi;
    if (!in_time_window(t_end, hi, std::numeric_limits<double>::infinity())) break;
    while (hi_ptr < n && in_time_window(t[hi_ptr], -std::numeric_limits<double>::infinity(), hi)) {
      if (!std::isnan(child[hi_ptr])) {
        while (!window.empty() && better(child[hi_ptr], child[window.back()])) window.pop_back();
        window.push_back(hi_ptr);
      }
      ++hi_ptr;
    }
    while (lo_ptr < hi_ptr && !in_time_window(t[lo_ptr], lo, std::numeric_limits<double>::infinity()))
      ++lo_ptr;
    while (!window.empty() && window.front() < lo_ptr) window.pop_front();
    if (lo_ptr >= hi_ptr) continue;                                   // empty window
    if (nan_prefix[hi_ptr] - nan_prefix[lo_ptr] > 0) continue;        // undefined child
    out[k] = child[window.front()];
  }
  return out;
}

std::vector<double> eval_signal(const FormulaNode& n, const Trace& trace) {
  using K = FormulaNode::Kind;
  switch (n.kind) {
    case K::predicate: {
      const auto& s = trace.channel(n.predicate.channel);
      std::vector<double> out(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) out[i] = n.predicate.evaluate(s[i]);
      return out;
    }
    case K::negation: {
      auto v = eval_signal(*n.children[0], trace);
      for (double& x : v) x = -x;
      return v;
    }
    case K::conjunction:
    case K::disjunction: {
      auto acc = eval_signal(*n.children[0], trace);
      for (std::size_t c = 1; c < n.children.size(); ++c) {
        const auto v = eval_signal(*n.children[c], trace);
        for (std::size_t i = 0; i < acc.size(); ++i) {
          if (std::isnan(acc[i]) || std::isnan(v[i])) {
            acc[i] = kNaN;
          } else {
            acc[i] = n.kind == K::conjunction ? std::min(acc[i], v[i]) : std::max(acc[i], v[i]);
          }
        }
      }
      return acc;
    }
    case K::always:
    case K::eventually:
      return sliding_extremum(eval_signal(*n.children[0], trace), trace.times(), n.interval,
                              n.kind == K::always);
  }
  return {};
}

void check_channels(const Formula& f, const Trace& trace) {
  for (const auto& ch : f.channels()) {
    if (!trace.has_channel(ch)) throw Error("robustness: trace has no channel '" + ch + "'");
  }
}

bool bool_at(const FormulaNode& n, const Trace& trace, std::size_t k) {
  using K = FormulaNode::Kind;
  const auto& t = trace.times();
  switch (n.kind) {
    case K::predicate:
      return n.predicate.evaluate(trace.channel(n.predicate.channel)[k]) >= 0.0;
    case K::negation:
      return !bool_at(*n.children[0], trace, k);
    case K::conjunction:
      for (const auto& c : n.children) {
        if (!bool_at(*c, trace, k)) return false;
      }
      return true;
    case K::disjunction:
      for (const auto& c : n.children) {
        if (bool_at(*c, trace, k)) return true;
      }
      return false;
    case K::always:
    case K::eventually: {
      const double lo = t[k] + n.interval.lo;
      const double hi = t[k] + n.interval.hi;
      if (!in_time_window(t.back(), hi, std::numeric_limits<double>::infinity()))
        throw Error("boolean semantics: interval runs past the end of the trace");
      bool any = false;
      for (std::size_t j = k; j < t.size(); ++j) {
        if (!in_time_window(t[j], lo, hi)) continue;
        any = true;
        const bool v = bool_at(*n.children[0], trace, j);
        if (n.kind == K::always && !v) return false;
        if (n.kind == K::eventually && v) return true;
      }
      if (!any) throw Error("boolean semantics: empty temporal interval");
      return n.kind == K::always;
    }
  }
  return false;
}

}  // namespace

std::vector<double> robustness_signal(const Formula& formula, const Trace& trace) {
  check_channels(formula, trace);
  return eval_signal(formula.root(), trace);
}

RobustnessMeasurement robustness(const Formula& formula, const Trace& trace) {
  const auto sig = robustness_signal(formula, trace);
  if (std::isnan(sig.front()))
    throw Error("robustness: a temporal interval is empty or extends past the trace end (" +
                std::to_string(trace.final_time()) + " s)");
  return {sig.front(), sig.front() > 0.0};
}

bool boolean_semantics(const Formula& formula, const Trace& trace) {
  check_channels(formula, trace);
  return bool_at(formula.root(), trace, 0);
}

double conjunction_robustness(std::span<const double> values) {
  if (values.empty()) throw Error("conjunction_robustness: empty list");
  return *std::min_element(values.begin(), values.end());
}

}  // namespace clsv
