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


#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "clsv/stl.hpp"
#include "clsv/systems.hpp"
#include "support/oracles.hpp"

using namespace clsv;

namespace {

Trace constant_trace(const std::string& name, double value, double t_final = 40.0, double dt = 0.1) {
  const auto n = static_cast<std::size_t>(std::llround(t_final / dt)) + 1;
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * dt;
  return Trace(t, {name}, {std::vector<double>(n, value)});
}

double oracle_value(const Formula& f, const Trace& tr) { return oracle::stl_at(f.root(), tr, 0); }

// Random formulas over channels a and b. Windows are at least 0.1 s wide (two
// samples at dt = 0.05) and end by 3.1 s, so depth 3 nests to under 10 s.
Formula random_formula(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> kind(0, depth > 0 ? 5 : 0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> t(0.0, 1.5);
  const int k = kind(rng);
  if (k == 0) {
    Predicate p;
    p.channel = rng() % 2 ? "a" : "b";
    if (rng() % 3 == 0) {
      p.offset = 0.5 + std::abs(u(rng));
      p.abs_scale = 0.5 + std::abs(u(rng));
      p.abs_gain = u(rng);
      p.abs_offset = u(rng);
    } else {
      p.gain = u(rng);
      p.offset = u(rng);
    }
    return Formula::atom(p);
  }
  if (k == 1) return Formula::negate(random_formula(rng, depth - 1));
  if (k == 2) return Formula::conj({random_formula(rng, depth - 1), random_formula(rng, depth - 1)});
  if (k == 3) return Formula::disj({random_formula(rng, depth - 1), random_formula(rng, depth - 1)});
  const double lo = t(rng), hi = lo + 0.1 + t(rng);
  if (k == 4) return Formula::always({lo, hi}, random_formula(rng, depth - 1));
  return Formula::eventually({lo, hi}, random_formula(rng, depth - 1));
}

}  // namespace

TEST(Parse, BoundSpecification) {
  const Formula f = parse_formula("G[0,40](1 - abs(e1 - 0) >= 0)");
  Predicate p;
  p.channel = "e1";
  p.offset = 1.0;
  p.abs_scale = 1.0;
  p.abs_gain = 1.0;
  p.abs_offset = 0.0;
  EXPECT_EQ(f, Formula::always({0.0, 40.0}, Formula::atom(p)));
}

TEST(Parse, EventuallyWindow) {
  const Formula f = parse_formula("F[2,3](x1 - 0.7 >= 0)");
  Predicate p;
  p.channel = "x1";
  p.gain = 1.0;
  p.offset = -0.7;
  EXPECT_EQ(f, Formula::eventually({2.0, 3.0}, Formula::atom(p)));
}

TEST(Parse, WhitespaceAndComparisonDirection) {
  EXPECT_EQ(parse_formula("F[ 2 , 3 ]( x1-0.7>=0 )"), parse_formula("F[2,3](x1 - 0.7 >= 0)"));
  EXPECT_EQ(parse_formula("0.7 <= x1"), parse_formula("x1 - 0.7 >= 0"));
  EXPECT_EQ(parse_formula("2*x1 >= 1.4").root().predicate.gain, 2.0);
}

TEST(Parse, RoundTripThroughPrinter) {
  for (const auto& name : formula_preset_names()) {
    const Formula f = parse_formula(formula_preset(name));
    EXPECT_EQ(parse_formula(f.to_string()), f) << name;
  }
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const Formula f = random_formula(rng, 3);
    EXPECT_EQ(parse_formula(f.to_string()), f) << f.to_string();
  }
}

TEST(Parse, SyntaxErrorsCarryPosition) {
  try {
    parse_formula("G[0,40](1 - abs(e1) >= )");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_GT(e.position(), 10u);
  }
  EXPECT_THROW(parse_formula(""), ParseError);
  EXPECT_THROW(parse_formula("G[3,1](x >= 0)"), ParseError);
  EXPECT_THROW(parse_formula("x * y >= 0"), ParseError);
  EXPECT_THROW(parse_formula("x >= 0 and"), ParseError);
}

TEST(Robustness, ZeroErrorGivesUnitMargin) {
  const Formula f = parse_formula(formula_preset("mrac_bound"));
  const auto m = robustness(f, constant_trace("e1", 0.0));
  EXPECT_DOUBLE_EQ(m.value, 1.0);
  EXPECT_TRUE(m.satisfied);
}

TEST(Robustness, BoundaryCountsAsFailure) {
  Trace tr = constant_trace("e1", 0.2);
  std::vector<double> e = tr.channel("e1");
  e[123] = 1.0;
  tr = Trace(tr.times(), {"e1"}, {e});
  const auto m = robustness(parse_formula(formula_preset("mrac_bound")), tr);
  EXPECT_EQ(m.value, 0.0);
  EXPECT_FALSE(m.satisfied);
}

TEST(Robustness, MatchesPerSampleOracleOnPresets) {
  std::mt19937_64 rng(42);
  const Formula bound = parse_formula(formula_preset("mrac_bound"));
  const Formula phi = parse_formula(formula_preset("mrac_phi123"));
  for (int i = 0; i < 100; ++i) {
    const Trace tr = oracle::random_pwl_trace(rng, {"e1", "x1"}, 40.0, 0.1, 2.0);
    EXPECT_EQ(robustness(bound, tr).value, oracle_value(bound, tr));
    EXPECT_EQ(robustness(phi, tr).value, oracle_value(phi, tr));
  }
}

TEST(Robustness, MatchesPerSampleOracleOnRandomFormulas) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const Formula f = random_formula(rng, 3);
    const Trace tr = oracle::random_pwl_trace(rng, {"a", "b"}, 10.0, 0.05, 1.5);
    EXPECT_EQ(robustness(f, tr).value, oracle_value(f, tr)) << f.to_string();
    const auto sig = robustness_signal(f, tr);
    for (std::size_t k = 0; k < tr.size(); k += 17) {
      const double o = oracle::stl_at(f.root(), tr, k);
      if (std::isnan(o)) EXPECT_TRUE(std::isnan(sig[k]));
      else EXPECT_EQ(sig[k], o);
    }
  }
}

TEST(Robustness, SignSoundness) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 500; ++i) {
    const Formula f = random_formula(rng, 3);
    const Trace tr = oracle::random_pwl_trace(rng, {"a", "b"}, 10.0, 0.05, 1.5);
    const double v = robustness(f, tr).value;
    if (v > 0) EXPECT_TRUE(boolean_semantics(f, tr)) << f.to_string();
    if (v < 0) EXPECT_FALSE(boolean_semantics(f, tr)) << f.to_string();
  }
}

TEST(Robustness, NegationDuality) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 200; ++i) {
    const Formula f = random_formula(rng, 3);
    const Trace tr = oracle::random_pwl_trace(rng, {"a", "b"}, 10.0, 0.05, 1.5);
    EXPECT_EQ(robustness(Formula::negate(f), tr).value, -robustness(f, tr).value);
  }
}

TEST(Robustness, MonotoneInPositivelyUsedChannel) {
  const Formula f = parse_formula("G[0,3](a - 0.2 >= 0) and F[1,2](2*a + 0.1 >= 0) or G[0.5,1](a >= 0.4)");
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> shift(0.0, 0.5);
  for (int i = 0; i < 100; ++i) {
    const Trace tr = oracle::random_pwl_trace(rng, {"a"}, 5.0, 0.05, 1.0);
    std::vector<double> a = tr.channel("a");
    const double s = shift(rng);
    for (auto& v : a) v += s;
    EXPECT_GE(robustness(f, Trace(tr.times(), {"a"}, {a})).value, robustness(f, tr).value);
  }
}

TEST(Robustness, ErrorsOnMissingChannelAndEmptyWindow) {
  const Trace tr = constant_trace("e1", 0.0, 10.0, 1.0);
  EXPECT_THROW(robustness(parse_formula("x1 >= 0"), tr), Error);
  EXPECT_THROW(robustness(parse_formula("G[0,40](e1 >= 0)"), tr), Error);
  EXPECT_THROW(robustness(parse_formula("F[2.2,2.8](e1 >= 0)"), tr), Error);
}

TEST(Conjunction, Minimum) {
  const std::vector<double> v{0.3, -0.1, 0.5};
  EXPECT_EQ(conjunction_robustness(v), -0.1);
  const std::vector<double> one{0.25};
  EXPECT_EQ(conjunction_robustness(one), 0.25);
  EXPECT_THROW(conjunction_robustness(std::span<const double>{}), Error);
}

TEST(Conjunction, MatchesAndNode) {
  const Formula phi = parse_formula(formula_preset("mrac_phi123"));
  ASSERT_EQ(phi.root().kind, FormulaNode::Kind::conjunction);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const Trace tr = oracle::random_pwl_trace(rng, {"x1"}, 25.0, 0.1, 2.0);
    std::vector<double> parts;
    for (const auto& c : phi.root().children) parts.push_back(robustness(Formula(c), tr).value);
    EXPECT_EQ(conjunction_robustness(parts), robustness(phi, tr).value);
  }
}

TEST(TraceIo, CsvRoundTrip) {
  std::mt19937_64 rng(12);
  const Trace tr = oracle::random_pwl_trace(rng, {"x1", "e1"}, 3.0, 0.01, 1.0);
  std::stringstream s;
  tr.write_csv(s);
  EXPECT_EQ(s.str().substr(0, s.str().find('\n')), "time,x1,e1");
  EXPECT_EQ(Trace::read_csv(s), tr);
}

TEST(TraceIo, RejectsMalformedTraces) {
  EXPECT_THROW(Trace({0.0, 0.0}, {"a"}, {{1.0, 2.0}}), Error);
  EXPECT_THROW(Trace({0.1, 0.2}, {"a"}, {{1.0, 2.0}}), Error);
  EXPECT_THROW(Trace({0.0, 0.1}, {"a"}, {{1.0}}), Error);
  std::stringstream bad("time,a\n0,1\n0.1,x\n");
  EXPECT_THROW(Trace::read_csv(bad), Error);
}
