#include <gtest/gtest.h>

#include "dvlab/params.hpp"

using namespace dvlab;
using exact::Rational;

TEST(Exact, PiEnclosure) {
  for (long bits : {64L, 256L, 1024L}) {
    const exact::Interval p = exact::pi(bits);
    EXPECT_LT(p.lo, Rational(355, 113));
    EXPECT_GT(p.hi, Rational(333, 106));
    EXPECT_LT(exact::log2_abs(p.width()), -static_cast<double>(bits) + 4);
    EXPECT_NEAR(exact::to_double(p.lo), M_PI, 1e-15);
  }
}

TEST(Exact, SqrtBoundsContainRoot) {
  for (const Rational q : {Rational(2), Rational(5), Rational(1, 3), exact::pow2(-1001), exact::pow2(900) * 3}) {
    const exact::Interval s = exact::sqrt_bounds(q, 80);
    EXPECT_LE(s.lo * s.lo, q);
    EXPECT_GE(s.hi * s.hi, q);
    EXPECT_LT(exact::log2_abs(s.width()) - exact::log2_abs(s.hi), -75.0);
  }
}

TEST(Exact, ParseAndFormat) {
  EXPECT_EQ(exact::parse_rational("2^-37"), exact::pow2(-37));
  EXPECT_EQ(exact::parse_rational("3/8"), Rational(3, 8));
  EXPECT_EQ(exact::parse_rational("0.125"), Rational(1, 8));
  EXPECT_EQ(exact::parse_rational("1e-3"), Rational(1, 1000));
  EXPECT_EQ(exact::parse_rational("-7"), Rational(-7));
  EXPECT_THROW(exact::parse_rational("abc"), std::invalid_argument);
  EXPECT_THROW(exact::parse_rational("1/0"), std::invalid_argument);
  EXPECT_EQ(exact::format_rational(exact::pow2(-1017)), "2^-1017");
  EXPECT_EQ(exact::format_rational(Rational(3, 8)), "3/8");
}

TEST(Exact, IntervalDivisionByZeroThrows) {
  EXPECT_THROW(exact::Interval(1) / exact::Interval(Rational(-1), Rational(1)), std::domain_error);
}

TEST(ParameterChain, DefaultSetPassesEverything) {
  const ParameterChainResult r = check_parameter_chain(ParameterSet{});
  ASSERT_EQ(r.conditions.size(), 12u);
  for (const auto& c : r.conditions) EXPECT_TRUE(c.passed) << c.name << ' ' << c.statement;
  EXPECT_TRUE(r.all_passed);
  EXPECT_EQ(r.epsilon, exact::pow2(-1017));
  EXPECT_EQ(r.binding, "pruned_separation_scale");
}

TEST(ParameterChain, AllHalvesFailsSinglePairCondition) {
  const ParameterChainResult r = check_parameter_chain(uniform_parameters(Rational(1, 2)));
  EXPECT_FALSE(r.all_passed);
  for (const auto& c : r.conditions)
    if (c.name == "single_pair_contradiction") EXPECT_FALSE(c.passed);
}

TEST(ParameterChain, SmallerDeltaKeepsMonotoneConditions) {
  ParameterSet p;
  const ParameterChainResult base = check_parameter_chain(p);
  p.delta = exact::pow2(-600);
  const ParameterChainResult smaller = check_parameter_chain(p);
  for (std::size_t i = 0; i < base.conditions.size(); ++i) {
    const std::string& l = base.conditions[i].name;
    if (l == "lambda_range" || l == "eigenspace_proximity" || l == "sign_stability" ||
        l == "few_values_contradiction" || l == "spread_contradiction")
      EXPECT_TRUE(!base.conditions[i].passed || smaller.conditions[i].passed) << l;
  }
}

TEST(ParameterChain, TightStrictConditionIsDecided) {
  // xi == alpha c makes the strict inequality fail exactly.
  ParameterSet p;
  p.xi = p.alpha * p.c;
  const ParameterChainResult r = check_parameter_chain(p);
  for (const auto& c : r.conditions)
    if (c.name == "typical_exists") EXPECT_FALSE(c.passed);
}

TEST(ParameterChain, RejectsNonPositive) {
  ParameterSet p;
  p.beta = 0;
  EXPECT_THROW(check_parameter_chain(p), std::domain_error);
  EXPECT_THROW(p.at("zeta"), std::invalid_argument);
}
