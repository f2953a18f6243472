#pragma once

// The symbol table of the construction and the chain of inequalities its
// values must satisfy, decided in exact rational interval arithmetic.

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dvlab/exact.hpp"

namespace dvlab {

using exact::Interval;
using exact::Rational;

struct ParameterSet {
  Rational gamma = exact::pow2(-37);
  Rational beta = exact::pow2(-6);
  Rational eta = exact::pow2(-40);
  Rational alpha = exact::pow2(-40);
  Rational rho = exact::pow2(-40);
  Rational c = exact::pow2(-205);
  Rational xi = exact::pow2(-403);
  Rational delta = exact::pow2(-506);
  Rational C = 2;

  /// zeta = xi / (alpha c).
  Rational zeta() const { return xi / (alpha * c); }
  /// epsilon = delta^2 / (8 C^2).
  Rational epsilon() const { return delta * delta / (8 * C * C); }
  /// sigma = (8 pi zeta + 9 delta) / eta, enclosed.
  Interval sigma(long bits) const {
    return (Interval(Rational(8)) * exact::pi(bits) * Interval(zeta()) + Interval(Rational(9) * delta)) /
           Interval(eta);
  }

  static const std::vector<std::string>& names() {
    static const std::vector<std::string> n = {"gamma", "beta", "eta", "alpha", "rho", "c", "xi", "delta"};
    return n;
  }
  Rational& at(const std::string& name) {
    if (name == "gamma") return gamma;
    if (name == "beta") return beta;
    if (name == "eta") return eta;
    if (name == "alpha") return alpha;
    if (name == "rho") return rho;
    if (name == "c") return c;
    if (name == "xi") return xi;
    if (name == "delta") return delta;
    throw std::invalid_argument("unknown parameter '" + name + "'");
  }
  const Rational& at(const std::string& name) const { return const_cast<ParameterSet*>(this)->at(name); }

  void validate() const {
    for (const auto& n : names())
      if (!(at(n) > 0)) throw std::domain_error("parameter " + n + " must be positive");
  }
};

/// Sets every named parameter to `value`.
inline ParameterSet uniform_parameters(const Rational& value) {
  ParameterSet p;
  for (const auto& n : ParameterSet::names()) p.at(n) = value;
  return p;
}

struct ConditionResult {
  std::string name;         // identifier, e.g. "lambda_range"
  std::string statement;    // the inequality in plain text
  bool strict = false;      // "<" rather than "<="
  bool passed = false;
  Interval lhs;
  Interval rhs;
  double log2_margin = 0.0; // log2(rhs / lhs); >= 0 when the inequality holds
  long precision_bits = 0;
};

struct ParameterChainResult {
  std::vector<ConditionResult> conditions;
  bool all_passed = false;
  std::string binding;      // name of the smallest-margin condition
  Rational epsilon;
  Interval sigma;
  Rational zeta;
};

/// Thrown when an inequality stays undecided at the largest precision.
class Undecidable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct ConditionSpec {
  const char* name;
  const char* statement;
  bool strict;
  std::function<std::pair<Interval, Interval>(const ParameterSet&, long)> sides;
};

inline const std::vector<ConditionSpec>& condition_specs() {
  using exact::sqrt;
  using exact::square;
  static const std::vector<ConditionSpec> specs = {
      {"lambda_range", "delta + eta <= 2 - sqrt(2)", false,
       [](const ParameterSet& p, long b) {
         return std::pair{Interval(p.delta + p.eta), Interval(Rational(2)) - exact::sqrt_bounds(Rational(2), b)};
       }},
      {"eigenspace_proximity", "3 delta + 2 eta <= gamma", false,
       [](const ParameterSet& p, long) { return std::pair{Interval(3 * p.delta + 2 * p.eta), Interval(p.gamma)}; }},
      {"large_coordinates", "alpha <= gamma", false,
       [](const ParameterSet& p, long) { return std::pair{Interval(p.alpha), Interval(p.gamma)}; }},
      {"typical_exists", "xi < alpha c", true,
       [](const ParameterSet& p, long) { return std::pair{Interval(p.xi), Interval(p.alpha * p.c)}; }},
      {"separation_scale", "beta <= 1", false,
       [](const ParameterSet& p, long) { return std::pair{Interval(p.beta), Interval(Rational(1))}; }},
      {"arc_radius", "rho <= gamma", false,
       [](const ParameterSet& p, long) { return std::pair{Interval(p.rho), Interval(p.gamma)}; }},
      {"single_pair_contradiction", "(2 pi xi / (alpha c rho))^2 + beta^2 / 2 < 1/4", true,
       [](const ParameterSet& p, long b) {
         Interval t = Interval(Rational(2)) * exact::pi(b) * Interval(p.xi / (p.alpha * p.c * p.rho));
         return std::pair{square(t) + Interval(p.beta * p.beta / 2), Interval(Rational(1, 4))};
       }},
      {"pruned_separation_scale", "beta <= 1/48", false,
       [](const ParameterSet& p, long) { return std::pair{Interval(p.beta), Interval(Rational(1, 48))}; }},
      {"sign_stability", "c + xi^-2 delta^2 <= beta^4 / 256", false,
       [](const ParameterSet& p, long) {
         Rational b2 = p.beta * p.beta;
         return std::pair{Interval(p.c + p.delta * p.delta / (p.xi * p.xi)), Interval(b2 * b2 / 256)};
       }},
      {"sigma_small", "sigma <= beta^2 eta^2 / 2^10", false,
       [](const ParameterSet& p, long b) {
         return std::pair{p.sigma(b), Interval(p.beta * p.beta * p.eta * p.eta / 1024)};
       }},
      {"few_values_contradiction",
       "alpha + 4 delta + 2 eta + 512 sigma / (eta beta^2) + 1024 (c + xi^-2 delta^2)^(1/2) / (eta beta^2) <= gamma",
       false,
       [](const ParameterSet& p, long b) {
         const Rational scale = 1 / (p.eta * p.beta * p.beta);
         Interval root = sqrt(Interval(p.c + p.delta * p.delta / (p.xi * p.xi)), b);
         Interval lhs = Interval(p.alpha + 4 * p.delta + 2 * p.eta) + Interval(512 * scale) * p.sigma(b) +
                        Interval(1024 * scale) * root;
         return std::pair{lhs, Interval(p.gamma)};
       }},
      {"spread_contradiction", "beta^2 / 8 + 5 delta / eta < beta / (2 sqrt(5))", true,
       [](const ParameterSet& p, long b) {
         Interval rhs = Interval(p.beta) / (Interval(Rational(2)) * exact::sqrt_bounds(Rational(5), b));
         return std::pair{Interval(p.beta * p.beta / 8 + 5 * p.delta / p.eta), rhs};
       }},
  };
  return specs;
}

/// +1 holds, -1 fails, 0 undecided at this precision.
inline int decide(const Interval& lhs, const Interval& rhs, bool strict) {
  const Interval d = rhs - lhs;
  if (strict) {
    if (d.lo > 0) return 1;
    if (d.hi <= 0) return -1;
  } else {
    if (d.lo >= 0) return 1;
    if (d.hi < 0) return -1;
  }
  return 0;
}

inline Rational midpoint(const Interval& i) { return (i.lo + i.hi) / 2; }

}  // namespace detail

inline constexpr long kMinPrecisionBits = 64;
inline constexpr long kMaxPrecisionBits = 4096;

/// Decides every condition, doubling the working precision from 64 bits up
/// to 4096 until each one is settled.
inline ParameterChainResult check_parameter_chain(const ParameterSet& p) {
  p.validate();
  ParameterChainResult out;
  out.all_passed = true;
  double best_margin = std::numeric_limits<double>::infinity();
  for (const auto& spec : detail::condition_specs()) {
    ConditionResult r;
    r.name = spec.name;
    r.statement = spec.statement;
    r.strict = spec.strict;
    int verdict = 0;
    for (long bits = kMinPrecisionBits; bits <= kMaxPrecisionBits; bits *= 2) {
      auto [lhs, rhs] = spec.sides(p, bits);
      verdict = detail::decide(lhs, rhs, spec.strict);
      r.lhs = lhs;
      r.rhs = rhs;
      r.precision_bits = bits;
      if (verdict != 0) break;
    }
    if (verdict == 0) throw Undecidable("condition " + r.name + " undecided at " + std::to_string(kMaxPrecisionBits) + " bits");
    r.passed = verdict > 0;
    const Rational l = detail::midpoint(r.lhs);
    const Rational h = detail::midpoint(r.rhs);
    r.log2_margin = (l > 0 && h > 0) ? exact::log2_abs(h) - exact::log2_abs(l)
                                     : (r.passed ? std::numeric_limits<double>::infinity()
                                                 : -std::numeric_limits<double>::infinity());
    if (r.log2_margin < best_margin) {
      best_margin = r.log2_margin;
      out.binding = r.name;
    }
    out.all_passed = out.all_passed && r.passed;
    out.conditions.push_back(std::move(r));
  }
  out.epsilon = p.epsilon();
  out.zeta = p.zeta();
  out.sigma = p.sigma(kMinPrecisionBits);
  return out;
}

}  // namespace dvlab
