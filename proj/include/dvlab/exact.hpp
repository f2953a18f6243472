#pragma once

// Exact rationals and outward-rounded rational intervals, enough to decide
// inequalities that involve pi, square roots and huge dyadic exponents.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace dvlab::exact {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt numer(const Rational& q) { return boost::multiprecision::numerator(q); }
inline BigInt denom(const Rational& q) { return boost::multiprecision::denominator(q); }

/// 2^k for any integer k.
inline Rational pow2(long k) {
  BigInt one = 1;
  if (k >= 0) return Rational(one << static_cast<unsigned>(k));
  return Rational(BigInt(1), one << static_cast<unsigned>(-k));
}

inline long bit_length(const BigInt& v) {
  if (v == 0) return 0;
  return static_cast<long>(boost::multiprecision::msb(v)) + 1;
}

/// log2|q| to double accuracy, valid far outside the double exponent range.
inline double log2_abs(const Rational& q) {
  if (q == 0) return -std::numeric_limits<double>::infinity();
  auto top = [](BigInt v) {
    if (v < 0) v = -v;
    const long bits = bit_length(v);
    const long shift = std::max(0L, bits - 60);
    return std::log2(static_cast<double>(BigInt(v >> static_cast<unsigned>(shift)))) + static_cast<double>(shift);
  };
  return top(numer(q)) - top(denom(q));
}

/// Nearest double; values below the double range flush toward zero.
inline double to_double(const Rational& q) {
  if (q == 0) return 0.0;
  const double l = log2_abs(q);
  if (l < -1074.0) return 0.0;
  return q.convert_to<double>();
}

/// floor(q * 2^bits) / 2^bits and its ceiling counterpart.
inline Rational round_down(const Rational& q, long bits) {
  Rational scaled = q * pow2(bits);
  BigInt f = numer(scaled) / denom(scaled);
  if (f * denom(scaled) > numer(scaled)) f -= 1;
  return Rational(f) * pow2(-bits);
}
inline Rational round_up(const Rational& q, long bits) { return -round_down(-q, bits); }

/// Closed interval [lo, hi] of rationals.
struct Interval {
  Rational lo;
  Rational hi;

  Interval() = default;
  Interval(const Rational& v) : lo(v), hi(v) {}  // NOLINT(google-explicit-constructor)
  Interval(Rational a, Rational b) : lo(std::move(a)), hi(std::move(b)) {
    if (lo > hi) throw std::invalid_argument("Interval: lo > hi");
  }

  bool exact() const { return lo == hi; }
  Rational width() const { return hi - lo; }
};

inline Interval operator+(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Interval operator-(const Interval& a, const Interval& b) { return {a.lo - b.hi, a.hi - b.lo}; }
inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }
inline Interval operator*(const Interval& a, const Interval& b) {
  Rational p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}
inline Interval operator/(const Interval& a, const Interval& b) {
  if (b.lo <= 0 && b.hi >= 0) throw std::domain_error("Interval: division by an interval containing 0");
  return a * Interval(1 / b.hi, 1 / b.lo);
}
inline Interval square(const Interval& a) {
  if (a.lo >= 0) return {a.lo * a.lo, a.hi * a.hi};
  if (a.hi <= 0) return {a.hi * a.hi, a.lo * a.lo};
  return {Rational(0), std::max(a.lo * a.lo, a.hi * a.hi)};
}

/// Square root bounds of a nonnegative rational, with about `bits` correct
/// leading bits regardless of magnitude.
inline Interval sqrt_bounds(const Rational& q, long bits) {
  if (q < 0) throw std::domain_error("sqrt_bounds: negative argument");
  if (q == 0) return Interval(Rational(0));
  const long mag = bit_length(denom(q)) - bit_length(numer(q));
  const long k = bits + std::max(0L, mag / 2 + 1);
  // s^2 <= q 4^k < (s+1)^2 for s = isqrt(floor(q 4^k)).
  Rational scaled = q * pow2(2 * k);
  BigInt f = numer(scaled) / denom(scaled);
  BigInt s = boost::multiprecision::sqrt(f);
  Rational lo = Rational(s) * pow2(-k);
  Rational hi = Rational(s + 1) * pow2(-k);
  return {lo, hi};
}

inline Interval sqrt(const Interval& a, long bits) {
  if (a.lo < 0) throw std::domain_error("sqrt: interval reaches below 0");
  return {sqrt_bounds(a.lo, bits).lo, sqrt_bounds(a.hi, bits).hi};
}

namespace detail {

/// arctan(1/x) from its alternating series in fixed point, rounded outward
/// to `bits` fractional bits.
inline Interval arctan_inverse(long x, long bits) {
  const long guard = bits + 16;
  const BigInt x2 = BigInt(x) * x;
  // Fixed point: every term t_k = 2^guard / ((2k+1) x^(2k+1)) truncated, so
  // each carries an error below one unit.
  BigInt power = BigInt(x);
  BigInt unit = BigInt(1) << static_cast<unsigned>(guard);
  BigInt sum = 0;
  long terms = 0;
  for (long k = 0;; ++k) {
    BigInt term = unit / (power * (2 * k + 1));
    if (term == 0) break;
    sum += (k % 2 == 0) ? term : BigInt(-term);
    power *= x2;
    ++terms;
  }
  // Truncation of each term: at most `terms` units; tail below one unit since
  // the first dropped term truncated to zero.
  Rational scale = pow2(-guard);
  Rational err = Rational(terms + 1) * scale;
  Rational mid = Rational(sum) * scale;
  return {round_down(mid - err, bits), round_up(mid + err, bits)};
}

}  // namespace detail

/// pi = 16 arctan(1/5) - 4 arctan(1/239), enclosed to about `bits` bits.
inline Interval pi(long bits) {
  Interval a = detail::arctan_inverse(5, bits + 8);
  Interval b = detail::arctan_inverse(239, bits + 8);
  return Interval(Rational(16)) * a - Interval(Rational(4)) * b;
}

/// Parses "2^-37", "2^5", "3/8", "0.125", "1e-3", "7". Decimal forms are
/// read exactly.
inline Rational parse_rational(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  if (s.empty()) throw std::invalid_argument("parse_rational: empty value");
  try {
    if (auto caret = s.find('^'); caret != std::string::npos) {
      const std::string base = s.substr(0, caret);
      const long e = std::stol(s.substr(caret + 1));
      Rational b = parse_rational(base);
      Rational out = 1;
      if (b == 2) return pow2(e);
      for (long i = 0; i < std::labs(e); ++i) out *= b;
      return e >= 0 ? out : Rational(1) / out;
    }
    if (auto slash = s.find('/'); slash != std::string::npos) {
      Rational a = parse_rational(s.substr(0, slash));
      Rational b = parse_rational(s.substr(slash + 1));
      if (b == 0) throw std::invalid_argument("zero denominator");
      return a / b;
    }
    long exponent = 0;
    std::string mant = s;
    if (auto e = s.find_first_of("eE"); e != std::string::npos) {
      exponent = std::stol(s.substr(e + 1));
      mant = s.substr(0, e);
    }
    bool negative = false;
    if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
      negative = mant[0] == '-';
      mant.erase(0, 1);
    }
    std::string digits;
    long frac = 0;
    bool seen_point = false;
    for (char ch : mant) {
      if (ch == '.') {
        if (seen_point) throw std::invalid_argument("two decimal points");
        seen_point = true;
      } else if (std::isdigit(static_cast<unsigned char>(ch))) {
        digits += ch;
        if (seen_point) ++frac;
      } else {
        throw std::invalid_argument("unexpected character");
      }
    }
    if (digits.empty()) throw std::invalid_argument("no digits");
    // cpp_int reads a leading 0 as an octal prefix.
    digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
    Rational value{BigInt(digits)};
    const long shift = exponent - frac;
    BigInt ten = 1;
    for (long i = 0; i < std::labs(shift); ++i) ten *= 10;
    value = shift >= 0 ? value * Rational(ten) : value / Rational(ten);
    return negative ? -value : value;
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("cannot parse rational '" + text + "': " + e.what());
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("cannot parse rational '" + text + "': exponent out of range");
  }
}

/// "2^-k" when q is a power of two, otherwise "a/b".
inline std::string format_rational(const Rational& q) {
  const BigInt n = numer(q);
  const BigInt d = denom(q);
  auto power_of_two = [](const BigInt& v) { return v > 0 && (v & (v - 1)) == 0; };
  if (n == 1 && power_of_two(d)) return "2^-" + std::to_string(bit_length(d) - 1);
  if (d == 1 && power_of_two(n)) return "2^" + std::to_string(bit_length(n) - 1);
  return q.str();
}

}  // namespace dvlab::exact
