#pragma once

// The norm ||x|| = <x,(I+P)x>^{1/2} + eta n^{-1/2} ||x||_1, its dual norm,
// support functionals and the goodness deficiency of a point.

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "dvlab/linalg.hpp"

namespace dvlab {

/// Immutable norm description. `proj` houses A = I + P.
class NormSpec {
 public:
  NormSpec(ProjectionPair proj, double eta) : proj_(std::move(proj)), eta_(eta) {
    if (!(eta_ >= 0.0) || !std::isfinite(eta_)) throw std::domain_error("NormSpec: eta must be finite and >= 0");
    if (proj_.dim() < 1) throw std::domain_error("NormSpec: empty projection");
  }

  int n() const { return proj_.dim(); }
  double eta() const { return eta_; }
  /// Weight of the l1 term, eta / sqrt(n).
  double l1_weight() const { return eta_ / std::sqrt(static_cast<double>(n())); }
  /// Upper Euclidean distortion: |x| <= ||x|| <= C |x|.
  double distortion() const { return std::sqrt(2.0) + eta_; }
  /// Whether the sandwich gives distortion at most 2.
  bool strongly_two_euclidean() const { return eta_ <= 2.0 - std::sqrt(2.0); }

  const ProjectionPair& projection() const { return proj_; }
  const Matrix& P() const { return proj_.P; }
  const Matrix& Q() const { return proj_.Q; }

  Vector apply_P(const Vector& x) const { return proj_.P * x; }
  /// A x = x + P x.
  Vector apply_A(const Vector& x) const { return x + proj_.P * x; }
  /// A^{-1} x = x - P x / 2.
  Vector apply_A_inverse(const Vector& x) const { return x - 0.5 * (proj_.P * x); }

 private:
  ProjectionPair proj_;
  double eta_;
};

inline void check_dim(const NormSpec& spec, const Vector& x, const char* where) {
  if (x.size() != spec.n())
    throw std::domain_error(std::string(where) + ": dimension mismatch (" + std::to_string(x.size()) + " vs " +
                            std::to_string(spec.n()) + ")");
}

/// Quadratic part <x, A x>^{1/2}.
inline double norm_A(const NormSpec& spec, const Vector& x) {
  check_dim(spec, x, "norm_A");
  return std::sqrt(std::max(0.0, x.dot(spec.apply_A(x))));
}

inline double norm(const NormSpec& spec, const Vector& x) {
  check_dim(spec, x, "norm");
  return std::sqrt(std::max(0.0, x.dot(spec.apply_A(x)))) + spec.l1_weight() * x.lpNorm<1>();
}

/// Dual of the quadratic part: <z, A^{-1} z>^{1/2}.
inline double dual_norm_A(const NormSpec& spec, const Vector& z) {
  return std::sqrt(std::max(0.0, z.dot(spec.apply_A_inverse(z))));
}

/// Thrown when the dual-norm solve cannot close its duality gap.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double lower, double upper)
      : std::runtime_error(what), lower_(lower), upper_(upper) {}
  double lower() const { return lower_; }
  double upper() const { return upper_; }

 private:
  double lower_;
  double upper_;
};

struct DualNormResult {
  double value = 0.0;   // attained by `maximizer`
  double upper = 0.0;   // certified upper bound from the dual decomposition
  Vector maximizer;     // ||maximizer|| = 1
  int iterations = 0;   // inner projected-gradient steps
};

namespace detail {

/// Minimizes (z - w)^T A^{-1} (z - w) over the box |w_i| <= bound by projected
/// gradient with step 1/L. A^{-1} has spectrum in {1/2, 1}, so the iteration
/// contracts by at least 1/2 per step. Returns the minimal A^{-1}-distance.
inline double box_distance(const NormSpec& spec, const Vector& z, double bound, Vector& w, int& steps) {
  const double lipschitz = spec.projection().rank == spec.n() ? 0.5 : 1.0;
  const double step = 1.0 / lipschitz;
  const double scale = std::max(1.0, z.cwiseAbs().maxCoeff());
  w = w.cwiseMax(-bound).cwiseMin(bound);
  for (int it = 0; it < 200; ++it) {
    Vector next = (w + step * spec.apply_A_inverse(z - w)).cwiseMax(-bound).cwiseMin(bound);
    double change = (next - w).cwiseAbs().maxCoeff();
    w.swap(next);
    ++steps;
    if (change <= 1e-17 * scale) break;
  }
  return dual_norm_A(spec, z - w);
}

}  // namespace detail

/// sup{ <z, y> : ||y|| <= 1 }.
///
/// The dual of a sum of norms is the infimal max-convolution of the duals:
///   ||z||* = min_{z = z1 + z2} max(<z1, A^{-1} z1>^{1/2}, ||z2||_inf / w),
/// with w = eta n^{-1/2}. For fixed level s the inner problem is a box-constrained
/// quadratic; the level solving g(s) = s is found by bracketed root finding. The
/// primal maximizer is recovered as A^{-1} z1 and its ratio <z,y>/||y|| is the
/// returned value, so the gap to the dual bound is a certificate.
inline DualNormResult dual_norm(const NormSpec& spec, const Vector& z, double tol = 1e-10) {
  check_dim(spec, z, "dual_norm");
  if (z.norm() == 0.0) throw std::domain_error("dual_norm: z must be nonzero");
  DualNormResult out;
  const double w = spec.l1_weight();

  auto ratio = [&](const Vector& y) { return z.dot(y) / norm(spec, y); };

  if (w == 0.0) {
    Vector y = spec.apply_A_inverse(z);
    out.upper = dual_norm_A(spec, z);
    out.maximizer = y / norm(spec, y);
    out.value = std::min(out.upper, ratio(out.maximizer));
    return out;
  }

  Vector z2 = Vector::Zero(z.size());
  int steps = 0;
  auto gap_at = [&](double s) { return detail::box_distance(spec, z, w * s, z2, steps) - s; };

  const double s_hi = std::min(dual_norm_A(spec, z), z.cwiseAbs().maxCoeff() / w);
  double s_star = s_hi;
  if (gap_at(s_hi) < 0.0) {
    std::uintmax_t max_iter = 200;
    boost::math::tools::eps_tolerance<double> stop(50);
    auto bracket = boost::math::tools::toms748_solve(gap_at, 0.0, s_hi, dual_norm_A(spec, z), gap_at(s_hi), stop, max_iter);
    s_star = bracket.second;
  }
  detail::box_distance(spec, z, w * s_star, z2, steps);
  const Vector z1 = z - z2;
  out.upper = std::max(dual_norm_A(spec, z1), z2.cwiseAbs().maxCoeff() / w);
  Vector y = spec.apply_A_inverse(z1);
  out.maximizer = y / norm(spec, y);
  out.value = ratio(out.maximizer);
  out.iterations = steps;
  if (out.upper - out.value > tol * std::max(1.0, out.upper)) {
    throw NonConvergence("dual_norm: duality gap " + std::to_string(out.upper - out.value) + " exceeds tolerance",
                         out.value, out.upper);
  }
  out.value = std::min(out.value, out.upper);
  return out;
}

/// Multivalued sign with the midpoint choice 0 at zero coordinates.
inline Vector default_sign(const Vector& x) {
  Vector s(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) s(i) = x(i) > 0 ? 1.0 : (x(i) < 0 ? -1.0 : 0.0);
  return s;
}

/// Whether `sign_choice` is a legal value of sign(x).
inline bool is_sign_choice(const Vector& x, const Vector& sign_choice) {
  if (sign_choice.size() != x.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) > 0 && sign_choice(i) != 1.0) return false;
    if (x(i) < 0 && sign_choice(i) != -1.0) return false;
    if (x(i) == 0 && !(sign_choice(i) >= -1.0 && sign_choice(i) <= 1.0)) return false;
  }
  return true;
}

struct SupportFunctional {
  Vector f;            // the functional, as a vector
  Vector base;         // the point it supports
  Vector sign_choice;  // value of sign(base) used
};

/// f = A x / ||x||_A + eta n^{-1/2} sign_choice.
inline SupportFunctional support_functional(const NormSpec& spec, const Vector& x, const Vector& sign_choice) {
  check_dim(spec, x, "support_functional");
  if (x.norm() == 0.0) throw std::domain_error("support_functional: x must be nonzero");
  if (!is_sign_choice(x, sign_choice)) throw std::domain_error("support_functional: sign_choice is not a value of sign(x)");
  SupportFunctional out;
  out.f = spec.apply_A(x) / norm_A(spec, x) + spec.l1_weight() * sign_choice;
  out.base = x;
  out.sign_choice = sign_choice;
  return out;
}

inline SupportFunctional support_functional(const NormSpec& spec, const Vector& x) {
  return support_functional(spec, x, default_sign(x));
}

/// ||f||* ||x|| - <f, x>: zero for a support functional.
inline double support_gap(const NormSpec& spec, const SupportFunctional& s, double tol = 1e-12) {
  return dual_norm(spec, s.f, tol).value * norm(spec, s.base) - s.f.dot(s.base);
}

inline constexpr double kGoodnessTol = 1e-7;

struct GoodnessCertificate {
  Vector x;
  double deficiency = 0.0;        // ||P_x||_op - 1, reported as 0 below tol
  double raw_deficiency = 0.0;    // value before the below-tolerance clamp
  double upper_deficiency = 0.0;  // from the dual bound
  Vector witness;                 // y attaining 1 + raw_deficiency
  double tol = kGoodnessTol;
};

/// Goodness deficiency ||x'|| ||x'||* - 1 of x' = x/|x|, i.e. the amount by
/// which the rank-one orthogonal projection onto x exceeds norm 1.
inline GoodnessCertificate goodness(const NormSpec& spec, const Vector& x, double tol = kGoodnessTol) {
  check_dim(spec, x, "goodness");
  const double len = x.norm();
  if (len == 0.0) throw std::domain_error("goodness: x must be nonzero");
  const Vector unit = x / len;
  const double primal = norm(spec, unit);
  const DualNormResult dual = dual_norm(spec, unit, std::min(1e-10, tol));
  GoodnessCertificate out;
  out.x = x;
  out.raw_deficiency = primal * dual.value - 1.0;
  out.upper_deficiency = primal * dual.upper - 1.0;
  out.deficiency = out.raw_deficiency < tol ? 0.0 : out.raw_deficiency;
  out.witness = dual.maximizer;
  out.tol = tol;
  return out;
}

/// Ratio <x,y> ||x|| / (|x|^2 ||y||): the quantity bounded by 1 + eps in the
/// definition of an eps-good point.
inline double goodness_ratio(const NormSpec& spec, const Vector& x, const Vector& y) {
  return x.dot(y) * norm(spec, x) / (x.squaredNorm() * norm(spec, y));
}

}  // namespace dvlab
