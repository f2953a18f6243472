#pragma once

// Two-dimensional subspaces in amplitude/phase form, x(theta)_i =
// r_i sin(theta + phi_i), and the probes run on them: Euclidean constant,
// norm of the orthogonal projection, worst goodness over the circle, the
// large-amplitude coordinate set E, typical parameters and sign-pattern nets.

#include <boost/math/constants/constants.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dvlab/norm.hpp"
#include "dvlab/opnorm.hpp"

namespace dvlab {

inline constexpr double kPi = boost::math::constants::pi<double>();
inline constexpr double kTwoPi = boost::math::constants::two_pi<double>();

/// Orthonormal pair (u, v) with x(theta) = u sin(theta) + v cos(theta).
class TwoDSubspace {
 public:
  TwoDSubspace(Vector u, Vector v) : u_(std::move(u)), v_(std::move(v)) {
    const Eigen::Index n = u_.size();
    r_.resize(n);
    phi_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      r_(i) = std::hypot(u_(i), v_(i));
      double p = std::atan2(v_(i), u_(i));
      if (p < 0) p += kTwoPi;
      if (p >= kTwoPi) p -= kTwoPi;
      phi_(i) = p;
    }
  }

  int n() const { return static_cast<int>(u_.size()); }
  const Vector& u() const { return u_; }
  const Vector& v() const { return v_; }
  const Vector& r() const { return r_; }
  const Vector& phi() const { return phi_; }

  Vector point(double theta) const { return std::sin(theta) * u_ + std::cos(theta) * v_; }
  /// Same point from the amplitude/phase form.
  Vector point_from_phases(double theta) const {
    Vector x(n());
    for (int i = 0; i < n(); ++i) x(i) = r_(i) * std::sin(theta + phi_(i));
    return x;
  }
  Matrix frame() const {
    Matrix f(n(), 2);
    f.col(0) = u_;
    f.col(1) = v_;
    return f;
  }

 private:
  Vector u_, v_, r_, phi_;
};

/// Builds the subspace spanned by u and v, re-orthonormalizing when the pair is
/// not orthonormal to 1e-10.
inline TwoDSubspace make_subspace(Vector u, Vector v) {
  if (u.size() != v.size() || u.size() < 2) throw std::domain_error("make_subspace: need two vectors of equal length >= 2");
  const double orth = std::abs(u.dot(v));
  if (std::abs(u.norm() - 1.0) > kStructuralTol || std::abs(v.norm() - 1.0) > kStructuralTol || orth > kStructuralTol) {
    const double nu = u.norm();
    if (nu == 0.0) throw std::domain_error("make_subspace: u is zero");
    u /= nu;
    v -= u.dot(v) * u;
    const double nv = v.norm();
    if (nv <= 1e-12 * std::max(1.0, nu)) throw std::domain_error("make_subspace: u and v are linearly dependent");
    v /= nv;
  }
  return TwoDSubspace(std::move(u), std::move(v));
}

/// Haar-random 2-D subspace of R^n.
inline TwoDSubspace random_subspace(int n, Seed seed) {
  Matrix f = random_frame(n, 2, seed);
  return TwoDSubspace(f.col(0), f.col(1));
}

/// Haar-random 2-D subspace of the range of `basis` (orthonormal columns).
inline TwoDSubspace random_subspace_within(const Matrix& basis, Seed seed) {
  if (basis.cols() < 2) throw std::domain_error("random_subspace_within: need a basis of dimension >= 2");
  Matrix c = random_frame(static_cast<int>(basis.cols()), 2, seed);
  Matrix f = basis * c;
  return make_subspace(f.col(0), f.col(1));
}

inline double grid_step(int grid_size) { return kPi / grid_size; }

struct EuclideanConstant {
  double ratio = 1.0;        // max/min of ||x(theta)|| on the grid
  double ratio_upper = 1.0;  // certified upper bound for the true ratio
  double scale_t = 0.0;      // min ||x(theta)|| on the grid
  double max_norm = 0.0;
  double enclosure = 0.0;    // ratio_upper - ratio
};

/// Euclidean constant of Y from a uniform grid of `grid_size` points on
/// [0, pi) (the norm is even). The Lipschitz bound
/// | ||x(a)|| - ||x(b)|| | <= (sqrt2 + eta)|a - b| turns the grid extremes into
/// a two-sided enclosure of the true ratio.
inline EuclideanConstant euclidean_constant(const NormSpec& spec, const TwoDSubspace& Y, int grid_size = 2048) {
  if (grid_size < 64) throw std::domain_error("euclidean_constant: grid_size must be >= 64");
  if (Y.n() != spec.n()) throw std::domain_error("euclidean_constant: dimension mismatch");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  const double h = grid_step(grid_size);
  for (int j = 0; j < grid_size; ++j) {
    const double v = norm(spec, Y.point(j * h));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EuclideanConstant out;
  out.ratio = hi / lo;
  out.scale_t = lo;
  out.max_norm = hi;
  const double slack = 0.5 * spec.distortion() * h;
  out.ratio_upper = lo > slack ? (hi + slack) / (lo - slack) : std::numeric_limits<double>::infinity();
  out.enclosure = out.ratio_upper - out.ratio;
  return out;
}

struct WorstGoodness {
  double theta_star = 0.0;
  double deficiency = 0.0;  // max over the grid (raw, unclamped)
  double enclosure = 0.0;   // true max lies in [deficiency, deficiency + enclosure]
  int solver_failures = 0;
  std::vector<double> profile;  // deficiency at each grid point
};

/// Largest goodness deficiency over `grid_size` points of [0, pi). The
/// deficiency is 2(sqrt2 + eta)-Lipschitz in theta, which gives the enclosure.
inline WorstGoodness worst_goodness(const NormSpec& spec, const TwoDSubspace& Y, int grid_size = 1024) {
  if (grid_size < 256) throw std::domain_error("worst_goodness: grid_size must be >= 256");
  if (Y.n() != spec.n()) throw std::domain_error("worst_goodness: dimension mismatch");
  WorstGoodness out;
  out.deficiency = -std::numeric_limits<double>::infinity();
  out.profile.resize(grid_size);
  const double h = grid_step(grid_size);
  for (int j = 0; j < grid_size; ++j) {
    const double theta = j * h;
    double d;
    try {
      d = goodness(spec, Y.point(theta)).raw_deficiency;
    } catch (const NonConvergence& e) {
      ++out.solver_failures;
      d = norm(spec, Y.point(theta)) * e.lower() - 1.0;
    }
    out.profile[j] = d;
    if (d > out.deficiency) {
      out.deficiency = d;
      out.theta_star = theta;
    }
  }
  out.enclosure = spec.distortion() * h;
  return out;
}

struct ProjectionNorm {
  double value = 1.0;       // best lower estimate of ||P_Y||
  double grid_value = 1.0;  // from the per-direction dual formula
  double ascent_value = 1.0;
  Vector argmax;
};

/// ||P_Y|| for the Euclidean-orthogonal projection onto Y.
///
/// For a direction x = x(theta) with in-plane normal x' = x(theta + pi/2), the
/// vectors y with P_Y y parallel to x are those orthogonal to x', and
///   sup_{<x',y>=0} ||P_Y y|| / ||y|| = ||x|| min_s ||x + s x'||*.
/// Maximizing this over a theta-grid (then Brent-refining theta) gives a
/// candidate that seeds a multistart ascent of ||P_Y y||/||y||.
inline ProjectionNorm projection_op_norm(const NormSpec& spec, const TwoDSubspace& Y, Seed seed, int grid_size = 32,
                                         int random_starts = 8) {
  if (Y.n() != spec.n()) throw std::domain_error("projection_op_norm: dimension mismatch");
  const double reach = spec.distortion();
  struct Direction {
    double value;
    double s;
  };
  auto direction_value = [&](double theta) -> Direction {
    const Vector x = Y.point(theta);
    const Vector xp = Y.point(theta + 0.5 * kPi);
    auto f = [&](double s) { return dual_norm(spec, Vector(x + s * xp), 1e-9).value; };
    std::uintmax_t iters = 100;
    auto [s, m] = boost::math::tools::brent_find_minima(f, -reach, reach, 40, iters);
    return {norm(spec, x) * m, s};
  };

  const double h = grid_step(grid_size);
  double best_theta = 0.0;
  Direction best{-1.0, 0.0};
  for (int j = 0; j < grid_size; ++j) {
    Direction d = direction_value(j * h);
    if (d.value > best.value) {
      best = d;
      best_theta = j * h;
    }
  }
  {
    auto neg = [&](double t) { return -direction_value(t).value; };
    std::uintmax_t iters = 60;
    auto [t, v] = boost::math::tools::brent_find_minima(neg, best_theta - h, best_theta + h, 30, iters);
    if (-v > best.value) {
      best = direction_value(t);
      best_theta = t;
    }
  }

  const Matrix f = Y.frame();
  LinearMap T = [f](const Vector& y) -> Vector { return f * (f.transpose() * y); };
  const Vector x = Y.point(best_theta);
  const Vector xp = Y.point(best_theta + 0.5 * kPi);
  const Vector hint = dual_norm(spec, Vector(x + best.s * xp), 1e-9).maximizer;
  AscentOptions opt;
  opt.starts = random_starts;
  OpNormEstimate ascent = estimate_operator_norm(spec, T, seed, {hint, x}, opt);

  ProjectionNorm out;
  out.grid_value = best.value;
  out.ascent_value = ascent.value;
  out.value = std::max(best.value, ascent.value);
  out.argmax = ascent.argmax;
  return out;
}

/// E = { i : r_i >= alpha n^{-1/2} }.
inline std::vector<int> e_set(const TwoDSubspace& Y, double alpha) {
  if (!(alpha > 0.0)) throw std::domain_error("e_set: alpha must be positive");
  const double threshold = alpha / std::sqrt(static_cast<double>(Y.n()));
  std::vector<int> out;
  for (int i = 0; i < Y.n(); ++i)
    if (Y.r()(i) >= threshold) out.push_back(i);
  return out;
}

/// Coordinate projection onto an index set.
inline Vector restrict_to(const Vector& x, const std::vector<int>& idx) {
  Vector out = Vector::Zero(x.size());
  for (int i : idx) out(i) = x(i);
  return out;
}

/// Whether theta + phi is an exact multiple of pi, i.e. the coordinate
/// vanishes. Exact floating comparisons; no tolerance.
inline bool phase_hits_zero(double theta, double phi) {
  const double s = theta + phi;
  return std::remainder(s, kPi) == 0.0 || std::sin(s) == 0.0;
}

/// theta is typical when (i) fewer than c|E| indices of E have
/// |x(theta)_i| < xi n^{-1/2}, and (ii) no index of E has x(theta)_i = 0.
inline bool typical_check(const TwoDSubspace& Y, double theta, double xi, double c, double alpha) {
  if (!(xi >= 0.0) || !(c > 0.0 && c < 1.0)) throw std::domain_error("typical_check: need xi >= 0 and 0 < c < 1");
  const std::vector<int> E = e_set(Y, alpha);
  const double small = xi / std::sqrt(static_cast<double>(Y.n()));
  int count = 0;
  for (int i : E) {
    if (phase_hits_zero(theta, Y.phi()(i))) return false;
    if (std::abs(Y.r()(i) * std::sin(theta + Y.phi()(i))) < small) ++count;
  }
  return count < c * static_cast<double>(E.size());
}

struct SignSetAnalysis {
  std::vector<Vector> samples;      // distinct n^{-1/2} P_E sign(x(theta)) over typical grid theta
  std::vector<double> sample_theta; // first grid theta producing each sample
  std::vector<Vector> V;            // centrally symmetric beta-separated subset: V[2j+1] = -V[2j]
  int k = 0;                        // number of antipodal pairs in V
  double kappa = 0.0;               // max distance from a sample to V
  double beta = 0.0;
  std::vector<int> E;
  std::vector<int> phase_order;     // E sorted by phase
  int typical_points = 0;
  int grid_size = 0;
  bool typical_exists_condition = true;  // xi < alpha c
};

inline double distance_to_set(const Vector& x, const std::vector<Vector>& set) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : set) best = std::min(best, (x - v).norm());
  return best;
}

/// Samples the sign set over a uniform grid of [0, 2pi) and extracts a
/// maximal centrally symmetric beta-separated subset greedily.
inline SignSetAnalysis sigma_set(const TwoDSubspace& Y, double alpha, double xi, double c, double beta,
                                 int grid_size = 2048) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::domain_error("sigma_set: beta must lie in (0, 1]");
  SignSetAnalysis out;
  out.beta = beta;
  out.grid_size = grid_size;
  out.E = e_set(Y, alpha);
  out.phase_order = out.E;
  std::stable_sort(out.phase_order.begin(), out.phase_order.end(),
                   [&](int a, int b) { return Y.phi()(a) < Y.phi()(b); });
  out.typical_exists_condition = xi < alpha * c;
  const double scale = 1.0 / std::sqrt(static_cast<double>(Y.n()));
  std::map<std::vector<signed char>, int> seen;
  for (int j = 0; j < grid_size; ++j) {
    const double theta = kTwoPi * j / grid_size;
    if (!typical_check(Y, theta, xi, c, alpha)) continue;
    ++out.typical_points;
    std::vector<signed char> pattern;
    pattern.reserve(out.E.size());
    Vector s = Vector::Zero(Y.n());
    for (int i : out.E) {
      const double xi_val = std::sin(theta + Y.phi()(i));
      const signed char sg = xi_val > 0 ? 1 : -1;
      pattern.push_back(sg);
      s(i) = sg * scale;
    }
    if (seen.emplace(pattern, static_cast<int>(out.samples.size())).second) {
      out.samples.push_back(s);
      out.sample_theta.push_back(theta);
    }
  }
  for (const auto& s : out.samples) {
    if (distance_to_set(s, out.V) >= beta) {
      out.V.push_back(s);
      out.V.push_back(-s);
    }
  }
  out.k = static_cast<int>(out.V.size() / 2);
  for (const auto& s : out.samples) out.kappa = std::max(out.kappa, distance_to_set(s, out.V));
  return out;
}

struct PrunedNet {
  std::vector<Vector> representatives;  // one member per antipodal pair
  double kappa_nominal = 0.0;           // beta * 4^removals
  double kappa_measured = 0.0;          // actual net radius over the samples
  double separation = 0.0;              // min over pairs of min(|a-b|, |a+b|)
  int removals = 0;
  bool reduced_to_single_pair = false;
};

/// Case-2 pruning: while the pairs are not 3 kappa-separated, drop the later
/// member of the closest pair and grow kappa by a factor 4 (so kappa runs
/// beta, 4 beta, 16 beta, 64 beta). At most three removals.
inline PrunedNet prune_cascade(const SignSetAnalysis& a) {
  PrunedNet out;
  for (std::size_t j = 0; j < a.V.size(); j += 2) out.representatives.push_back(a.V[j]);
  out.kappa_nominal = a.beta;
  auto pair_distance = [](const Vector& p, const Vector& q) { return std::min((p - q).norm(), (p + q).norm()); };
  while (out.representatives.size() >= 2) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t drop = 0;
    for (std::size_t i = 0; i < out.representatives.size(); ++i)
      for (std::size_t j = i + 1; j < out.representatives.size(); ++j) {
        double d = pair_distance(out.representatives[i], out.representatives[j]);
        if (d < best) {
          best = d;
          drop = j;
        }
      }
    out.separation = best;
    if (best >= 3.0 * out.kappa_nominal || out.removals == 3) break;
    out.representatives.erase(out.representatives.begin() + static_cast<std::ptrdiff_t>(drop));
    out.kappa_nominal *= 4.0;
    ++out.removals;
  }
  out.reduced_to_single_pair = out.representatives.size() == 1;
  std::vector<Vector> full;
  for (const auto& r : out.representatives) {
    full.push_back(r);
    full.push_back(-r);
  }
  for (const auto& s : a.samples) out.kappa_measured = std::max(out.kappa_measured, distance_to_set(s, full));
  return out;
}

struct SignDecomposition {
  Vector x;
  Vector y;               // point whose signs are used (x by default)
  double lambda = 0.0;    // least-squares multiplier in lambda y - A y/||y||_A ~ eta n^{-1/2} sign(y)
  double alpha_y = 0.0;   // eta^{-1}(lambda - 2/||y||_A)
  double beta_y = 0.0;    // eta^{-1}(lambda - 1/||y||_A)
  double ls_alpha = 0.0;  // best coefficients in n^{-1/2} sign(y) ~ a P y + b Q y
  double ls_beta = 0.0;
  double pair_residual = 0.0;    // distance of eta n^{-1/2} sign(y) to span{Py, Qy}
  double residual = 0.0;         // distance of eta n^{-1/2} sign(y) to PY + QY
  double lambda_residual = 0.0;  // |lambda y - A y/||y||_A - eta n^{-1/2} sign(y)|
};

/// Least-squares residual of `target` against the columns of `m` (minimum-norm
/// solution, so rank-deficient columns are handled).
inline std::pair<Vector, double> least_squares(const Matrix& m, const Vector& target) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(m);
  Vector coeff = cod.solve(target);
  return {coeff, (target - m * coeff).norm()};
}

inline SignDecomposition sign_decomposition(const NormSpec& spec, const TwoDSubspace& Y, const Vector& x,
                                            const std::optional<Vector>& nearby = std::nullopt) {
  check_dim(spec, x, "sign_decomposition");
  if (std::abs(x.norm() - 1.0) > kStructuralTol) throw std::domain_error("sign_decomposition: x must be a unit vector");
  if (distance_to_subspace(x, Y.frame()) > 1e-8) throw std::domain_error("sign_decomposition: x must lie in Y");
  SignDecomposition out;
  out.x = x;
  out.y = nearby.value_or(x);
  const Vector& y = out.y;
  const double eta = spec.eta();
  const Vector target = spec.l1_weight() * default_sign(y);

  Matrix pair(spec.n(), 2);
  pair.col(0) = spec.P() * y;
  pair.col(1) = spec.Q() * y;
  auto [ab, pair_res] = least_squares(pair, target);
  out.pair_residual = pair_res;
  if (eta > 0.0) {
    out.ls_alpha = ab(0) / eta;
    out.ls_beta = ab(1) / eta;
  }

  Matrix four(spec.n(), 4);
  four.col(0) = spec.P() * Y.u();
  four.col(1) = spec.P() * Y.v();
  four.col(2) = spec.Q() * Y.u();
  four.col(3) = spec.Q() * Y.v();
  out.residual = least_squares(four, target).second;

  const double na = norm_A(spec, y);
  const Vector ay = spec.apply_A(y) / na;
  out.lambda = y.dot(target + ay) / y.squaredNorm();
  out.lambda_residual = (out.lambda * y - ay - target).norm();
  if (eta > 0.0) {
    out.alpha_y = (out.lambda - 2.0 / na) / eta;
    out.beta_y = (out.lambda - 1.0 / na) / eta;
  }
  return out;
}

struct EigenspaceDistances {
  double to_P = 0.0;  // d(x, PX) = |Qx|
  double to_Q = 0.0;  // d(x, QX) = |Px|
};

inline EigenspaceDistances closeness_to_eigenspaces(const NormSpec& spec, const Vector& x) {
  check_dim(spec, x, "closeness_to_eigenspaces");
  if (std::abs(x.norm() - 1.0) > kStructuralTol) throw std::domain_error("closeness_to_eigenspaces: x must be a unit vector");
  return {(spec.Q() * x).norm(), (spec.P() * x).norm()};
}

struct SubspaceReport {
  double euclidean_ratio = 1.0;
  double euclidean_ratio_upper = 1.0;
  double scale_t = 0.0;
  std::optional<double> proj_op_norm;
  double worst_goodness = 0.0;
  double theta_star = 0.0;
  double goodness_enclosure = 0.0;
  std::vector<int> E;
  int grid_resolution = 0;
  int solver_failures = 0;
};

struct ProbeOptions {
  int grid_size = 1024;
  bool projection_norm = false;
  int projection_grid = 16;
  double alpha = 0.25;
};

inline SubspaceReport probe_subspace(const NormSpec& spec, const TwoDSubspace& Y, Seed seed, const ProbeOptions& opt = {}) {
  SubspaceReport rep;
  const EuclideanConstant ec = euclidean_constant(spec, Y, std::max(64, opt.grid_size));
  rep.euclidean_ratio = ec.ratio;
  rep.euclidean_ratio_upper = ec.ratio_upper;
  rep.scale_t = ec.scale_t;
  const WorstGoodness wg = worst_goodness(spec, Y, opt.grid_size);
  rep.worst_goodness = wg.deficiency;
  rep.theta_star = wg.theta_star;
  rep.goodness_enclosure = wg.enclosure;
  rep.solver_failures = wg.solver_failures;
  rep.E = e_set(Y, opt.alpha);
  rep.grid_resolution = opt.grid_size;
  if (opt.projection_norm) rep.proj_op_norm = projection_op_norm(spec, Y, seed, opt.projection_grid).value;
  return rep;
}

}  // namespace dvlab
