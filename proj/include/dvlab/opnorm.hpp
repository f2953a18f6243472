#pragma once

// Direct maximization of ||T y|| / ||y|| over the sphere. This is the primal
// route: it never touches the dual decomposition in norm.hpp, so it serves as
// an independent estimate of operator norms and of rank-one dual norms.

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "dvlab/norm.hpp"

namespace dvlab {

struct AscentOptions {
  int starts = 16;
  int max_iterations = 400;
  double armijo = 1e-4;
  double min_step = 1e-14;
};

struct OpNormEstimate {
  double value = 0.0;
  Vector argmax;
  int starts = 0;
};

/// Any subgradient of the norm at v (midpoint sign at zero coordinates).
inline Vector norm_subgradient(const NormSpec& spec, const Vector& v) {
  const double a = norm_A(spec, v);
  Vector g = spec.l1_weight() * default_sign(v);
  if (a > 0.0) g += spec.apply_A(v) / a;
  return g;
}

using LinearMap = std::function<Vector(const Vector&)>;

namespace detail {

/// Riemannian (sub)gradient ascent of ||T y|| / ||y|| on the unit sphere with
/// Armijo backtracking. T must be self-adjoint for the Euclidean inner product.
inline OpNormEstimate ascend(const NormSpec& spec, const LinearMap& T, Vector y, const AscentOptions& opt) {
  auto objective = [&](const Vector& v) {
    const double d = norm(spec, v);
    return d > 0.0 ? norm(spec, T(v)) / d : 0.0;
  };
  y.normalize();
  double value = objective(y);
  double step = 0.5;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Vector ty = T(y);
    const double ny = norm(spec, y);
    const double nty = norm(spec, ty);
    if (nty == 0.0) break;
    Vector grad = T(norm_subgradient(spec, ty)) / ny - nty * norm_subgradient(spec, y) / (ny * ny);
    grad -= grad.dot(y) * y;
    const double g2 = grad.squaredNorm();
    if (g2 < 1e-30) break;
    bool moved = false;
    step = std::min(1.0, 4.0 * step);
    while (step >= opt.min_step) {
      Vector cand = (y + step * grad).normalized();
      double v = objective(cand);
      if (v >= value + opt.armijo * step * g2) {
        y = cand;
        value = v;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return {value, y, 1};
}

}  // namespace detail

/// Multistart ascent estimate of the operator norm of a self-adjoint map T on
/// (R^n, ||.||). Starts: the supplied hints followed by random sphere points.
inline OpNormEstimate estimate_operator_norm(const NormSpec& spec, const LinearMap& T, Seed seed,
                                             const std::vector<Vector>& hints = {}, AscentOptions opt = {}) {
  OpNormEstimate best;
  best.value = -1.0;
  Engine engine = make_engine(seed);
  const int total = static_cast<int>(hints.size()) + opt.starts;
  for (int s = 0; s < total; ++s) {
    Vector start = s < static_cast<int>(hints.size()) ? hints[s] : sample_unit_sphere(spec.n(), engine);
    if (start.norm() == 0.0) continue;
    OpNormEstimate e = detail::ascend(spec, T, start, opt);
    if (e.value > best.value) best = e;
  }
  best.starts = total;
  return best;
}

namespace detail {

/// Soft threshold v -> sign(v) max(|v| - t, 0).
inline Vector soft_threshold(const Vector& v, double t) {
  return v.cwiseSign().cwiseProduct((v.cwiseAbs().array() - t).max(0.0).matrix());
}

/// argmin 1/2 |y - v|^2 + t ||y||_1 subject to <z, y> = 1. The solution is
/// soft(v + nu z, t) with nu the root of a nondecreasing piecewise-linear
/// function, located exactly by scanning its sorted breakpoints.
inline Vector prox_l1_on_hyperplane(const Vector& v, const Vector& z, double t) {
  const Eigen::Index n = v.size();
  auto h = [&](double nu) { return z.dot(soft_threshold(v + nu * z, t)); };
  std::vector<double> breaks;
  breaks.reserve(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (z(i) == 0.0) continue;
    breaks.push_back((t - v(i)) / z(i));
    breaks.push_back((-t - v(i)) / z(i));
  }
  std::sort(breaks.begin(), breaks.end());
  // Segment [lo, hi] with h(lo) <= 1 <= h(hi); h is affine on it.
  auto first_ge = std::partition_point(breaks.begin(), breaks.end(), [&](double b) { return h(b) < 1.0; });
  double nu_ref;
  if (first_ge == breaks.end()) {
    nu_ref = breaks.empty() ? 0.0 : breaks.back() + 1.0;
  } else if (first_ge == breaks.begin()) {
    nu_ref = *first_ge - 1.0;
  } else {
    nu_ref = 0.5 * (*(first_ge - 1) + *first_ge);
  }
  // Solve the affine equation on the active set at nu_ref.
  const Vector shifted = v + nu_ref * z;
  double num = 1.0, den = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(shifted(i)) > t) {
      const double s = shifted(i) > 0 ? 1.0 : -1.0;
      num -= z(i) * (v(i) - t * s);
      den += z(i) * z(i);
    }
  }
  const double nu = den > 0.0 ? num / den : nu_ref;
  return soft_threshold(v + nu * z, t);
}

}  // namespace detail

/// Exact optimum of <z, y>/||y|| on the face fixed by the support and signs of
/// `start`: y_S = A_SS^{-1}(z_S - mu w s_S) with mu maximizing the ratio.
/// Returns `start` unchanged when the face solve does not improve it.
inline OpNormEstimate refine_on_face(const NormSpec& spec, const Vector& z, const Vector& start) {
  const int n = spec.n();
  const double w = spec.l1_weight();
  auto ratio = [&](const Vector& y) {
    const double d = norm(spec, y);
    return d > 0.0 ? z.dot(y) / d : -1.0;
  };
  OpNormEstimate best{ratio(start), start, 1};
  std::vector<int> support;
  for (int i = 0; i < n; ++i)
    if (start(i) != 0.0) support.push_back(i);
  if (support.empty()) return best;
  const int k = static_cast<int>(support.size());
  Matrix a_ss(k, k);
  Vector z_s(k), s_s(k);
  for (int r = 0; r < k; ++r) {
    z_s(r) = z(support[r]);
    s_s(r) = start(support[r]) > 0 ? 1.0 : -1.0;
    for (int c = 0; c < k; ++c) a_ss(r, c) = (r == c ? 1.0 : 0.0) + spec.P()(support[r], support[c]);
  }
  Eigen::LDLT<Matrix> ldlt(a_ss);
  const Vector base = ldlt.solve(z_s);
  const Vector tilt = ldlt.solve(s_s);
  auto embed = [&](double mu) {
    Vector y = Vector::Zero(n);
    const Vector ys = base - mu * w * tilt;
    for (int r = 0; r < k; ++r) y(support[r]) = ys(r);
    return y;
  };
  double mu = best.value;
  if (w > 0.0) {
    auto neg = [&](double m) { return -ratio(embed(m)); };
    std::uintmax_t iters = 200;
    mu = boost::math::tools::brent_find_minima(neg, 0.0, 2.0 * z.norm(), 52, iters).first;
    // The face optimum is the fixed point mu = ratio(y(mu)).
    for (int fp = 0; fp < 8; ++fp) {
      const double next = ratio(embed(mu));
      if (!(next > 0.0) || std::abs(next - mu) <= 1e-16 * mu) break;
      mu = next;
    }
  }
  Vector y = embed(mu);
  const double val = ratio(y);
  if (val > best.value) best = {val, y / norm(spec, y), 1};
  return best;
}

/// sup <z, y>/||y|| computed on the primal side only: minimize
/// ||y||_A + w ||y||_1 over the hyperplane <z, y> = 1 by accelerated proximal
/// gradient (||.||_A is smooth there with gradient Lipschitz constant at most
/// 2|z|), then solve the identified face exactly. The value is 1/min, and
/// every iterate is feasible, so the result is a lower bound on ||z||*.
inline OpNormEstimate primal_dual_ratio(const NormSpec& spec, const Vector& z, int max_iterations = 20000) {
  check_dim(spec, z, "primal_dual_ratio");
  const double w = spec.l1_weight();
  const double step = 1.0 / (2.0 * z.norm());
  auto objective = [&](const Vector& y) { return norm(spec, y); };

  Vector y = spec.apply_A_inverse(z);
  y /= z.dot(y);
  Vector momentum = y;
  double theta = 1.0;
  double f_prev = objective(y);
  bool restarted = false;
  for (int it = 0; it < max_iterations; ++it) {
    const Vector grad = spec.apply_A(momentum) / norm_A(spec, momentum);
    Vector next = detail::prox_l1_on_hyperplane(momentum - step * grad, z, step * w);
    const double f_next = objective(next);
    if (f_next > f_prev && !restarted) {
      // Adaptive restart: drop momentum and retry with a plain proximal step.
      theta = 1.0;
      momentum = y;
      restarted = true;
      continue;
    }
    restarted = false;
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    momentum = next + ((theta - 1.0) / theta_next) * (next - y);
    theta = theta_next;
    const double change = (next - y).norm();
    y = next;
    f_prev = f_next;
    if (change <= 1e-13 * y.norm()) break;
  }
  OpNormEstimate out{1.0 / objective(y), y / objective(y), 1};
  OpNormEstimate face = refine_on_face(spec, z, y);
  if (face.value > out.value) out = face;
  return out;
}

/// Direct estimate of ||P_x||_op = ||x'|| sup_y <x', y>/||y|| for x' = x/|x|:
/// proximal-gradient primal solve, cross-checked by multistart sphere ascent.
inline OpNormEstimate rank_one_operator_norm(const NormSpec& spec, const Vector& x, Seed seed, int starts = 4) {
  const Vector unit = x.normalized();
  const double scale = norm(spec, unit);
  OpNormEstimate primal = primal_dual_ratio(spec, unit);
  primal.value *= scale;
  LinearMap T = [&](const Vector& v) -> Vector { return unit.dot(v) * unit; };
  AscentOptions opt;
  opt.starts = starts;
  OpNormEstimate ascent = estimate_operator_norm(spec, T, seed, {primal.argmax}, opt);
  return ascent.value > primal.value ? ascent : primal;
}

}  // namespace dvlab
