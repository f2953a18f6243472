#pragma once

// Dense linear algebra shared by every other header: Haar-random projections,
// sphere sampling, distances to subspaces, principal angles, gamma-nets and the
// exact Beta-law oracle for sphere/subspace incidence.

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dvlab/rng.hpp"

namespace dvlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Structural identities (idempotency, orthonormality).
inline constexpr double kStructuralTol = 1e-10;
/// Spectral checks (trace, eigenvalues).
inline constexpr double kSpectralTol = 1e-8;

/// Rank used when the caller does not pick one: floor(n/2).
constexpr int default_rank(int n) { return n / 2; }

/// Orthogonal projection P onto a rank-`rank` subspace and its complement Q.
/// Q is stored as I - P; `basis` holds an orthonormal basis of range(P).
struct ProjectionPair {
  Matrix P;
  Matrix Q;
  Matrix basis;
  int rank = 0;

  int dim() const { return static_cast<int>(P.rows()); }

  double idempotency_error() const { return (P * P - P).norm(); }
  double symmetry_error() const { return (P - P.transpose()).norm(); }
};

/// Projection onto the span of an orthonormal basis. Used for hand-built
/// instances such as P = diag(1,1,0,0).
inline ProjectionPair projection_from_basis(const Matrix& basis, int n) {
  if (basis.rows() != n) throw std::domain_error("projection_from_basis: basis has wrong row count");
  ProjectionPair out;
  out.rank = static_cast<int>(basis.cols());
  out.basis = basis;
  if (out.rank == 0) {
    out.P = Matrix::Zero(n, n);
  } else {
    Matrix P = basis * basis.transpose();
    out.P = 0.5 * (P + P.transpose());
  }
  out.Q = Matrix::Identity(n, n) - out.P;
  return out;
}

/// P = 0 (and Q = I): the pure Euclidean case.
inline ProjectionPair zero_projection(int n) { return projection_from_basis(Matrix(n, 0), n); }

/// Coordinate projection onto the first `rank` axes.
inline ProjectionPair coordinate_projection(int n, int rank) {
  return projection_from_basis(Matrix::Identity(n, rank), n);
}

inline Matrix gaussian_matrix(int rows, int cols, Engine& engine) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) g(i, j) = normal(engine);
  return g;
}

/// Orthonormal basis of the column span of a full-column-rank matrix, with the
/// QR sign convention diag(R) > 0 so the result is Haar when `g` is Gaussian.
inline Matrix orthonormalize(const Matrix& g) {
  const int n = static_cast<int>(g.rows());
  const int k = static_cast<int>(g.cols());
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, k);
  const Matrix& r = qr.matrixQR();
  for (int j = 0; j < k; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

/// Haar-random orthonormal k-frame in R^n (as an n x k matrix).
inline Matrix random_frame(int n, int k, Seed seed) {
  if (k < 0 || k > n) throw std::domain_error("random_frame: need 0 <= k <= n");
  if (k == 0) return Matrix(n, 0);
  Engine engine = make_engine(seed);
  return orthonormalize(gaussian_matrix(n, k, engine));
}

/// Haar-random orthogonal projection of the given rank.
inline ProjectionPair sample_projection(int n, int rank, Seed seed) {
  if (n < 1) throw std::domain_error("sample_projection: n must be positive");
  if (rank < 1 || rank > n)
    throw std::domain_error("sample_projection: rank must lie in [1, n], got " + std::to_string(rank));
  if (rank == n) return projection_from_basis(Matrix::Identity(n, n), n);
  return projection_from_basis(random_frame(n, rank, seed), n);
}

/// Uniform point on S^{n-1} (normalized Gaussian).
inline Vector sample_unit_sphere(int n, Engine& engine) {
  if (n < 1) throw std::domain_error("sample_unit_sphere: n must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector x(n);
  double len = 0.0;
  do {
    for (int i = 0; i < n; ++i) x(i) = normal(engine);
    len = x.norm();
  } while (len == 0.0);
  x /= len;
  return x;
}

inline Vector sample_unit_sphere(int n, Seed seed) {
  Engine engine = make_engine(seed);
  return sample_unit_sphere(n, engine);
}

/// |x - W W^T x| for a frame W with orthonormal columns. An empty frame gives |x|.
inline double distance_to_subspace(const Vector& x, const Matrix& frame) {
  if (frame.cols() == 0) return x.norm();
  if (frame.rows() != x.size()) throw std::domain_error("distance_to_subspace: dimension mismatch");
  Vector coeff = frame.transpose() * x;
  return (x - frame * coeff).norm();
}

/// Largest deviation of W^T W from the identity.
inline double orthonormality_error(const Matrix& frame) {
  if (frame.cols() == 0) return 0.0;
  return (frame.transpose() * frame - Matrix::Identity(frame.cols(), frame.cols())).cwiseAbs().maxCoeff();
}

/// Sine of the smallest principal angle between span(a) and span(b), both given
/// by orthonormal columns. Equals min over unit x in span(b) of d(x, span(a)).
/// Computed from the residual b - a a^T b so that tiny angles keep full
/// absolute accuracy.
inline double smallest_principal_sine(const Matrix& a, const Matrix& b) {
  if (b.cols() == 0) return 1.0;
  if (a.cols() == 0) return 1.0;
  // Complementary dimensions force a common unit vector.
  if (a.cols() + b.cols() > a.rows()) return 0.0;
  Matrix residual = b - a * (a.transpose() * b);
  Eigen::JacobiSVD<Matrix> svd(residual);
  const auto& s = svd.singularValues();
  return s(s.size() - 1);
}

/// P[d(x, Y) <= gamma] for x uniform on S^{n-1} and any fixed m-dimensional Y.
/// The squared residual |Q_Y x|^2 is Beta((n-m)/2, m/2).
inline double subspace_incidence_probability(int n, int m, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::domain_error("subspace_incidence_probability: gamma must lie in [0,1]");
  if (m < 1 || m >= n) throw std::domain_error("subspace_incidence_probability: need 1 <= m < n");
  if (gamma == 0.0) return 0.0;
  if (gamma == 1.0) return 1.0;
  return boost::math::ibeta(0.5 * (n - m), 0.5 * m, gamma * gamma);
}

/// Result of a gamma-net construction on the unit sphere of span(frame).
struct GammaNet {
  std::vector<Vector> points;   // unit vectors in R^n
  std::size_t budget = 0;       // ceil((3/gamma)^m)
  bool within_budget = true;
  bool certified = false;       // every test point was within gamma of the net
  std::size_t test_points = 0;
  double worst_gap = 0.0;       // largest test-point distance to the net
};

namespace detail {

inline double nearest_distance(const std::vector<Vector>& net, const Vector& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : net) best = std::min(best, (q - p).norm());
  return best;
}

}  // namespace detail

/// Centrally symmetric gamma-net of the unit sphere of span(frame), built
/// greedily from random candidates and certified by a rejection test on
/// `test_points` fresh uniform points. A net that would exceed the
/// (3/gamma)^m budget is reported with within_budget = false.
inline GammaNet gamma_net(const Matrix& frame, double gamma, Seed seed, std::size_t test_points = 100000) {
  const int m = static_cast<int>(frame.cols());
  if (!(gamma > 0.0 && gamma <= 2.0)) throw std::domain_error("gamma_net: gamma must lie in (0, 2]");
  if (m < 1 || m > 12) throw std::domain_error("gamma_net: subspace dimension must lie in [1, 12]");
  if (orthonormality_error(frame) > kStructuralTol) throw std::domain_error("gamma_net: frame is not orthonormal");

  GammaNet net;
  const double raw_budget = std::pow(3.0 / gamma, m);
  net.budget = raw_budget > 1e9 ? std::size_t(1e9) : static_cast<std::size_t>(std::ceil(raw_budget - 1e-12));

  std::vector<Vector> coeffs;  // net in coefficient space S^{m-1}
  Engine engine = make_engine(derive(seed, "candidates"));
  auto try_add = [&](const Vector& c, double radius) {
    if (detail::nearest_distance(coeffs, c) > radius) {
      coeffs.push_back(c);
      coeffs.push_back(-c);
    }
  };
  const std::size_t candidates =
      std::clamp<std::size_t>(200 * std::min<std::size_t>(net.budget, 1000), 2000, 200000);
  const double radius = 0.9 * gamma;
  for (std::size_t i = 0; i < candidates && coeffs.size() <= net.budget; ++i) try_add(sample_unit_sphere(m, engine), radius);

  Engine tester = make_engine(derive(seed, "certificate"));
  net.test_points = test_points;
  // Repair pass: uncovered test points join the net; a second pass certifies.
  for (int pass = 0; pass < 2 && coeffs.size() <= net.budget; ++pass) {
    double worst = 0.0;
    bool added = false;
    for (std::size_t i = 0; i < test_points; ++i) {
      Vector p = sample_unit_sphere(m, tester);
      double d = detail::nearest_distance(coeffs, p);
      worst = std::max(worst, d);
      if (d > gamma) {
        if (pass == 0) {
          coeffs.push_back(p);
          coeffs.push_back(-p);
          added = true;
          if (coeffs.size() > net.budget) break;
        }
      }
    }
    net.worst_gap = worst;
    net.certified = worst <= gamma;
    if (!added) break;
  }
  net.within_budget = coeffs.size() <= net.budget;
  if (!net.within_budget) net.certified = false;
  net.points.reserve(coeffs.size());
  for (const auto& c : coeffs) net.points.push_back(frame * c);
  return net;
}

}  // namespace dvlab
