#pragma once

// One verifier per quantitative statement. Each returns LemmaReport(s) with
// the bound, the measured value and the margin between them.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dvlab/linalg.hpp"
#include "dvlab/norm.hpp"
#include "dvlab/opnorm.hpp"
#include "dvlab/parallel.hpp"
#include "dvlab/params.hpp"
#include "dvlab/report.hpp"
#include "dvlab/subspace.hpp"

namespace dvlab {

/// Monte-Carlo acceptance width in standard errors.
inline constexpr double kSigmaWidth = 4.0;
/// Independent RNG streams per Monte-Carlo run; fixed so results do not
/// depend on the thread count.
inline constexpr std::size_t kMonteCarloChunks = 64;

namespace detail {

inline std::string describe(std::initializer_list<std::pair<const char*, double>> items) {
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  for (const auto& [k, v] : items) {
    if (!first) os << ' ';
    os << k << '=' << v;
    first = false;
  }
  return os.str();
}

/// Sums count(chunk, engine, trials_in_chunk) over fixed chunks.
template <class Count>
std::int64_t chunked_count(std::int64_t trials, Seed seed, std::string_view section, Count&& count) {
  std::vector<std::int64_t> hits(kMonteCarloChunks, 0);
  parallel_for(kMonteCarloChunks, [&](std::size_t c) {
    const std::int64_t base = trials / static_cast<std::int64_t>(kMonteCarloChunks);
    const std::int64_t extra = static_cast<std::int64_t>(c) < trials % static_cast<std::int64_t>(kMonteCarloChunks);
    Engine engine = make_engine(derive(seed, section, c));
    hits[c] = count(engine, base + extra);
  });
  return std::accumulate(hits.begin(), hits.end(), std::int64_t{0});
}

inline double standard_error(double p, std::int64_t trials) {
  p = std::clamp(p, 0.0, 1.0);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

/// min(1, base^n gamma^e) evaluated in logs.
inline double capped_power_bound(double base, int n, double gamma, double e) {
  if (e <= 0.0 && gamma < 1.0) return 1.0;
  const double l = n * std::log(base) + e * std::log(gamma);
  return l >= 0.0 ? 1.0 : std::exp(l);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Good points, complemented and Euclidean subspaces.

struct EquivalenceOptions {
  int grid_size = 256;
  double tol = 1e-6;
  int projection_grid = 16;
};

/// Both directions on one subspace: reports "goodness_equivalence.forward"
/// and "goodness_equivalence.converse". Without an explicit epsilon each
/// direction uses the smallest epsilon its hypothesis allows on this subspace.
inline std::vector<LemmaReport> verify_goodness_equivalence(const NormSpec& spec, const TwoDSubspace& Y,
                                                            std::optional<double> epsilon, Seed seed,
                                                            const EquivalenceOptions& opt = {}) {
  if (epsilon && !(*epsilon >= 0.0)) throw std::domain_error("verify_goodness_equivalence: epsilon must be >= 0");
  const EuclideanConstant ec = euclidean_constant(spec, Y, std::max(64, opt.grid_size));
  const ProjectionNorm pn = projection_op_norm(spec, Y, derive(seed, "projection"), opt.projection_grid);
  const WorstGoodness wg = worst_goodness(spec, Y, opt.grid_size);
  std::vector<LemmaReport> out;

  // Complemented and Euclidean => every point (2 eps + eps^2)-good.
  const double e1 = epsilon.value_or(std::max({0.0, ec.ratio - 1.0, pn.value - 1.0}));
  std::string inst = detail::describe({{"n", spec.n()}, {"eta", spec.eta()}, {"epsilon", e1}});
  if (ec.ratio <= 1.0 + e1 + opt.tol && pn.value <= 1.0 + e1 + opt.tol) {
    out.push_back(upper_report("goodness_equivalence.forward", inst, 2 * e1 + e1 * e1, wg.deficiency, opt.tol));
  } else {
    out.push_back(not_applicable("goodness_equivalence.forward", inst,
                                 "subspace is not (1+epsilon)-Euclidean and (1+epsilon)-complemented"));
  }
  out.back().value("epsilon", e1);

  // Every point eps-good => complemented and (1 + 3 pi sqrt eps)-Euclidean.
  const double e2 = epsilon.value_or(std::max(0.0, wg.deficiency));
  inst = detail::describe({{"n", spec.n()}, {"eta", spec.eta()}, {"epsilon", e2}});
  if (e2 > 1.0 / (9.0 * kPi * kPi)) {
    out.push_back(not_applicable("goodness_equivalence.converse", inst, "epsilon exceeds 1/(9 pi^2)"));
  } else if (wg.deficiency > e2 + opt.tol) {
    out.push_back(not_applicable("goodness_equivalence.converse", inst, "some sampled point is not epsilon-good"));
  } else {
    const double euclid_bound = 1.0 + 3.0 * kPi * std::sqrt(e2);
    LemmaReport r = upper_report("goodness_equivalence.converse", inst, euclid_bound, ec.ratio, opt.tol);
    const double proj_margin = 1.0 + e2 - pn.value;
    r.margin = std::min(r.margin, proj_margin);
    r.status = r.margin >= -opt.tol ? Status::pass : Status::fail;
    out.push_back(std::move(r));
  }
  out.back().value("epsilon", e2);
  for (auto& r : out) {
    r.value("euclidean_ratio", ec.ratio).value("projection_norm", pn.value).value("worst_deficiency", wg.deficiency);
    r.seed = seed;
    r.trials = opt.grid_size;
    r.tolerance = opt.tol;
  }
  return out;
}

/// epsilon guaranteed by the converse bound for a given delta:
/// (1 + delta)(1 + 2 delta)/(1 - C delta) + 2 C delta - 1.
inline double converse_epsilon(double delta, double C) {
  if (!(C * delta < 1.0)) return std::numeric_limits<double>::infinity();
  return (1.0 + delta) * (1.0 + 2.0 * delta) / (1.0 - C * delta) + 2.0 * C * delta - 1.0;
}

struct DescentWitness {
  Vector end;              // unit vector at the end of the path
  double norm_ratio = 1.0; // ||end|| / ||x||
  double min_gap = 0.0;    // min over the path of |y - z(y)|, z the unit support functional
  double arc_length = 0.0;
};

/// Walks along the unit sphere from unit x in the direction that removes the
/// component of the support functional orthogonal to the current point.
inline DescentWitness support_descent(const NormSpec& spec, const Vector& x, double arc, int steps = 400) {
  DescentWitness w;
  Vector y = x.normalized();
  const double h = arc / steps;
  w.min_gap = std::numeric_limits<double>::infinity();
  for (int s = 0; s <= steps; ++s) {
    Vector z = support_functional(spec, y).f;
    z.normalize();
    w.min_gap = std::min(w.min_gap, (y - z).norm());
    if (s == steps) break;
    Vector d = -(z - z.dot(y) * y);
    const double len = d.norm();
    if (len == 0.0) break;
    d /= len;
    y = (std::cos(h) * y + std::sin(h) * d).normalized();
    w.arc_length += h;
  }
  w.end = y;
  w.norm_ratio = norm(spec, y) / norm(spec, x.normalized());
  return w;
}

/// Reports "support_characterization.converse" and
/// "support_characterization.forward" at the point x.
inline std::vector<LemmaReport> verify_support_characterization(const NormSpec& spec, const Vector& x, double delta,
                                                                double tol = 1e-6) {
  check_dim(spec, x, "verify_support_characterization");
  if (x.norm() == 0.0) throw std::domain_error("verify_support_characterization: x must be nonzero");
  if (!(delta > 0.0)) throw std::domain_error("verify_support_characterization: delta must be positive");
  const double C = spec.distortion();
  const Vector unit = x.normalized();
  const double deficiency = goodness(spec, unit).raw_deficiency;
  const std::string inst = detail::describe({{"n", spec.n()}, {"eta", spec.eta()}, {"delta", delta}});
  std::vector<LemmaReport> out;

  // Converse with y = x and z the support functional rescaled to |z| = |y|.
  Vector z = support_functional(spec, unit).f;
  z.normalize();
  const double gap = (unit - z).norm();
  const double eps = converse_epsilon(delta, C);
  if (gap < delta && std::isfinite(eps)) {
    out.push_back(upper_report("support_characterization.converse", inst, eps, deficiency, tol));
  } else {
    out.push_back(not_applicable("support_characterization.converse", inst,
                                 gap >= delta ? "|y - z| >= delta |x| at y = x" : "C delta >= 1"));
  }
  out.back().value("gap", gap).value("deficiency", deficiency).value("epsilon_bound", eps);

  // Forward: an (delta^2/8C^2)-good point has a nearby y whose support
  // functional is within delta. Search along the descent path of length
  // delta/2C; if the gap never drops below delta the norm must fall.
  const double good_eps = delta * delta / (8.0 * C * C);
  const double arc = delta / (2.0 * C);
  const DescentWitness w = support_descent(spec, unit, arc);
  const double drop_bound = 1.0 - arc * delta / (2.0 * C);
  if (deficiency <= good_eps) {
    // Strict inequality: the gap must fall below delta.
    out.push_back(upper_report("support_characterization.forward", inst, delta, w.min_gap, 0.0));
    out.back().status = w.min_gap < delta ? Status::pass : Status::fail;
  } else {
    LemmaReport r = not_applicable("support_characterization.forward", inst,
                                   "point is not delta^2/8C^2-good; descent witness recorded");
    r.bound = drop_bound;
    r.measured = w.norm_ratio;
    r.margin = drop_bound - w.norm_ratio;
    out.push_back(std::move(r));
  }
  out.back()
      .value("min_gap", w.min_gap)
      .value("good_epsilon", good_eps)
      .value("deficiency", deficiency)
      .value("witness_norm_ratio", w.norm_ratio)
      .value("witness_bound", drop_bound);
  for (auto& r : out) r.trials = 1;
  return out;
}

// ---------------------------------------------------------------------------
// Eigenvector approximation.

/// tau = |Ay - nu y|^2; asserts min(|Py|^2, |Qy|^2) <= 2 tau when tau <= 1/4.
inline LemmaReport verify_approx_eigenvector(const ProjectionPair& proj, const Vector& y, double nu) {
  if (y.size() != proj.dim()) throw std::domain_error("verify_approx_eigenvector: dimension mismatch");
  if (std::abs(y.norm() - 1.0) > kStructuralTol) throw std::domain_error("verify_approx_eigenvector: y must be a unit vector");
  const Vector py = proj.P * y;
  const Vector qy = proj.Q * y;
  const Vector residual = y + py - nu * y;
  const double tau = residual.squaredNorm();
  const std::string inst = detail::describe({{"n", proj.dim()}, {"nu", nu}, {"tau", tau}});
  if (tau > 0.25) return not_applicable("approx_eigenvector", inst, "tau > 1/4");
  LemmaReport r = upper_report("approx_eigenvector", inst, 2.0 * tau, std::min(py.squaredNorm(), qy.squaredNorm()), 1e-12);
  r.trials = 1;
  r.value("tau", tau).value("P_mass", py.squaredNorm()).value("Q_mass", qy.squaredNorm());
  return r;
}

/// Random sweep: unit y near a random eigenvector and nu near its eigenvalue.
inline LemmaReport approx_eigenvector_sweep(int n, std::int64_t trials, Seed seed) {
  std::int64_t applicable = 0, violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  Engine engine = make_engine(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::int64_t t = 0; t < trials; ++t) {
    const ProjectionPair proj = sample_projection(n, std::max(1, default_rank(n)), derive(seed, "projection", t));
    Vector y = (unif(engine) < 0.5 ? proj.P : proj.Q) * sample_unit_sphere(n, engine);
    y += 0.3 * unif(engine) * sample_unit_sphere(n, engine);
    if (y.norm() == 0.0) continue;
    y.normalize();
    const double nu = 1.0 + 1.2 * unif(engine) - 0.1;
    LemmaReport r = verify_approx_eigenvector(proj, y, nu);
    if (r.status == Status::not_applicable) continue;
    ++applicable;
    worst = std::min(worst, r.margin);
    if (r.status == Status::fail) ++violations;
  }
  LemmaReport out = upper_report("approx_eigenvector", detail::describe({{"n", n}}), 0.0, static_cast<double>(violations), 0.0);
  out.trials = trials;
  out.seed = seed;
  out.value("applicable", static_cast<double>(applicable)).value("worst_margin", worst);
  return out;
}

// ---------------------------------------------------------------------------
// Incidence probabilities.

/// Frequency of d(x, Y) <= gamma for uniform unit x and a fixed m-dimensional
/// Y, against the exact Beta law and against min(1, 24^n gamma^(n-m)).
inline LemmaReport mc_subspace_volume(int n, int m, double gamma, std::int64_t trials, Seed seed) {
  if (trials < 1000) throw std::domain_error("mc_subspace_volume: at least 1000 trials required");
  if (m < 1 || m >= n) throw std::domain_error("mc_subspace_volume: need 1 <= m < n");
  const Matrix frame = random_frame(n, m, derive(seed, "subspace"));
  const double g2 = gamma * gamma;
  const std::int64_t hits = detail::chunked_count(trials, seed, "volume", [&](Engine& e, std::int64_t count) {
    std::int64_t h = 0;
    for (std::int64_t i = 0; i < count; ++i) {
      const Vector x = sample_unit_sphere(n, e);
      const Vector c = frame.transpose() * x;
      if (std::max(0.0, 1.0 - c.squaredNorm()) <= g2) ++h;
    }
    return h;
  });
  const double freq = static_cast<double>(hits) / static_cast<double>(trials);
  const double oracle = subspace_incidence_probability(n, m, std::min(gamma, 1.0));
  const double se = detail::standard_error(oracle, trials);
  const double bound = detail::capped_power_bound(24.0, n, gamma, n - m);
  const std::string inst = detail::describe({{"n", n}, {"m", m}, {"gamma", gamma}});
  LemmaReport r = upper_report("subspace_volume", inst, bound, freq, kSigmaWidth * se);
  // Agreement with the exact law, allowing one count when the law is ~0.
  const double slack = kSigmaWidth * se + 1.0 / static_cast<double>(trials);
  const bool matches_oracle = std::abs(freq - oracle) <= slack;
  if (!matches_oracle) {
    r.status = Status::fail;
    r.note("frequency disagrees with the Beta-law oracle");
  }
  const bool hypothesis = (n + 1) * std::log(2.0) + std::log(gamma) >= 0.0;
  if (!hypothesis) r.note("hypothesis 2^(n+1) gamma >= 1 does not hold; inequality checked regardless");
  r.trials = trials;
  r.seed = seed;
  r.value("hits", static_cast<double>(hits))
      .value("oracle", oracle)
      .value("standard_error", se)
      .value("oracle_deviation_se", se > 0 ? (freq - oracle) / se : 0.0)
      .value("hypothesis_holds", hypothesis ? 1.0 : 0.0);
  return r;
}

enum class StructureMode { small_support, distinct_values };

namespace detail {

/// Set partitions of {0..n-1} into at most k blocks, as restricted growth
/// strings. Stops once `limit` partitions are produced.
inline std::vector<std::vector<int>> set_partitions(int n, int k, std::size_t limit) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(n, 0);
  std::function<void(int, int)> rec = [&](int i, int used) {
    if (out.size() >= limit) return;
    if (i == n) {
      out.push_back(a);
      return;
    }
    for (int b = 0; b <= std::min(used, k - 1); ++b) {
      a[i] = b;
      rec(i + 1, std::max(used, b + 1));
    }
  };
  if (n > 0) {
    a[0] = 0;
    rec(1, 1);
  }
  return out;
}

inline std::vector<std::vector<int>> subsets_of_size(int n, int r) {
  std::vector<std::vector<int>> out;
  std::vector<int> s(r);
  std::iota(s.begin(), s.end(), 0);
  while (true) {
    out.push_back(s);
    int i = r - 1;
    while (i >= 0 && s[i] == n - r + i) --i;
    if (i < 0) break;
    ++s[i];
    for (int j = i + 1; j < r; ++j) s[j] = s[j - 1] + 1;
  }
  return out;
}

/// Smallest principal sine between span(frame) and span(basis), fast path via
/// the Gram matrix I - M^T M and an exact residual SVD near `threshold`.
inline double structured_sine(const Matrix& frame, const Matrix& basis, double threshold) {
  const Matrix M = frame.transpose() * basis;
  const Matrix G = Matrix::Identity(basis.cols(), basis.cols()) - M.transpose() * M;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G, Eigen::EigenvaluesOnly);
  const double fast = std::sqrt(std::max(0.0, eig.eigenvalues()(0)));
  if (fast > 8.0 * threshold + 1e-6) return fast;
  return smallest_principal_sine(frame, basis);
}

inline Matrix block_basis(const std::vector<int>& labels, int n) {
  const int blocks = *std::max_element(labels.begin(), labels.end()) + 1;
  Matrix b = Matrix::Zero(n, blocks);
  for (int i = 0; i < n; ++i) b(i, labels[i]) = 1.0;
  for (int j = 0; j < blocks; ++j) b.col(j).normalize();
  return b;
}

inline Matrix coordinate_basis(const std::vector<int>& support, int n) {
  Matrix b = Matrix::Zero(n, static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) b(support[j], static_cast<Eigen::Index>(j)) = 1.0;
  return b;
}

}  // namespace detail

inline constexpr std::size_t kStructureBudget = 200000;

/// Probability that the gamma-expansion of a random m-dimensional subspace
/// contains a unit vector with support size <= r (small_support) or with at
/// most k distinct coordinate values (distinct_values), decided per sample by
/// principal angles against every structured subspace.
inline LemmaReport small_support_incidence(int n, int m, int r_or_k, double gamma, StructureMode mode,
                                           std::int64_t trials, Seed seed) {
  if (m < 1 || m > n || r_or_k < 1 || r_or_k > n) throw std::domain_error("small_support_incidence: need 1 <= m, r <= n");
  if (trials < 1) throw std::domain_error("small_support_incidence: trials must be positive");
  std::vector<Matrix> structured;
  bool sampled = false;
  if (mode == StructureMode::small_support) {
    for (const auto& s : detail::subsets_of_size(n, r_or_k)) {
      if (structured.size() >= kStructureBudget) {
        sampled = true;
        break;
      }
      structured.push_back(detail::coordinate_basis(s, n));
    }
  } else {
    auto parts = detail::set_partitions(n, r_or_k, kStructureBudget + 1);
    if (parts.size() > kStructureBudget) {
      sampled = true;
      parts.resize(kStructureBudget);
    }
    for (const auto& p : parts) structured.push_back(detail::block_basis(p, n));
  }
  std::vector<char> hit(static_cast<std::size_t>(trials), 0);
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    const Matrix frame = random_frame(n, m, derive(seed, "subspace", t));
    for (const auto& b : structured) {
      if (detail::structured_sine(frame, b, gamma) <= gamma) {
        hit[t] = 1;
        return;
      }
    }
  });
  const std::int64_t hits = std::count(hit.begin(), hit.end(), 1);
  const double freq = static_cast<double>(hits) / static_cast<double>(trials);
  double bound;
  std::string id;
  if (mode == StructureMode::small_support) {
    id = "small_support";
    bound = detail::capped_power_bound(288.0, n, gamma, n - m - r_or_k);
  } else {
    id = "distinct_values";
    const double l = r_or_k * std::log(3.0 / gamma) + n * std::log(48.0 * r_or_k) + (n - m) * std::log(gamma);
    bound = l >= 0.0 ? 1.0 : std::exp(l);
  }
  const double se = detail::standard_error(std::min(1.0, std::max(freq, bound)), trials);
  const std::string inst =
      detail::describe({{"n", n}, {"m", m}, {mode == StructureMode::small_support ? "r" : "k", r_or_k}, {"gamma", gamma}});
  LemmaReport r = upper_report(id, inst, bound, freq, kSigmaWidth * se);
  r.trials = trials;
  r.seed = seed;
  r.value("hits", static_cast<double>(hits)).value("structured_subspaces", static_cast<double>(structured.size()));
  if (sampled) r.note("structured family truncated at the enumeration budget");
  // Exact laws where one exists.
  if (mode == StructureMode::distinct_values && r_or_k == 1 && m < n) {
    r.value("oracle", subspace_incidence_probability(n, m, std::min(gamma, 1.0)));
  }
  if (mode == StructureMode::small_support && r_or_k == 1 && m == 1 && n > 1) {
    r.value("oracle", std::min(1.0, n * subspace_incidence_probability(n, 1, std::min(gamma, 1.0))));
  }
  return r;
}

/// Fraction of rank-n/2 projections P for which PX or QX comes within 2 gamma
/// of a unit vector supported on at most n/4 coordinates; bound (2/3)^n.
inline LemmaReport verify_pick_gamma(int n, std::int64_t trials, Seed seed, double gamma = std::ldexp(1.0, -37)) {
  if (n < 4 || n % 2 != 0) throw std::domain_error("verify_pick_gamma: n must be even and >= 4");
  const std::string inst = detail::describe({{"n", n}, {"gamma", gamma}});
  if (gamma >= 1.0) return not_applicable("pick_gamma", inst, "gamma >= 1 is outside the small-gamma regime");
  const auto supports = detail::subsets_of_size(n, n / 4);
  std::vector<char> hit(static_cast<std::size_t>(trials), 0);
  std::vector<double> closest(static_cast<std::size_t>(trials), 1.0);
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    const ProjectionPair proj = sample_projection(n, n / 2, derive(seed, "projection", t));
    double best = 1.0;
    for (const auto& s : supports) {
      Matrix qs(n, static_cast<Eigen::Index>(s.size())), ps(n, static_cast<Eigen::Index>(s.size()));
      for (std::size_t j = 0; j < s.size(); ++j) {
        qs.col(static_cast<Eigen::Index>(j)) = proj.Q.col(s[j]);
        ps.col(static_cast<Eigen::Index>(j)) = proj.P.col(s[j]);
      }
      // Distance of unit vectors on the support to PX is sigma_min(Q E_S).
      Eigen::JacobiSVD<Matrix> sq(qs), sp(ps);
      best = std::min({best, sq.singularValues().minCoeff(), sp.singularValues().minCoeff()});
    }
    closest[t] = best;
    hit[t] = best <= 2.0 * gamma;
  });
  const std::int64_t hits = std::count(hit.begin(), hit.end(), 1);
  const double freq = static_cast<double>(hits) / static_cast<double>(trials);
  const double bound = std::pow(2.0 / 3.0, n);
  LemmaReport r = upper_report("pick_gamma", inst, bound, freq, kSigmaWidth * detail::standard_error(bound, trials));
  r.trials = trials;
  r.seed = seed;
  r.value("hits", static_cast<double>(hits))
      .value("min_distance", *std::min_element(closest.begin(), closest.end()));
  return r;
}

// ---------------------------------------------------------------------------
// Signs, typical parameters and sign vectors.

inline int sign_of(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

inline LemmaReport verify_sign_continuity(const Vector& x, const Vector& y, double xi) {
  if (x.size() != y.size()) throw std::domain_error("verify_sign_continuity: dimension mismatch");
  const double n = static_cast<double>(x.size());
  const double delta = (x - y).norm();
  const double threshold = xi / std::sqrt(n);
  std::int64_t count = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::abs(x(i)) >= threshold && sign_of(x(i)) != sign_of(y(i))) ++count;
  const double bound = delta * delta * n / (xi * xi);
  LemmaReport r = upper_report("sign_continuity", detail::describe({{"n", n}, {"xi", xi}, {"delta", delta}}), bound,
                               static_cast<double>(count), 0.0);
  r.trials = 1;
  return r;
}

inline LemmaReport sign_continuity_sweep(int n, std::int64_t trials, Seed seed) {
  Engine engine = make_engine(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::int64_t violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (std::int64_t t = 0; t < trials; ++t) {
    const Vector x = sample_unit_sphere(n, engine);
    const Vector y = x + unif(engine) * sample_unit_sphere(n, engine);
    LemmaReport r = verify_sign_continuity(x, y, 0.05 + unif(engine));
    worst = std::min(worst, r.margin);
    if (r.status == Status::fail) ++violations;
  }
  LemmaReport out = upper_report("sign_continuity", detail::describe({{"n", n}}), 0.0, static_cast<double>(violations), 0.0);
  out.trials = trials;
  out.seed = seed;
  out.value("worst_margin", worst);
  return out;
}

/// Whether too many coordinates of E are small at theta (first typicality test).
inline bool small_coordinate_excess(const TwoDSubspace& Y, const std::vector<int>& E, double theta, double xi, double c) {
  const double small = xi / std::sqrt(static_cast<double>(Y.n()));
  int count = 0;
  for (int i : E)
    if (std::abs(Y.r()(i) * std::sin(theta + Y.phi()(i))) < small) ++count;
  return !(count < c * static_cast<double>(E.size()));
}

inline LemmaReport verify_typicality_probability(const TwoDSubspace& Y, double xi, double c, double alpha,
                                                 std::int64_t theta_trials, Seed seed) {
  if (!(xi >= 0.0) || !(c > 0.0 && c < 1.0)) throw std::domain_error("verify_typicality_probability: need xi >= 0, 0 < c < 1");
  const std::vector<int> E = e_set(Y, alpha);
  const double bound = xi / (alpha * c);
  const std::string inst = detail::describe({{"n", Y.n()}, {"xi", xi}, {"c", c}, {"alpha", alpha}});
  const std::int64_t fails = detail::chunked_count(theta_trials, seed, "typical", [&](Engine& e, std::int64_t count) {
    std::uniform_real_distribution<double> theta(0.0, kTwoPi);
    std::int64_t f = 0;
    for (std::int64_t i = 0; i < count; ++i)
      if (small_coordinate_excess(Y, E, theta(e), xi, c)) ++f;
    return f;
  });
  const double freq = static_cast<double>(fails) / static_cast<double>(theta_trials);
  LemmaReport r = upper_report("typicality", inst, bound, freq,
                               kSigmaWidth * detail::standard_error(std::min(1.0, bound), theta_trials));
  if (bound >= 1.0) r.note("bound is vacuous");
  if (E.empty()) r.note("E is empty");
  r.trials = theta_trials;
  r.seed = seed;
  r.value("E_size", static_cast<double>(E.size()));
  return r;
}

/// |u - lambda v| minimized at lambda = <u,v>/|v|^2 versus 2 (rs/mn)^{1/2}.
inline LemmaReport verify_two_sign_vectors(const Vector& u, const Vector& v) {
  if (u.size() != v.size() || u.size() == 0) throw std::domain_error("verify_two_sign_vectors: dimension mismatch");
  const double n = static_cast<double>(u.size());
  const double h = 1.0 / std::sqrt(n);
  int m = 0, r = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const bool ue = std::abs(std::abs(u(i)) - h) <= 1e-12, ve = std::abs(std::abs(v(i)) - h) <= 1e-12;
    const bool uz = u(i) == 0.0, vz = v(i) == 0.0;
    if (!((ue && ve) || (uz && vz))) throw std::domain_error("verify_two_sign_vectors: entries must be +-n^{-1/2} on a common set");
    if (ue) {
      ++m;
      if (sign_of(u(i)) == sign_of(v(i))) ++r;
    }
  }
  const int s = m - r;
  const double bound = m == 0 ? 0.0 : 2.0 * std::sqrt(static_cast<double>(r) * s / (m * n));
  const double vv = v.squaredNorm();
  const double lambda = vv > 0 ? u.dot(v) / vv : 0.0;
  const double measured = (u - lambda * v).norm();
  LemmaReport rep = lower_report("two_sign_vectors", detail::describe({{"n", n}, {"m", m}, {"r", r}}), bound, measured, 1e-12);
  rep.trials = 1;
  rep.value("lambda", lambda);
  return rep;
}

/// Every pair of sign patterns on E = {0..m-1} for every m <= n <= n_max.
inline LemmaReport exhaustive_two_sign_vectors(int n_max) {
  std::int64_t cases = 0, violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= n_max; ++n) {
    const double h = 1.0 / std::sqrt(static_cast<double>(n));
    for (int m = 1; m <= n; ++m) {
      const std::uint32_t patterns = 1u << m;
      std::vector<double> u(n, 0.0), v(n, 0.0);
      for (std::uint32_t a = 0; a < patterns; ++a) {
        for (int i = 0; i < m; ++i) u[i] = (a >> i & 1u) ? -h : h;
        for (std::uint32_t b = 0; b < patterns; ++b) {
          double uv = 0.0, vv = 0.0;
          for (int i = 0; i < m; ++i) {
            v[i] = (b >> i & 1u) ? -h : h;
            uv += u[i] * v[i];
            vv += v[i] * v[i];
          }
          const double lambda = uv / vv;
          double res = 0.0;
          for (int i = 0; i < m; ++i) res += (u[i] - lambda * v[i]) * (u[i] - lambda * v[i]);
          const int r = m - std::popcount(a ^ b);
          const int s = m - r;
          const double bound = 2.0 * std::sqrt(static_cast<double>(r) * s / (static_cast<double>(m) * n));
          const double margin = std::sqrt(res) - bound;
          worst = std::min(worst, margin);
          if (margin < -1e-12) ++violations;
          ++cases;
        }
      }
    }
  }
  LemmaReport rep = upper_report("two_sign_vectors", detail::describe({{"n_max", n_max}}), 0.0, static_cast<double>(violations), 0.0);
  rep.trials = cases;
  rep.value("worst_margin", worst);
  return rep;
}

/// u = a x + b y, v = c x + d y with <x,y> = 0: |u - lambda* v| <= |x||y||ad - bc|/|v|.
inline LemmaReport verify_find_lambda(double a, double b, double c, double d, const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw std::domain_error("verify_find_lambda: dimension mismatch");
  const double scale = std::max(1.0, x.norm() * y.norm());
  if (std::abs(x.dot(y)) > 1e-10 * scale) throw std::domain_error("verify_find_lambda: x and y must be orthogonal");
  const Vector u = a * x + b * y;
  const Vector v = c * x + d * y;
  const std::string inst = detail::describe({{"a", a}, {"b", b}, {"c", c}, {"d", d}});
  const double vv = v.squaredNorm();
  if (vv == 0.0) return not_applicable("find_lambda", inst, "v = 0");
  const double lambda = (a * c * x.squaredNorm() + b * d * y.squaredNorm()) / vv;
  const double bound = x.norm() * y.norm() * std::abs(a * d - b * c) / std::sqrt(vv);
  LemmaReport r = upper_report("find_lambda", inst, bound, (u - lambda * v).norm(), 1e-12);
  r.trials = 1;
  r.value("lambda", lambda);
  return r;
}

inline LemmaReport find_lambda_sweep(int n, std::int64_t trials, Seed seed, double tol = 1e-9) {
  std::vector<char> bad(static_cast<std::size_t>(trials), 0);
  std::vector<double> margin(static_cast<std::size_t>(trials), 0.0);
  parallel_for(kMonteCarloChunks, [&](std::size_t ch) {
    Engine e = make_engine(derive(seed, "find_lambda", ch));
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> len(0.1, 3.0);
    for (std::size_t t = ch; t < static_cast<std::size_t>(trials); t += kMonteCarloChunks) {
      const Matrix f = orthonormalize(gaussian_matrix(n, 2, e));
      const Vector x = len(e) * f.col(0);
      const Vector y = len(e) * f.col(1);
      const double a = g(e), b = g(e), c = g(e), d = g(e);
      LemmaReport r = verify_find_lambda(a, b, c, d, x, y);
      if (r.status == Status::not_applicable) continue;
      margin[t] = r.margin / std::max(1.0, r.bound);
      bad[t] = margin[t] < -tol;
    }
  });
  const auto violations = std::count(bad.begin(), bad.end(), 1);
  LemmaReport out = upper_report("find_lambda", detail::describe({{"n", n}}), 0.0, static_cast<double>(violations), 0.0);
  out.trials = trials;
  out.seed = seed;
  out.tolerance = tol;
  out.value("worst_relative_margin", *std::min_element(margin.begin(), margin.end()));
  return out;
}

/// max_i d(u_i, W) >= k^{-1/2} for orthonormal columns U (n x k) and W of
/// dimension k - 1.
inline LemmaReport verify_approx_orthonormal(const Matrix& U, const Matrix& W, double tol = 1e-9) {
  const int k = static_cast<int>(U.cols());
  if (k < 1 || W.cols() != k - 1) throw std::domain_error("verify_approx_orthonormal: need dim W = k - 1");
  if (orthonormality_error(U) > kStructuralTol) throw std::domain_error("verify_approx_orthonormal: U must be orthonormal");
  double best = 0.0;
  for (int i = 0; i < k; ++i) best = std::max(best, distance_to_subspace(U.col(i), W));
  LemmaReport r = lower_report("approx_orthonormal", detail::describe({{"n", U.rows()}, {"k", k}}),
                               1.0 / std::sqrt(static_cast<double>(k)), best, tol);
  r.trials = 1;
  return r;
}

inline LemmaReport approx_orthonormal_sweep(int k, int n, std::int64_t trials, Seed seed, double tol = 1e-9) {
  if (k < 1 || k > n) throw std::domain_error("approx_orthonormal_sweep: need 1 <= k <= n");
  std::vector<char> bad(static_cast<std::size_t>(trials), 0);
  std::vector<double> margin(static_cast<std::size_t>(trials), 0.0);
  parallel_for(kMonteCarloChunks, [&](std::size_t ch) {
    Engine e = make_engine(derive(seed, "approx_orthonormal", ch));
    for (std::size_t t = ch; t < static_cast<std::size_t>(trials); t += kMonteCarloChunks) {
      const Matrix U = orthonormalize(gaussian_matrix(n, k, e));
      const Matrix W = k > 1 ? orthonormalize(gaussian_matrix(n, k - 1, e)) : Matrix(n, 0);
      LemmaReport r = verify_approx_orthonormal(U, W, tol);
      margin[t] = r.margin;
      bad[t] = r.status == Status::fail;
    }
  });
  const auto violations = std::count(bad.begin(), bad.end(), 1);
  LemmaReport out = upper_report("approx_orthonormal", detail::describe({{"n", n}, {"k", k}}), 0.0,
                                 static_cast<double>(violations), 0.0);
  out.trials = trials;
  out.seed = seed;
  out.tolerance = tol;
  out.value("worst_margin", *std::min_element(margin.begin(), margin.end()));
  return out;
}

/// Whether every sample's positive set is a cyclic interval of E in phase
/// order, as it must be for sign patterns of a 2-D subspace.
inline bool has_interval_structure(const SignSetAnalysis& a) {
  const std::size_t m = a.phase_order.size();
  for (const auto& s : a.samples) {
    int changes = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const double cur = s(a.phase_order[j]);
      const double next = s(a.phase_order[(j + 1) % m]);
      if ((cur > 0) != (next > 0)) ++changes;
    }
    if (changes > 2) return false;
  }
  return true;
}

/// max over Sigma samples of d(u, W) >= beta / (2 sqrt 5) when k >= 5 and
/// dim W = 4.
inline LemmaReport verify_sigma_spread(const SignSetAnalysis& a, const Matrix& W, double beta) {
  const std::string inst = detail::describe({{"k", a.k}, {"beta", beta}, {"E", static_cast<double>(a.E.size())}});
  if (a.k < 5) return not_applicable("sigma_spread", inst, "fewer than five separated pairs");
  if (W.cols() != 4) return not_applicable("sigma_spread", inst, "W must be 4-dimensional");
  if (!has_interval_structure(a)) return not_applicable("sigma_spread", inst, "inconsistent instance: sign patterns are not cyclic intervals");
  double best = 0.0;
  for (const auto& s : a.samples) best = std::max(best, distance_to_subspace(s, W));
  LemmaReport r = lower_report("sigma_spread", inst, beta / (2.0 * std::sqrt(5.0)), best, 1e-9);
  r.trials = static_cast<std::int64_t>(a.samples.size());
  return r;
}

// ---------------------------------------------------------------------------
// Parameters and the goodness floor.

inline LemmaReport parameter_chain_report(const ParameterSet& p, ParameterChainResult* detail_out = nullptr) {
  ParameterChainResult res = check_parameter_chain(p);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& c : res.conditions) worst = std::min(worst, c.log2_margin);
  LemmaReport r;
  r.lemma_id = "parameter_chain";
  r.instance = "gamma=" + exact::format_rational(p.gamma) + " beta=" + exact::format_rational(p.beta) +
               " eta=" + exact::format_rational(p.eta) + " delta=" + exact::format_rational(p.delta);
  r.bound = 0.0;
  r.measured = -worst;
  r.margin = worst;
  if (!res.all_passed && r.margin >= 0.0) r.margin = -std::numeric_limits<double>::min();
  r.status = res.all_passed ? Status::pass : Status::fail;
  r.trials = static_cast<std::int64_t>(res.conditions.size());
  r.value("log2_epsilon", exact::log2_abs(res.epsilon));
  for (const auto& c : res.conditions) r.value("log2_margin." + c.name, c.log2_margin);
  r.note("binding condition " + res.binding);
  if (detail_out) *detail_out = std::move(res);
  return r;
}

struct ProbeResult {
  LemmaReport report;
  std::vector<SubspaceReport> subspaces;
};

/// Evidence only: min over random subspaces of the worst goodness deficiency.
inline ProbeResult verify_counterexample_probe(const NormSpec& spec, int subspace_trials, int grid_size, Seed seed,
                                               const ProbeOptions& base = {}) {
  if (subspace_trials < 1) throw std::domain_error("verify_counterexample_probe: need at least one subspace");
  ProbeResult out;
  out.subspaces.resize(static_cast<std::size_t>(subspace_trials));
  ProbeOptions opt = base;
  opt.grid_size = grid_size;
  parallel_for(static_cast<std::size_t>(subspace_trials), [&](std::size_t i) {
    const Seed s = derive(seed, "subspace", i);
    out.subspaces[i] = probe_subspace(spec, random_subspace(spec.n(), s), derive(s, "probe"), opt);
  });
  double floor = std::numeric_limits<double>::infinity(), top = 0.0, mean = 0.0;
  int failures = 0;
  for (const auto& s : out.subspaces) {
    floor = std::min(floor, s.worst_goodness);
    top = std::max(top, s.worst_goodness);
    mean += s.worst_goodness;
    failures += s.solver_failures;
  }
  mean /= subspace_trials;
  const double enclosure = spec.distortion() * grid_step(grid_size);
  LemmaReport r = lower_report("counterexample_probe",
                               detail::describe({{"n", spec.n()}, {"eta", spec.eta()}, {"grid", grid_size}}), enclosure,
                               floor, 0.0);
  r.status = floor > enclosure ? Status::pass : Status::fail;
  r.asserting = false;
  r.trials = subspace_trials;
  r.seed = seed;
  r.value("floor", floor).value("mean", mean).value("max", top).value("enclosure", enclosure).value("solver_failures", failures);
  out.report = std::move(r);
  return out;
}

}  // namespace dvlab
