// End-to-end acceptance run: one [PASS]/[FAIL] line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "dvlab/dvlab.hpp"

using namespace dvlab;

namespace {

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

void parameter_chain() {
  const auto t0 = std::chrono::steady_clock::now();
  const ParameterChainResult r = check_parameter_chain(ParameterSet{});
  const double t = seconds_since(t0);
  int passed = 0;
  for (const auto& c : r.conditions) passed += c.passed;
  const bool ok = r.all_passed && r.conditions.size() == 12 && r.epsilon == exact::pow2(-1017) && t < 1.0;
  report(1, "parameter chain", ok,
         fmt("%.0f/%.0f conditions hold, epsilon = ", passed, static_cast<double>(r.conditions.size())) +
             exact::format_rational(r.epsilon) + ", binding " + r.binding + fmt(", %.3f s", t));
}

void sandwich() {
  const auto t0 = std::chrono::steady_clock::now();
  const NormSpec spec(sample_projection(64, 32, Seed{2024, 1}), 1.0 / 16);
  const SandwichResult s = sandwich_check(spec, 10000, Seed{2024, 2}, 1e-9);
  const double t = seconds_since(t0);
  report(2, "norm sandwich", s.passed && t < 5.0,
         fmt("ratio range [%.12f, %.12f], upper %.12f, %.3f s", s.min_ratio, s.max_ratio, s.upper, t));
}

void goodness_vs_operator_norm() {
  const auto t0 = std::chrono::steady_clock::now();
  const NormSpec spec(sample_projection(64, 32, Seed{2024, 3}), 1.0 / 16);
  const int N = 1000;
  std::vector<double> diff(N);
  parallel_for(N, [&](std::size_t i) {
    const Vector x = sample_unit_sphere(64, derive(Seed{2024, 4}, "point", i));
    const double g = goodness(spec, x).raw_deficiency;
    const double direct = rank_one_operator_norm(spec, x, derive(Seed{2024, 5}, "ascent", i)).value;
    diff[i] = std::abs(g + 1.0 - direct);
  });
  const double worst = *std::max_element(diff.begin(), diff.end());
  const double t = seconds_since(t0);
  report(3, "goodness equals rank-one operator norm", worst <= 2e-6 && t < 120.0,
         fmt("max |(deficiency + 1) - direct| = %.3e over %.0f points, %.1f s", worst, N, t));
}

void equivalence_suite() {
  const int N = 100;
  int forward = 0, converse = 0;
  double worst = std::numeric_limits<double>::infinity();
  EquivalenceOptions opt;
  opt.grid_size = 256;
  opt.tol = 1e-6;
  for (int i = 0; i < N; ++i) {
    const Seed s = derive(Seed{2024, 6}, "instance", i);
    const ProjectionPair proj = sample_projection(16, 8, derive(s, "projection"));
    const NormSpec spec(proj, 0.0);
    const TwoDSubspace Y = random_subspace_within(proj.basis, derive(s, "subspace"));
    for (const auto& r : verify_goodness_equivalence(spec, Y, 0.0, derive(s, "probe"), opt)) {
      if (!r.passed()) continue;
      worst = std::min(worst, r.margin);
      if (r.lemma_id == "goodness_equivalence.forward") ++forward;
      else ++converse;
    }
  }
  report(4, "goodness/complemented-Euclidean equivalence inside range(P)",
         forward == N && converse == N && worst >= -1e-6,
         fmt("forward %.0f/%.0f, converse %.0f/%.0f", forward, N, converse, N) + fmt(", worst margin %.3e", worst));
}

void two_sign_vectors() {
  const auto t0 = std::chrono::steady_clock::now();
  const LemmaReport r = exhaustive_two_sign_vectors(10);
  const double t = seconds_since(t0);
  report(5, "two sign vectors, exhaustive n <= 10", r.passed() && t < 60.0,
         fmt("%.0f cases, worst margin %.3e, %.2f s", static_cast<double>(r.trials), r.get("worst_margin"), t));
}

void sweeps() {
  const LemmaReport a = find_lambda_sweep(6, 100000, Seed{2024, 7}, 1e-9);
  const LemmaReport b = approx_orthonormal_sweep(5, 10, 100000, Seed{2024, 8}, 1e-9);
  report(6, "find-lambda and approximate-orthonormal sweeps", a.passed() && b.passed() && a.measured == 0 && b.measured == 0,
         fmt("violations %.0f and %.0f over 1e5 instances each", a.measured, b.measured));
}

void monte_carlo() {
  const LemmaReport line = mc_subspace_volume(2, 1, 0.1, 1000000, Seed{2024, 9});
  const double oracle = line.get("oracle");
  const double se = line.get("standard_error");
  const bool oracle_ok = std::abs(line.measured - oracle) <= 4.0 * se && std::abs(oracle - 0.063768) < 1e-6;
  const LemmaReport half = mc_subspace_volume(20, 10, 1e-4, 1000000, Seed{2024, 10});
  report(7, "subspace volume Monte Carlo", oracle_ok && line.passed() && half.passed() && half.get("hits") == 0,
         fmt("freq %.6f vs oracle %.6f (%.2f SE), bound margin %.4f", line.measured, oracle, (line.measured - oracle) / se,
             line.margin) +
             fmt("; n=20 hits %.0f", half.get("hits")));
}

void approx_eigenvector() {
  Vector y(2);
  y << 1.0, 1.0;
  const LemmaReport r = verify_approx_eigenvector(coordinate_projection(2, 1), y.normalized(), 1.5);
  const bool ok = r.passed() && std::abs(r.measured - 0.5) <= 1e-12 && std::abs(r.bound - 0.5) <= 1e-12;
  report(8, "approximate eigenvector equality case", ok,
         fmt("min(|Py|^2, |Qy|^2) = %.17g, 2 tau = %.17g", r.measured, r.bound));
}

void counterexample_probe() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (int n : {32, 64}) {
    const Seed seed{2024, static_cast<std::uint64_t>(100 + n)};
    const NormSpec spec(sample_projection(n, n / 2, derive(seed, "projection")), 1.0 / 16);
    const ProbeResult a = verify_counterexample_probe(spec, 200, 1024, derive(seed, "subspaces"));
    const ProbeResult b = verify_counterexample_probe(spec, 200, 1024, derive(seed, "subspaces"));
    const double floor = a.report.get("floor"), enclosure = a.report.get("enclosure");
    const bool same = floor == b.report.get("floor") && a.report.get("mean") == b.report.get("mean");
    ok = ok && floor > 0.0 && floor > enclosure && same;
    detail += fmt("n=%.0f floor %.6f enclosure %.6f ", n, floor, enclosure) + (same ? "reproducible" : "NOT reproducible") +
              "; ";
  }
  const double t = seconds_since(t0);
  report(9, "counterexample probe goodness floor", ok && t < 600.0, detail + fmt("%.1f s", t));
}

}  // namespace

int main() {
  parameter_chain();
  sandwich();
  goodness_vs_operator_norm();
  equivalence_suite();
  two_sign_vectors();
  sweeps();
  monte_carlo();
  approx_eigenvector();
  counterexample_probe();
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
