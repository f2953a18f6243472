#include <gtest/gtest.h>

#include <cmath>

#include "dvlab/lemmas.hpp"

using namespace dvlab;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

Vector basis_vector(int n, int i) {
  Vector e = Vector::Zero(n);
  e(i) = 1.0;
  return e;
}

const LemmaReport& find(const std::vector<LemmaReport>& rs, const std::string& id) {
  for (const auto& r : rs)
    if (r.lemma_id == id) return r;
  throw std::runtime_error("missing report " + id);
}

}  // namespace

TEST(Report, PassIffMarginWithinTolerance) {
  EXPECT_TRUE(upper_report("x", "", 1.0, 1.0 + 5e-7, 1e-6).passed());
  EXPECT_FALSE(upper_report("x", "", 1.0, 1.0 + 2e-6, 1e-6).passed());
  EXPECT_TRUE(lower_report("x", "", 1.0, 1.0 - 5e-7, 1e-6).passed());
  const LemmaReport na = not_applicable("x", "", "why");
  EXPECT_FALSE(na.passed());
  EXPECT_FALSE(na.failed());
}

TEST(GoodnessEquivalence, TrivialNorm) {
  const NormSpec spec(zero_projection(6), 0.0);
  const auto rs = verify_goodness_equivalence(spec, random_subspace(6, Seed{1, 1}), 0.0, Seed{1, 2});
  for (const auto& r : rs) {
    EXPECT_EQ(r.status, Status::pass) << r.lemma_id;
    EXPECT_GE(r.margin, -r.tolerance);
  }
}

TEST(GoodnessEquivalence, InsideRangeOfP) {
  const ProjectionPair proj = sample_projection(8, 4, Seed{1, 3});
  const NormSpec spec(proj, 0.0);
  const auto rs = verify_goodness_equivalence(spec, random_subspace_within(proj.basis, Seed{1, 4}), 0.0, Seed{1, 5});
  EXPECT_EQ(find(rs, "goodness_equivalence.forward").status, Status::pass);
  EXPECT_EQ(find(rs, "goodness_equivalence.converse").status, Status::pass);
}

TEST(GoodnessEquivalence, MixedPlaneIsNotApplicable) {
  const NormSpec spec(coordinate_projection(4, 2), 0.0);
  const TwoDSubspace Y = make_subspace(basis_vector(4, 0), basis_vector(4, 3));
  const auto rs = verify_goodness_equivalence(spec, Y, 0.05, Seed{1, 6});
  const LemmaReport& fwd = find(rs, "goodness_equivalence.forward");
  EXPECT_EQ(fwd.status, Status::not_applicable);
  EXPECT_NEAR(fwd.get("euclidean_ratio"), std::sqrt(2.0), 1e-6);
  EXPECT_EQ(find(rs, "goodness_equivalence.converse").status, Status::not_applicable);
}

TEST(GoodnessEquivalence, AdaptiveEpsilonOnRandomPlanes) {
  const NormSpec spec(sample_projection(16, 8, Seed{1, 7}), 1.0 / 16);
  EquivalenceOptions opt;
  opt.grid_size = 256;
  for (std::uint64_t t = 0; t < 3; ++t)
    for (const auto& r : verify_goodness_equivalence(spec, random_subspace(16, Seed{2, t}), std::nullopt, Seed{3, t}, opt))
      EXPECT_FALSE(r.failed()) << r.lemma_id << ' ' << r.instance;
}

TEST(SupportCharacterization, ConverseFactor) {
  EXPECT_NEAR(converse_epsilon(0.01, 2.0), 1.01 * 1.02 / 0.98 + 0.04 - 1.0, 1e-15);
  EXPECT_NEAR(converse_epsilon(0.01, 2.0), 0.09122, 1e-5);
}

TEST(SupportCharacterization, EuclideanNormAllDeltas) {
  const NormSpec spec(zero_projection(5), 0.0);
  const Vector x = sample_unit_sphere(5, Seed{4, 1});
  for (double delta : {0.5, 0.1, 0.01}) {
    const auto rs = verify_support_characterization(spec, x, delta);
    EXPECT_EQ(find(rs, "support_characterization.converse").status, Status::pass);
    EXPECT_EQ(find(rs, "support_characterization.forward").status, Status::pass);
  }
}

TEST(SupportCharacterization, MixedPointRecordsWitness) {
  const NormSpec spec(coordinate_projection(4, 2), 0.0);
  const auto rs = verify_support_characterization(spec, vec({1, 0, 1, 0}) / std::sqrt(2.0), 1.0);
  const LemmaReport& fwd = find(rs, "support_characterization.forward");
  EXPECT_FALSE(fwd.failed());
}

TEST(ApproxEigenvector, EqualityInstance) {
  const LemmaReport r = verify_approx_eigenvector(coordinate_projection(2, 1), vec({1, 1}) / std::sqrt(2.0), 1.5);
  EXPECT_EQ(r.status, Status::pass);
  EXPECT_NEAR(r.measured, 0.5, 1e-12);
  EXPECT_NEAR(r.bound, 0.5, 1e-12);
}

TEST(ApproxEigenvector, ExactEigenvectors) {
  const ProjectionPair p = coordinate_projection(3, 1);
  EXPECT_NEAR(verify_approx_eigenvector(p, basis_vector(3, 0), 2.0).measured, 0.0, 1e-15);
  EXPECT_NEAR(verify_approx_eigenvector(p, basis_vector(3, 2), 1.0).measured, 0.0, 1e-15);
  EXPECT_EQ(verify_approx_eigenvector(p, basis_vector(3, 2), 3.0).status, Status::not_applicable);
  EXPECT_FALSE(approx_eigenvector_sweep(6, 2000, Seed{5, 1}).failed());
}

TEST(SubspaceVolume, FullRadiusAndRefusal) {
  const LemmaReport r = mc_subspace_volume(5, 2, 1.0, 1000, Seed{6, 1});
  EXPECT_EQ(r.measured, 1.0);
  EXPECT_GE(r.bound, 1.0);
  EXPECT_TRUE(r.passed());
  EXPECT_THROW(mc_subspace_volume(5, 2, 0.1, 999, Seed{6, 1}), std::domain_error);
}

TEST(SubspaceVolume, LineInPlaneMatchesOracle) {
  const LemmaReport r = mc_subspace_volume(2, 1, 0.1, 200000, Seed{6, 2});
  EXPECT_TRUE(r.passed());
  const double se = std::sqrt(0.063768 * (1 - 0.063768) / 200000);
  EXPECT_NEAR(r.measured, 0.063768, 4 * se);
}

TEST(SubspaceVolume, ThreadCountDoesNotMatter) {
  // Chunks own their streams, so the count is identical however they are scheduled.
  const LemmaReport a = mc_subspace_volume(3, 1, 0.2, 5000, Seed{6, 3});
  const LemmaReport b = mc_subspace_volume(3, 1, 0.2, 5000, Seed{6, 3});
  EXPECT_EQ(a.measured, b.measured);
  EXPECT_EQ(a.margin, b.margin);
}

TEST(StructuredIncidence, FullSupportIsCertain) {
  const LemmaReport r = small_support_incidence(4, 2, 4, 0.0, StructureMode::small_support, 1000, Seed{7, 1});
  EXPECT_EQ(r.measured, 1.0);
  EXPECT_TRUE(r.passed());
}

TEST(StructuredIncidence, AxesMatchCapOracle) {
  const LemmaReport r = small_support_incidence(6, 1, 1, 0.01, StructureMode::small_support, 20000, Seed{7, 2});
  EXPECT_TRUE(r.passed());
  const double oracle = r.get("oracle");
  ASSERT_TRUE(std::isfinite(oracle));
  EXPECT_NEAR(oracle, 6 * subspace_incidence_probability(6, 1, 0.01), 1e-12);
  const double se = std::sqrt(std::max(oracle, 1.0 / 20000) / 20000);
  EXPECT_NEAR(r.measured, oracle, 4 * se + 1.0 / 20000);
}

TEST(StructuredIncidence, ConstantVectorsMatchOracle) {
  const LemmaReport r = small_support_incidence(6, 3, 1, 0.05, StructureMode::distinct_values, 20000, Seed{7, 3});
  EXPECT_TRUE(r.passed());
  const double oracle = r.get("oracle");
  ASSERT_TRUE(std::isfinite(oracle));
  const double se = std::sqrt(oracle * (1 - oracle) / 20000);
  EXPECT_NEAR(r.measured, oracle, 4 * se + 1.0 / 20000);
}

TEST(PickGamma, DefaultRadiusHasNoHits) {
  const LemmaReport r = verify_pick_gamma(8, 2000, Seed{8, 1});
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.measured, 0.0);
  EXPECT_EQ(verify_pick_gamma(8, 100, Seed{8, 2}, 1.0).status, Status::not_applicable);
}

TEST(SignContinuity, Examples) {
  const Vector x = vec({0.5, 0.5, 0.5, 0.5});
  EXPECT_EQ(verify_sign_continuity(x, x, 0.1).measured, 0.0);
  const LemmaReport r = verify_sign_continuity(x, vec({-0.5, 0.5, 0.5, 0.5}), 1.0);
  EXPECT_EQ(r.measured, 1.0);
  EXPECT_EQ(r.bound, 4.0);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(verify_sign_continuity(x, -x, 100.0).measured, 0.0);
  EXPECT_FALSE(sign_continuity_sweep(16, 5000, Seed{9, 1}).failed());
}

TEST(Typicality, ArcMeasureInThePlane) {
  const TwoDSubspace Y = make_subspace(basis_vector(2, 0), basis_vector(2, 1));
  const std::int64_t N = 200000;
  const LemmaReport r = verify_typicality_probability(Y, 0.1, 0.5, 0.1, N, Seed{10, 1});
  const double oracle = 4.0 * std::asin(0.1 / std::sqrt(2.0)) / kPi;
  EXPECT_NEAR(r.measured, oracle, 4 * std::sqrt(oracle * (1 - oracle) / N));
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(verify_typicality_probability(Y, 0.0, 0.5, 0.1, 10000, Seed{10, 2}).measured, 0.0);
}

TEST(TwoSignVectors, Examples) {
  const Vector u = vec({0.5, 0.5, 0.5, 0.5});
  const LemmaReport r = verify_two_sign_vectors(u, vec({0.5, 0.5, -0.5, -0.5}));
  EXPECT_NEAR(r.measured, 1.0, 1e-15);
  EXPECT_NEAR(r.bound, 1.0, 1e-15);
  EXPECT_TRUE(r.passed());
  EXPECT_NEAR(verify_two_sign_vectors(u, u).measured, 0.0, 1e-15);
  EXPECT_NEAR(verify_two_sign_vectors(u, -u).get("lambda"), -1.0, 1e-15);
  EXPECT_THROW(verify_two_sign_vectors(u, vec({0.5, 0.1, 0.5, 0.5})), std::domain_error);
}

TEST(TwoSignVectors, ExhaustiveSmall) {
  const LemmaReport r = exhaustive_two_sign_vectors(6);
  EXPECT_TRUE(r.passed());
  EXPECT_GT(r.trials, 0);
}

TEST(FindLambda, Examples) {
  const Vector e1 = basis_vector(3, 0), e2 = basis_vector(3, 1);
  LemmaReport r = verify_find_lambda(1, 0, 0, 1, e1, e2);
  EXPECT_NEAR(r.measured, 1.0, 1e-15);
  EXPECT_NEAR(r.bound, 1.0, 1e-15);
  EXPECT_TRUE(r.passed());
  r = verify_find_lambda(1, 2, 2, 4, e1, e2);
  EXPECT_NEAR(r.measured, 0.0, 1e-15);
  EXPECT_EQ(verify_find_lambda(1, 2, 0, 0, e1, e2).status, Status::not_applicable);
}

TEST(FindLambda, ClosedFormMatchesGridSearch) {
  Engine e = make_engine(Seed{11, 1});
  std::normal_distribution<double> g;
  for (int t = 0; t < 5; ++t) {
    const Matrix f = random_frame(6, 2, Seed{11, static_cast<std::uint64_t>(10 + t)});
    const Vector x = f.col(0) * 1.7, y = f.col(1) * 0.6;
    const double a = g(e), b = g(e), c = g(e), d = g(e);
    const Vector u = a * x + b * y, v = c * x + d * y;
    const double lam = (a * c * x.squaredNorm() + b * d * y.squaredNorm()) / v.squaredNorm();
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 1000000; ++i) best = std::min(best, (u - (lam - 1.0 + 2e-6 * i) * v).norm());
    EXPECT_NEAR(verify_find_lambda(a, b, c, d, x, y).measured, best, 1e-9);
  }
}

TEST(ApproxOrthonormal, Examples) {
  EXPECT_NEAR(verify_approx_orthonormal(basis_vector(3, 0), Matrix(3, 0)).measured, 1.0, 1e-15);
  Matrix U(2, 2);
  U << 1, 0, 0, 1;
  Matrix W(2, 1);
  W << 1, 1;
  W /= std::sqrt(2.0);
  const LemmaReport r = verify_approx_orthonormal(U, W);
  EXPECT_NEAR(r.measured, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_TRUE(r.passed());
  EXPECT_FALSE(approx_orthonormal_sweep(5, 10, 10000, Seed{12, 1}).failed());
}

TEST(SigmaSpread, RandomInstance) {
  const SignSetAnalysis a = sigma_set(random_subspace(64, Seed{13, 1}), 0.25, 0.01, 0.5, 0.5, 2048);
  ASSERT_GE(a.k, 5);
  EXPECT_TRUE(has_interval_structure(a));
  const LemmaReport r = verify_sigma_spread(a, random_frame(64, 4, Seed{13, 2}), 0.5);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(verify_sigma_spread(a, random_frame(64, 3, Seed{13, 3}), 0.5).status, Status::not_applicable);
}

TEST(SigmaSpread, BrokenIntervalStructureIsFlagged) {
  SignSetAnalysis a = sigma_set(random_subspace(64, Seed{13, 4}), 0.25, 0.01, 0.5, 0.5, 1024);
  ASSERT_FALSE(a.samples.empty());
  // Alternate the signs along phase order: no 2-D subspace produces that.
  Vector& s = a.samples.front();
  for (std::size_t j = 0; j < a.phase_order.size(); ++j)
    s(a.phase_order[j]) = (j % 2 ? -1.0 : 1.0) * std::abs(s(a.phase_order[j]));
  a.k = std::max(a.k, 5);
  EXPECT_EQ(verify_sigma_spread(a, random_frame(64, 4, Seed{13, 5}), 0.5).status, Status::not_applicable);
}

TEST(SigmaSpread, FewPairsIsNotApplicable) {
  const SignSetAnalysis a = sigma_set(make_subspace(basis_vector(2, 0), basis_vector(2, 1)), 0.1, 0.01, 0.5, 0.5, 256);
  EXPECT_EQ(verify_sigma_spread(a, random_frame(2, 2, Seed{13, 6}), 0.5).status, Status::not_applicable);
}

TEST(ParameterChainReport, DefaultSet) {
  ParameterChainResult res;
  const LemmaReport r = parameter_chain_report(ParameterSet{}, &res);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.get("log2_epsilon"), -1017.0);
  EXPECT_EQ(res.conditions.size(), 12u);
}

TEST(CounterexampleProbe, FlatNormHasZeroFloor) {
  const NormSpec spec(zero_projection(16), 0.0);
  const ProbeResult p = verify_counterexample_probe(spec, 5, 256, Seed{14, 1});
  EXPECT_NEAR(p.report.get("floor"), 0.0, 1e-9);
  EXPECT_FALSE(p.report.asserting);
  EXPECT_FALSE(p.report.failed());
}

TEST(CounterexampleProbe, PositiveFloorReproducible) {
  const NormSpec spec(sample_projection(32, 16, Seed{14, 2}), 1.0 / 16);
  const ProbeResult a = verify_counterexample_probe(spec, 8, 512, Seed{14, 3});
  const ProbeResult b = verify_counterexample_probe(spec, 8, 512, Seed{14, 3});
  EXPECT_EQ(a.report.get("floor"), b.report.get("floor"));
  EXPECT_GT(a.report.get("floor"), a.report.get("enclosure"));
  EXPECT_EQ(a.report.status, Status::pass);
}
