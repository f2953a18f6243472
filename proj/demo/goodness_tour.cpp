// A short tour: how good are points of a random 2-D subspace, and how does
// that change when the l1 weight is switched off?
//
//   dvlab_demo [n] [seed]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "dvlab/dvlab.hpp"

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 32;
  const std::uint64_t master = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 7;
  if (n < 4) {
    std::fprintf(stderr, "n must be at least 4\n");
    return 2;
  }
  const dvlab::Seed seed{master, 0};
  const dvlab::ProjectionPair proj = dvlab::sample_projection(n, dvlab::default_rank(n), dvlab::derive(seed, "projection"));
  const dvlab::TwoDSubspace Y = dvlab::random_subspace(n, dvlab::derive(seed, "subspace"));

  std::printf("n = %d, rank P = %d, seed = %llu\n\n", n, proj.rank, static_cast<unsigned long long>(master));
  std::printf("%8s %14s %14s %12s %10s\n", "eta", "worst eps*", "enclosure", "euclid", "theta*");
  for (double eta : {0.0, 1.0 / 64, 1.0 / 16, 1.0 / 4}) {
    const dvlab::NormSpec spec(proj, eta);
    const dvlab::WorstGoodness wg = dvlab::worst_goodness(spec, Y, 512);
    const dvlab::EuclideanConstant ec = dvlab::euclidean_constant(spec, Y, 512);
    std::printf("%8.5f %14.6e %14.6e %12.8f %10.6f\n", eta, wg.deficiency, wg.enclosure, ec.ratio, wg.theta_star);
  }

  // A point in range(P) is 0-good when eta = 0; a generic point is not.
  const dvlab::NormSpec flat(proj, 0.0);
  const dvlab::Vector inside = proj.basis.col(0);
  const dvlab::Vector generic = dvlab::sample_unit_sphere(n, dvlab::derive(seed, "point"));
  std::printf("\neta = 0: deficiency of a basis vector of range(P) = %.3e\n", dvlab::goodness(flat, inside).raw_deficiency);
  std::printf("eta = 0: deficiency of a generic unit vector    = %.3e\n", dvlab::goodness(flat, generic).raw_deficiency);
  return 0;
}
