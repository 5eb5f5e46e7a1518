#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "qcp/sdp.hpp"

using namespace qcp;
using Catch::Approx;

namespace {

const CcopInstance kMis = qcp_test::mis_3path();
const FeasibleSubspaceView kView(kMis);

MomentMatrices mis_moments(std::uint64_t family_seed, int ell = 4) {
  const SearchFamily fam = qcp_test::random_family(kMis, ell, family_seed);
  const StateVector iota =
      prepare_initial(kMis, kView, InitialMode::uniform_feasible);
  return exact_moments(iota, fam, kMis, kView);
}

} // namespace

TEST_CASE("random feasible PSD points") {
  const MomentMatrices M = mis_moments(100);
  const RealEmbedding E = realify(M);
  for (int rank = 1; rank <= 4; ++rank) {
    const Eigen::MatrixXd X = random_feasible_psd(M, rank, 40 + rank);
    CHECK((X - X.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
    CHECK((E.Fr * X).trace() == Approx(1.0).margin(1e-10));
    CHECK(std::abs((E.Gr * X).trace()) < 1e-8);
  }
  CHECK_THROWS_AS(random_feasible_psd(M, 0, 1), std::invalid_argument);
}

TEST_CASE("rank-one dominance over random feasible points") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const MomentMatrices M = mis_moments(200 + s);
    const GepSolution sol = solve_gep(M, 1e-9, 1e-10);
    const DominanceReport rep = dominance_check(M, sol.lambda0, 40, 4, 77 + s);
    CHECK(rep.trials == 40);
    CHECK(rep.violations == 0);
    CHECK(rep.min_gap > -1e-8);
  }
}

TEST_CASE("SDP precondition check") {
  SECTION("rescaled instance passes") {
    const CcopInstance scaled = rescale_for_prop1(kMis);
    const FeasibleSubspaceView view(scaled);
    const SearchFamily fam = qcp_test::random_family(scaled, 4, 300);
    const StateVector iota =
        prepare_initial(scaled, view, InitialMode::uniform_feasible);
    const MomentMatrices M = exact_moments(iota, fam, scaled, view);
    const Prop1Report rep = prop1_precondition(M);
    CHECK(rep.holds);
    CHECK(rep.reason.empty());
  }
  SECTION("oversized objective fails the upper bound") {
    const MomentMatrices M = mis_moments(310);  // c_upper > 1, H > F somewhere
    const Prop1Report rep = prop1_precondition(M);
    CHECK_FALSE(rep.holds);
    CHECK(rep.reason == "F - H has a negative eigenvalue");
    // the witness is a genuine violating direction
    const double h = (rep.witness.adjoint() * M.H * rep.witness)(0).real();
    const double f = (rep.witness.adjoint() * M.F * rep.witness)(0).real();
    CHECK(h > f);
  }
  SECTION("negative H eigenvalue is detected") {
    MomentMatrices M;
    M.ell = 2;
    M.F = Eigen::MatrixXcd::Identity(2, 2);
    M.G = Eigen::MatrixXcd::Zero(2, 2);
    M.H = -0.5 * Eigen::MatrixXcd::Identity(2, 2);
    CHECK(prop1_precondition(M).reason == "H has a negative eigenvalue");
  }
  SECTION("kernel containment failure is detected") {
    // tiny off-diagonal coupling slips past the eigenvalue tolerances of the
    // first two checks but gives ||H v|| ~ 5e-6 on the F-kernel vector
    MomentMatrices M;
    M.ell = 2;
    M.F = Eigen::MatrixXcd::Zero(2, 2);
    M.F(0, 0) = 1.0;  // e2 in ker F
    M.G = Eigen::MatrixXcd::Zero(2, 2);
    M.H = Eigen::MatrixXcd::Zero(2, 2);
    M.H(0, 0) = 0.5;
    M.H(0, 1) = M.H(1, 0) = 5e-6;
    CHECK(prop1_precondition(M).reason == "ker F is not contained in ker H");
  }
}

TEST_CASE("mixed pipeline") {
  const SearchFamily fam = qcp_test::random_family(kMis, 4, 400);
  const StateVector a = qcp_test::random_feasible_state(kView, 401);
  const StateVector b = qcp_test::random_feasible_state(kView, 402);

  SECTION("pure ensemble reduces to the pure pipeline") {
    const MixedState rho{{{1.0, a}}};
    const GepSolution mixed = mixed_pipeline(rho, fam, kMis, kView);
    const MomentMatrices M = exact_moments(a, fam, kMis, kView);
    const GepSolution pure = solve_gep(M, 1e-9, 1e-10);
    CHECK(mixed.lambda0 == Approx(pure.lambda0).margin(1e-10));
  }

  SECTION("solution is feasible and optimal for the averaged moments") {
    const MixedState rho{{{0.4, a}, {0.6, b}}};
    const GepSolution sol = mixed_pipeline(rho, fam, kMis, kView);
    CHECK(sol.residual_f < 1e-8);
    CHECK(sol.residual_g < 1e-8);
    CHECK(sol.dual_gap < 1e-7);
    const MomentMatrices M = mixed_exact_moments(rho, fam, kMis, kView);
    const DominanceReport rep = dominance_check(M, sol.lambda0, 30, 3, 7);
    CHECK(rep.violations == 0);
  }

  SECTION("near-pure perturbation moves lambda0 only slightly") {
    const MixedState pure{{{1.0, a}}};
    const double eps = 1e-4;
    const MixedState near{{{1.0 - eps, a}, {eps, b}}};
    const double l_pure = mixed_pipeline(pure, fam, kMis, kView).lambda0;
    const double l_near = mixed_pipeline(near, fam, kMis, kView).lambda0;
    CHECK(std::abs(l_near - l_pure) < 100.0 * eps * kMis.c_upper);
  }
}
