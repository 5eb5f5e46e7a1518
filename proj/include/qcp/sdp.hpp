#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcp/gep.hpp"
#include "qcp/moments.hpp"
#include "qcp/rng.hpp"

namespace qcp {

// Mixed-input pipeline: moment matrices from the ensemble, then the same
// realify -> kernel_projection -> solve_pencil -> backmap chain. The result
// is the rank-one optimum of the moment-matrix SDP.
inline GepSolution mixed_pipeline(const MixedState& rho,
                                  const SearchFamily& family,
                                  const CcopInstance& inst,
                                  const FeasibleSubspaceView& view,
                                  double kernel_tol = 1e-9,
                                  double ridge = 1e-10) {
  const MomentMatrices M = mixed_exact_moments(rho, family, inst, view);
  return solve_gep(M, kernel_tol, ridge);
}

// Random feasible point of the realified SDP: X = sum c_i x_i x_i' with the
// x_i drawn in ker(G_real) and positive c_i scaled so tr[F_real X] = 1.
inline Eigen::MatrixXd random_feasible_psd(const MomentMatrices& M, int rank,
                                           std::uint64_t seed) {
  if (rank < 1) throw std::invalid_argument("random_feasible_psd: rank must be >= 1");
  const RealEmbedding E = realify(M);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E.Gr);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double cutoff = 1e-9 * std::max(1.0, ev.maxCoeff());
  int m = 0;
  while (m < ev.size() && ev(m) < cutoff) ++m;
  if (m == 0) throw NoFeasibleDirection{};
  const Eigen::MatrixXd kernel = es.eigenvectors().leftCols(m);

  SplitMix64 rng(derive_seed(seed, {0x70736478ULL}));
  const int d = 2 * M.ell;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(d, d);
  for (int r = 0; r < rank; ++r) {
    Eigen::VectorXd coords(m);
    for (int i = 0; i < m; ++i) coords(i) = 2.0 * rng.uniform() - 1.0;
    const Eigen::VectorXd x = kernel * coords;
    const double c = 0.1 + rng.uniform();
    X += c * x * x.transpose();
  }
  const double trace_f = (E.Fr * X).trace();
  if (!(trace_f > 1e-14))
    throw std::runtime_error("random_feasible_psd: degenerate draw, tr[FX] ~ 0");
  return X / trace_f;
}

struct DominanceReport {
  int trials = 0;
  double min_gap = 0.0;   // min over trials of tr[HX] - lambda0
  int violations = 0;     // trials with gap < -1e-8
};

// Samples feasible PSD matrices of bounded rank and records how far their
// objective stays above lambda0; rank-one extreme-point optimality predicts
// no violations.
inline DominanceReport dominance_check(const MomentMatrices& M, double lambda0,
                                       int trials, int max_rank,
                                       std::uint64_t seed) {
  const RealEmbedding E = realify(M);
  DominanceReport report;
  report.trials = trials;
  report.min_gap = std::numeric_limits<double>::infinity();
  SplitMix64 rng(derive_seed(seed, {0x646f6dULL}));
  for (int t = 0; t < trials; ++t) {
    const int rank = 1 + static_cast<int>(rng.next() %
                                          static_cast<std::uint64_t>(max_rank));
    const Eigen::MatrixXd X = random_feasible_psd(
        M, rank, derive_seed(seed, {0x7472ULL, static_cast<std::uint64_t>(t)}));
    const double gap = (E.Hr * X).trace() - lambda0;
    report.min_gap = std::min(report.min_gap, gap);
    if (gap < -1e-8) ++report.violations;
  }
  return report;
}

struct Prop1Report {
  bool holds = false;
  std::string reason;
  Eigen::VectorXcd witness;  // violating direction when holds == false
};

// Checks 0 <= H <= F and ker F <= ker H within numerical tolerances.
inline Prop1Report prop1_precondition(const MomentMatrices& M) {
  Prop1Report report;
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M.H);
    const int i = 0;  // ascending, smallest first
    if (es.eigenvalues()(i) < -1e-10) {
      report.reason = "H has a negative eigenvalue";
      report.witness = es.eigenvectors().col(i);
      return report;
    }
  }
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M.F - M.H);
    if (es.eigenvalues()(0) < -1e-10) {
      report.reason = "F - H has a negative eigenvalue";
      report.witness = es.eigenvectors().col(0);
      return report;
    }
  }
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M.F);
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      if (es.eigenvalues()(i) >= 1e-9) break;
      const Eigen::VectorXcd v = es.eigenvectors().col(i);
      if ((M.H * v).norm() > 1e-8) {
        report.reason = "ker F is not contained in ker H";
        report.witness = v;
        return report;
      }
    }
  }
  report.holds = true;
  return report;
}

} // namespace qcp
