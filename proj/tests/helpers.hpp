#pragma once

// Shared fixtures and independent dense-matrix oracles for the test suites.
// Everything here recomputes expectations from first principles (dense
// operators, eigendecompositions, exhaustive enumeration) so that library
// results are checked against a second route.

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qcp/ccop.hpp"
#include "qcp/moments.hpp"
#include "qcp/rng.hpp"
#include "qcp/simulator.hpp"

namespace qcp_test {

using qcp::Complex;

inline Eigen::VectorXcd to_eigen(const qcp::StateVector& s) {
  Eigen::VectorXcd v(static_cast<int>(s.dim()));
  for (std::size_t i = 0; i < s.dim(); ++i) v(static_cast<int>(i)) = s.amps[i];
  return v;
}

inline qcp::StateVector from_eigen(const Eigen::VectorXcd& v, int n_qubits) {
  qcp::StateVector s = qcp::StateVector::zero(n_qubits);
  for (int i = 0; i < v.size(); ++i) s.amps[static_cast<std::size_t>(i)] = v(i);
  return s;
}

// Haar-ish random unit vector (independent gaussian components, normalized).
inline qcp::StateVector random_state(int n_qubits, std::uint64_t seed) {
  qcp::SplitMix64 rng(seed);
  qcp::StateVector s = qcp::StateVector::zero(n_qubits);
  for (auto& a : s.amps) {
    // Box-Muller
    const double u1 = std::max(rng.uniform(), 1e-300);
    const double u2 = rng.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    a = Complex{r * std::cos(6.283185307179586 * u2),
                r * std::sin(6.283185307179586 * u2)};
  }
  const double norm = s.norm();
  for (auto& a : s.amps) a /= norm;
  return s;
}

// Random feasible superposition (support restricted to S).
inline qcp::StateVector random_feasible_state(const qcp::FeasibleSubspaceView& view,
                                              std::uint64_t seed) {
  qcp::SplitMix64 rng(seed);
  qcp::StateVector s = qcp::StateVector::zero(view.n_qubits());
  for (std::uint64_t b : view.labels()) {
    const double u1 = std::max(rng.uniform(), 1e-300);
    const double u2 = rng.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    s.amps[b] = Complex{r * std::cos(6.283185307179586 * u2),
                        r * std::sin(6.283185307179586 * u2)};
  }
  const double norm = s.norm();
  for (auto& a : s.amps) a /= norm;
  return s;
}

// exp(-i t A) for hermitian A via dense eigendecomposition.
inline Eigen::MatrixXcd expm_hermitian(const Eigen::MatrixXcd& A, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
  Eigen::VectorXcd phases(es.eigenvalues().size());
  for (int i = 0; i < phases.size(); ++i)
    phases(i) = std::polar(1.0, -t * es.eigenvalues()(i));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Dense transverse-field operator B = sum_i sigma_x^(i).
inline Eigen::MatrixXcd dense_mixer_hamiltonian(int n) {
  const int dim = 1 << n;
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(dim, dim);
  for (int q = 0; q < n; ++q)
    for (int b = 0; b < dim; ++b) B(b ^ (1 << q), b) += 1.0;
  return B;
}

// Diagonal projector onto the infeasible-label subspace (complement of P_S).
inline Eigen::MatrixXcd dense_infeasible_projector(const qcp::CcopInstance& inst) {
  const int dim = 1 << inst.n;
  Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(dim, dim);
  for (int b = 0; b < dim; ++b)
    if (!inst.feasible(static_cast<std::uint64_t>(b))) Q(b, b) = 1.0;
  return Q;
}

// Dense projector |S><S| from the cached feasible labels.
inline Eigen::MatrixXcd dense_feasible_projector(const qcp::FeasibleSubspaceView& view) {
  const int dim = 1 << view.n_qubits();
  Eigen::VectorXcd s = Eigen::VectorXcd::Zero(dim);
  const double a = 1.0 / std::sqrt(static_cast<double>(view.labels().size()));
  for (std::uint64_t b : view.labels()) s(static_cast<int>(b)) = a;
  return s * s.adjoint();
}

// Dense matrix of a search unitary, column by column.
inline Eigen::MatrixXcd dense_unitary(const qcp::SearchUnitary& u,
                                      const qcp::CcopInstance& inst,
                                      const qcp::FeasibleSubspaceView& view) {
  const int dim = 1 << inst.n;
  Eigen::MatrixXcd U(dim, dim);
  for (int col = 0; col < dim; ++col) {
    qcp::StateVector e = qcp::StateVector::zero(inst.n);
    e.amps[static_cast<std::size_t>(col)] = 1.0;
    U.col(col) = to_eigen(qcp::apply_search_unitary(e, u, inst, view));
  }
  return U;
}

// M_alpha |iota> computed densely.
inline Eigen::VectorXcd dense_m_alpha(const qcp::StateVector& iota,
                                      const qcp::SearchFamily& family,
                                      const Eigen::VectorXcd& alpha,
                                      const qcp::CcopInstance& inst,
                                      const qcp::FeasibleSubspaceView& view) {
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(static_cast<int>(iota.dim()));
  for (std::size_t j = 0; j < family.size(); ++j)
    acc += alpha(static_cast<int>(j)) *
           to_eigen(qcp::apply_search_unitary(iota, family.unitaries[j], inst, view));
  return acc;
}

inline Eigen::MatrixXcd dense_objective(const qcp::CcopInstance& inst) {
  const int dim = 1 << inst.n;
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(dim, dim);
  for (int b = 0; b < dim; ++b) C(b, b) = inst.objective(static_cast<std::uint64_t>(b));
  return C;
}

// The 3-path MIS instance used throughout (edges 0-1 and 1-2).
inline qcp::CcopInstance mis_3path() {
  return qcp::make_mis(3, {{0, 1}, {1, 2}});
}

// Random family of the given size ending in the identity.
inline qcp::SearchFamily random_family(const qcp::CcopInstance& inst, int ell,
                                       std::uint64_t seed,
                                       bool feasibility_preserving = false) {
  qcp::FamilySpec spec;
  qcp::SplitMix64 rng(seed);
  for (int j = 0; j + 1 < ell; ++j) {
    if (feasibility_preserving) {
      spec.push_back({(rng.next() & 1) ? qcp::UnitaryKind::phase_separator
                                       : qcp::UnitaryKind::grover_mixer,
                      0});
    } else {
      switch (rng.next() % 4) {
        case 0: spec.push_back({qcp::UnitaryKind::phase_separator, 0}); break;
        case 1: spec.push_back({qcp::UnitaryKind::transverse_mixer, 0}); break;
        case 2: spec.push_back({qcp::UnitaryKind::grover_mixer, 0}); break;
        default: spec.push_back({qcp::UnitaryKind::local_circuit, 3}); break;
      }
    }
  }
  spec.push_back({qcp::UnitaryKind::identity, 0});
  return qcp::build_search_family(inst, spec, seed);
}

// Random complex vector with gaussian entries.
inline Eigen::VectorXcd random_alpha(int ell, std::uint64_t seed) {
  qcp::SplitMix64 rng(seed);
  Eigen::VectorXcd a(ell);
  for (int j = 0; j < ell; ++j) {
    const double u1 = std::max(rng.uniform(), 1e-300);
    const double u2 = rng.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    a(j) = Complex{r * std::cos(6.283185307179586 * u2),
                   r * std::sin(6.283185307179586 * u2)};
  }
  return a;
}

} // namespace qcp_test
