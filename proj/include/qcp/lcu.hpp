#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qcp/rng.hpp"
#include "qcp/simulator.hpp"

namespace qcp {

// Ancilla register state (sqrt(alpha), 0, ...)/sqrt(|alpha|_1) with
// entrywise principal square roots and zero padding up to 2^ceil(log2 l).
struct AncillaPrep {
  std::vector<Complex> amplitudes;
  int n_qubits = 0;
  double alpha_l1 = 0.0;
};

inline AncillaPrep ancilla_prep(const Eigen::VectorXcd& alpha) {
  const int ell = static_cast<int>(alpha.size());
  double l1 = 0.0;
  for (int j = 0; j < ell; ++j) l1 += std::abs(alpha(j));
  if (!(l1 > 0.0)) throw std::invalid_argument("ancilla_prep: alpha is zero");
  int aq = 0;
  while ((1 << aq) < ell) ++aq;
  AncillaPrep prep;
  prep.n_qubits = aq;
  prep.alpha_l1 = l1;
  prep.amplitudes.assign(std::size_t{1} << aq, Complex{0.0, 0.0});
  const double inv = 1.0 / std::sqrt(l1);
  for (int j = 0; j < ell; ++j)
    prep.amplitudes[j] = std::sqrt(alpha(j)) * inv;  // principal branch
  return prep;
}

// sum_j (U_j|iota>) (x) (psi_j |j>_a); padding labels act as identity and
// carry zero amplitude.
inline StateVector compound_apply(const StateVector& iota,
                                  const AncillaPrep& prep,
                                  const SearchFamily& family,
                                  const CcopInstance& inst,
                                  const FeasibleSubspaceView& view) {
  const std::size_t ell = family.size();
  if (prep.amplitudes.size() < ell)
    throw std::invalid_argument("compound_apply: prep inconsistent with family size");
  const std::size_t main_dim = iota.dim();
  StateVector joint = StateVector::zero(iota.n_qubits + prep.n_qubits);
  for (std::size_t j = 0; j < ell; ++j) {
    if (prep.amplitudes[j] == Complex{0.0, 0.0}) continue;
    const StateVector sj =
        apply_search_unitary(iota, family.unitaries[j], inst, view);
    for (std::size_t b = 0; b < main_dim; ++b)
      joint.amps[j * main_dim + b] += prep.amplitudes[j] * sj.amps[b];
  }
  return joint;
}

struct LcuOutcome {
  bool success = false;
  StateVector post_state;        // defined on success
  double success_probability = 0.0;
  int attempts = 0;
  bool exact_fallback = false;
};

// Projects the ancilla onto |xi>_a = (conj(sqrt(alpha)), 0)/sqrt(|alpha|_1).
// The success branch carries |alpha|_1^{-1} M_alpha |iota> on the main
// register; success is drawn with probability |M_alpha iota|^2 / |alpha|_1^2.
inline LcuOutcome postselect(const StateVector& joint,
                             const Eigen::VectorXcd& alpha, int main_qubits,
                             std::uint64_t seed) {
  const int ell = static_cast<int>(alpha.size());
  const std::size_t main_dim = std::size_t{1} << main_qubits;
  double l1 = 0.0;
  for (int j = 0; j < ell; ++j) l1 += std::abs(alpha(j));
  if (!(l1 > 0.0)) throw std::invalid_argument("postselect: alpha is zero");
  const double inv = 1.0 / std::sqrt(l1);

  // <xi|_a contracts the ancilla index; conj(xi_j) = sqrt(alpha_j)/sqrt(l1)
  std::vector<Complex> branch(main_dim, Complex{0.0, 0.0});
  for (int j = 0; j < ell; ++j) {
    const Complex w = std::sqrt(alpha(j)) * inv;
    if (w == Complex{0.0, 0.0}) continue;
    for (std::size_t b = 0; b < main_dim; ++b)
      branch[b] += w * joint.amps[static_cast<std::size_t>(j) * main_dim + b];
  }
  double p = 0.0;
  for (const Complex& a : branch) p += std::norm(a);

  LcuOutcome out;
  out.success_probability = std::min(p, 1.0);
  out.attempts = 1;
  if (p <= 0.0) return out;
  SplitMix64 rng(derive_seed(seed, {0x6c6375ULL}));
  out.success = rng.uniform() < p;
  if (out.success) {
    out.post_state = StateVector::zero(main_qubits);
    const double norm = std::sqrt(p);
    for (std::size_t b = 0; b < main_dim; ++b)
      out.post_state.amps[b] = branch[b] / norm;
  }
  return out;
}

// Deterministic reference path: M_alpha|iota> / |M_alpha iota|.
inline StateVector apply_lcu_exact(const StateVector& iota,
                                   const SearchFamily& family,
                                   const Eigen::VectorXcd& alpha,
                                   const CcopInstance& inst,
                                   const FeasibleSubspaceView& view) {
  if (static_cast<std::size_t>(alpha.size()) != family.size())
    throw std::invalid_argument("apply_lcu_exact: alpha size mismatch");
  StateVector acc = StateVector::zero(iota.n_qubits);
  for (std::size_t j = 0; j < family.size(); ++j) {
    if (alpha(static_cast<int>(j)) == Complex{0.0, 0.0}) continue;
    const StateVector sj =
        apply_search_unitary(iota, family.unitaries[j], inst, view);
    for (std::size_t b = 0; b < acc.amps.size(); ++b)
      acc.amps[b] += alpha(static_cast<int>(j)) * sj.amps[b];
  }
  const double norm = acc.norm();
  if (norm < 1e-14)
    throw std::runtime_error("apply_lcu_exact: annihilated state");
  for (Complex& a : acc.amps) a /= norm;
  return acc;
}

// Post-selection with retries; falls back to the exact path after the cap so
// long experiments stay deterministic. The fallback is flagged in the outcome.
inline LcuOutcome apply_lcu_with_retries(const StateVector& iota,
                                         const SearchFamily& family,
                                         const Eigen::VectorXcd& alpha,
                                         const CcopInstance& inst,
                                         const FeasibleSubspaceView& view,
                                         std::uint64_t seed,
                                         int max_attempts = 64) {
  const AncillaPrep prep = ancilla_prep(alpha);
  const StateVector joint = compound_apply(iota, prep, family, inst, view);
  LcuOutcome out;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    out = postselect(joint, alpha, iota.n_qubits,
                     derive_seed(seed, {0x7265747279ULL,
                                        static_cast<std::uint64_t>(attempt)}));
    out.attempts = attempt + 1;
    if (out.success) return out;
    if (out.success_probability <= 0.0) break;
  }
  out.post_state = apply_lcu_exact(iota, family, alpha, inst, view);
  out.success = true;
  out.exact_fallback = true;
  return out;
}

} // namespace qcp
