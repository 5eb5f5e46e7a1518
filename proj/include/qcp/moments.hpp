#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qcp/ccop.hpp"
#include "qcp/rng.hpp"
#include "qcp/simulator.hpp"

namespace qcp {

enum class MomentMode { exact, sampled };

struct MomentMatrices {
  Eigen::MatrixXcd F, G, H;
  int ell = 0;
  MomentMode mode = MomentMode::exact;
  std::size_t samples = 0;    // sampled mode
  std::uint64_t seed = 0;     // sampled mode
};

namespace detail {

inline std::vector<StateVector> family_states(const StateVector& iota,
                                              const SearchFamily& family,
                                              const CcopInstance& inst,
                                              const FeasibleSubspaceView& view) {
  std::vector<StateVector> states;
  states.reserve(family.size());
  for (const SearchUnitary& u : family.unitaries)
    states.push_back(apply_search_unitary(iota, u, inst, view));
  return states;
}

} // namespace detail

// F_jk = <i|Uj' Uk|i>, G_jk = <i|Uj' (1-P_S) Uk|i>, H_jk = <i|Uj' C Uk|i>,
// computed from the ell cached states and the three diagonal observables.
inline MomentMatrices exact_moments(const StateVector& iota,
                                    const SearchFamily& family,
                                    const CcopInstance& inst,
                                    const FeasibleSubspaceView& view) {
  const int ell = static_cast<int>(family.size());
  const auto states = detail::family_states(iota, family, inst, view);
  const std::size_t dim = iota.dim();

  std::vector<char> feas(dim);
  std::vector<double> cost(dim);
  for (std::size_t b = 0; b < dim; ++b) {
    feas[b] = inst.feasible(b) ? 1 : 0;
    cost[b] = inst.objective(b);
  }

  MomentMatrices M;
  M.ell = ell;
  M.mode = MomentMode::exact;
  M.F.setZero(ell, ell);
  M.G.setZero(ell, ell);
  M.H.setZero(ell, ell);
  for (int j = 0; j < ell; ++j) {
    for (int k = j; k < ell; ++k) {
      Complex f{0, 0}, g{0, 0}, h{0, 0};
      for (std::size_t b = 0; b < dim; ++b) {
        const Complex t = std::conj(states[j].amps[b]) * states[k].amps[b];
        f += t;
        if (!feas[b]) g += t;
        h += cost[b] * t;
      }
      M.F(j, k) = f;
      M.G(j, k) = g;
      M.H(j, k) = h;
      if (k != j) {
        M.F(k, j) = std::conj(f);
        M.G(k, j) = std::conj(g);
        M.H(k, j) = std::conj(h);
      }
    }
  }
  return M;
}

// Joint (n+1)-qubit state with the ancilla as the top qubit:
// 1/2 (Uj + Uk)|i> (x) |0> + 1/2 (Uj - Uk)|i> (x) |1>.
inline StateVector lambda_re_state(const StateVector& iota,
                                   const SearchUnitary& uj, const SearchUnitary& uk,
                                   const CcopInstance& inst,
                                   const FeasibleSubspaceView& view) {
  const StateVector sj = apply_search_unitary(iota, uj, inst, view);
  const StateVector sk = apply_search_unitary(iota, uk, inst, view);
  StateVector joint = StateVector::zero(iota.n_qubits + 1);
  const std::size_t dim = iota.dim();
  for (std::size_t b = 0; b < dim; ++b) {
    joint.amps[b] = 0.5 * (sj.amps[b] + sk.amps[b]);
    joint.amps[b + dim] = 0.5 * (sj.amps[b] - sk.amps[b]);
  }
  return joint;
}

// S-gate variant: 1/2 (Uj + i Uk)|i> (x) |0> + 1/2 (Uj - i Uk)|i> (x) |1>;
// ancilla-0 probability is (1 - Im<i|Uj' Uk|i>)/2.
inline StateVector lambda_im_state(const StateVector& iota,
                                   const SearchUnitary& uj, const SearchUnitary& uk,
                                   const CcopInstance& inst,
                                   const FeasibleSubspaceView& view) {
  const StateVector sj = apply_search_unitary(iota, uj, inst, view);
  const StateVector sk = apply_search_unitary(iota, uk, inst, view);
  StateVector joint = StateVector::zero(iota.n_qubits + 1);
  const std::size_t dim = iota.dim();
  const Complex i_unit{0.0, 1.0};
  for (std::size_t b = 0; b < dim; ++b) {
    joint.amps[b] = 0.5 * (sj.amps[b] + i_unit * sk.amps[b]);
    joint.amps[b + dim] = 0.5 * (sj.amps[b] - i_unit * sk.amps[b]);
  }
  return joint;
}

// Bit-string-sampling estimator for (F, G, H). Diagonals from direct Born
// samples of Uj|i>; off-diagonals from tuple samples of the two ancilla
// circuits with the 4/m prefactor (division by m, not by the ancilla-0
// count: the branch probabilities cancel the squared normalization factors).
inline MomentMatrices sampled_moments(const StateVector& iota,
                                      const SearchFamily& family,
                                      const CcopInstance& inst,
                                      const FeasibleSubspaceView& view,
                                      std::size_t m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("sampled_moments: m must be >= 1");
  const int ell = static_cast<int>(family.size());
  const std::size_t main_dim = iota.dim();
  const Complex i_unit{0.0, 1.0};

  MomentMatrices M;
  M.ell = ell;
  M.mode = MomentMode::sampled;
  M.samples = m;
  M.seed = seed;
  M.F.setZero(ell, ell);
  M.G.setZero(ell, ell);
  M.H.setZero(ell, ell);

  for (int j = 0; j < ell; ++j) {
    const StateVector sj =
        apply_search_unitary(iota, family.unitaries[j], inst, view);
    const auto xs = sample_bitstrings(
        sj, m, derive_seed(seed, {0x64696167ULL, static_cast<std::uint64_t>(j)}));
    double g = 0.0, h = 0.0;
    for (std::uint64_t b : xs) {
      if (!inst.feasible(b)) g += 1.0;
      h += inst.objective(b);
    }
    M.F(j, j) = 1.0;
    M.G(j, j) = g / static_cast<double>(m);
    M.H(j, j) = h / static_cast<double>(m);
  }

  for (int j = 0; j < ell; ++j) {
    for (int k = 0; k < j; ++k) {
      const StateVector re_joint = lambda_re_state(
          iota, family.unitaries[j], family.unitaries[k], inst, view);
      const StateVector im_joint = lambda_im_state(
          iota, family.unitaries[j], family.unitaries[k], inst, view);
      const auto xs = sample_bitstrings(
          re_joint, m,
          derive_seed(seed, {0x7265ULL, static_cast<std::uint64_t>(j),
                             static_cast<std::uint64_t>(k)}));
      const auto ys = sample_bitstrings(
          im_joint, m,
          derive_seed(seed, {0x696dULL, static_cast<std::uint64_t>(j),
                             static_cast<std::uint64_t>(k)}));

      double f_re = 0.0, g_re = 0.0, h_re = 0.0;
      for (std::uint64_t label : xs) {
        if (label >= main_dim) continue;  // ancilla bit 1: indicator (1-b) = 0
        const std::uint64_t b = label;
        f_re += 1.0;
        if (!inst.feasible(b)) g_re += 1.0;
        h_re += inst.objective(b);
      }
      double f_im = 0.0, g_im = 0.0, h_im = 0.0;
      for (std::uint64_t label : ys) {
        if (label >= main_dim) continue;
        const std::uint64_t b = label;
        f_im += 1.0;
        if (!inst.feasible(b)) g_im += 1.0;
        h_im += inst.objective(b);
      }

      const double pref = 4.0 / static_cast<double>(m);
      const Complex fjj = M.F(j, j), fkk = M.F(k, k);
      const Complex gjj = M.G(j, j), gkk = M.G(k, k);
      const Complex hjj = M.H(j, j), hkk = M.H(k, k);
      M.F(j, k) = 0.5 * (pref * f_re - fjj - fkk) -
                  0.5 * i_unit * (pref * f_im - fjj - fkk);
      M.G(j, k) = 0.5 * (pref * g_re - gjj - gkk) -
                  0.5 * i_unit * (pref * g_im - gjj - gkk);
      M.H(j, k) = 0.5 * (pref * h_re - hjj - hkk) -
                  0.5 * i_unit * (pref * h_im - hjj - hkk);
      M.F(k, j) = std::conj(M.F(j, k));
      M.G(k, j) = std::conj(M.G(j, k));
      M.H(k, j) = std::conj(M.H(j, k));
    }
  }
  return M;
}

namespace detail {

inline Eigen::MatrixXcd clip_negative_eigenvalues(const Eigen::MatrixXcd& A,
                                                  double clip_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
  Eigen::VectorXd ev = es.eigenvalues();
  bool changed = false;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) < -clip_tol) {
      ev(i) = 0.0;
      changed = true;
    }
  }
  if (!changed) return A;
  Eigen::MatrixXcd out = es.eigenvectors() * ev.asDiagonal() *
                         es.eigenvectors().adjoint();
  return 0.5 * (out + out.adjoint().eval());
}

inline double min_eigenvalue(const Eigen::MatrixXcd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

} // namespace detail

// Clips negative eigenvalues of F, G, H, then ridges F and H back to
// positive-definiteness when sampling noise pushed them below `ridge`.
inline MomentMatrices psd_repair(const MomentMatrices& M, double ridge,
                                 double clip_tol = 0.0) {
  MomentMatrices out = M;
  out.F = detail::clip_negative_eigenvalues(M.F, clip_tol);
  out.G = detail::clip_negative_eigenvalues(M.G, clip_tol);
  out.H = detail::clip_negative_eigenvalues(M.H, clip_tol);
  if (ridge > 0.0) {
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(M.ell, M.ell);
    if (detail::min_eigenvalue(out.F) < ridge) out.F += ridge * id;
    if (detail::min_eigenvalue(out.H) < ridge) out.H += ridge * id;
  }
  return out;
}

// ---- mixed states ----

struct MixedState {
  struct Component {
    double weight;
    StateVector state;
  };
  std::vector<Component> components;
};

inline void validate_ensemble(const MixedState& rho) {
  if (rho.components.empty())
    throw std::invalid_argument("mixed state: empty ensemble");
  double total = 0.0;
  for (const auto& c : rho.components) {
    if (!(c.weight > 0.0))
      throw std::invalid_argument("mixed state: weights must be positive");
    if (std::abs(c.state.norm() - 1.0) > 1e-10)
      throw std::invalid_argument("mixed state: component not normalized");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("mixed state: weights must sum to 1");
}

// tr[rho Uj' A Uk] as the weighted sum of pure-state moment matrices.
inline MomentMatrices mixed_exact_moments(const MixedState& rho,
                                          const SearchFamily& family,
                                          const CcopInstance& inst,
                                          const FeasibleSubspaceView& view) {
  validate_ensemble(rho);
  MomentMatrices M;
  M.ell = static_cast<int>(family.size());
  M.mode = MomentMode::exact;
  M.F.setZero(M.ell, M.ell);
  M.G.setZero(M.ell, M.ell);
  M.H.setZero(M.ell, M.ell);
  for (const auto& c : rho.components) {
    const MomentMatrices Mi = exact_moments(c.state, family, inst, view);
    M.F += c.weight * Mi.F;
    M.G += c.weight * Mi.G;
    M.H += c.weight * Mi.H;
  }
  return M;
}

// ---- serialization ----

inline nlohmann::json matrix_to_json(const Eigen::MatrixXcd& A) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < A.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < A.cols(); ++c)
      row.push_back({A(r, c).real(), A(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j.at(0).size()) : 0;
  Eigen::MatrixXcd A(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      A(r, c) = Complex{j.at(r).at(c).at(0).get<double>(),
                        j.at(r).at(c).at(1).get<double>()};
  return A;
}

inline nlohmann::json moments_to_json(const MomentMatrices& M) {
  nlohmann::json j;
  j["ell"] = M.ell;
  j["mode"] = M.mode == MomentMode::exact ? "exact" : "sampled";
  if (M.mode == MomentMode::sampled) {
    j["samples"] = M.samples;
    j["seed"] = M.seed;
  }
  j["F"] = matrix_to_json(M.F);
  j["G"] = matrix_to_json(M.G);
  j["H"] = matrix_to_json(M.H);
  return j;
}

} // namespace qcp
