#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qcp/moments.hpp"

namespace qcp {

// Raised when ker(G) is trivial, i.e. not even the identity direction is
// feasible (infeasible initial state or sampling-corrupted G).
struct NoFeasibleDirection : std::runtime_error {
  NoFeasibleDirection() : std::runtime_error("no feasible direction: ker(G) is trivial") {}
};

// Real 2l x 2l symmetric block embedding [[Re, -Im], [Im, Re]] of the
// hermitian moment matrices; quadratic forms are preserved under
// alpha ~ (Re alpha, Im alpha).
struct RealEmbedding {
  Eigen::MatrixXd Fr, Gr, Hr;
  int ell = 0;
};

namespace detail {

inline void require_hermitian(const Eigen::MatrixXcd& A, const char* what) {
  if ((A - A.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument(std::string(what) + ": matrix is not hermitian");
}

inline Eigen::MatrixXd realify_one(const Eigen::MatrixXcd& A) {
  const int l = static_cast<int>(A.rows());
  Eigen::MatrixXd out(2 * l, 2 * l);
  out.topLeftCorner(l, l) = A.real();
  out.topRightCorner(l, l) = -A.imag();
  out.bottomLeftCorner(l, l) = A.imag();
  out.bottomRightCorner(l, l) = A.real();
  return 0.5 * (out + out.transpose().eval());
}

inline double min_eigenvalue_sym(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double max_eigenvalue_sym(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

} // namespace detail

inline RealEmbedding realify(const MomentMatrices& M) {
  detail::require_hermitian(M.F, "realify(F)");
  detail::require_hermitian(M.G, "realify(G)");
  detail::require_hermitian(M.H, "realify(H)");
  RealEmbedding E;
  E.ell = M.ell;
  E.Fr = detail::realify_one(M.F);
  E.Gr = detail::realify_one(M.G);
  E.Hr = detail::realify_one(M.H);
  return E;
}

// Restriction of the realified pencil to ker(G). `basis` holds the full
// orthonormal eigenbasis of Gr with kernel eigenvectors in the leading
// columns, ordered by ascending eigenvalue.
struct KernelRestriction {
  Eigen::MatrixXd basis;     // 2l x 2l orthogonal
  Eigen::VectorXd g_eigenvalues;
  int kernel_dim = 0;        // m
  Eigen::MatrixXd Ft, Ht;    // m x m symmetric, Ft ridged to PD
  double kernel_tol = 0.0;
  int ell = 0;
};

inline double default_kernel_tol(MomentMode mode, int ell, std::size_t m_samples) {
  if (mode == MomentMode::exact) return 1e-9;
  return std::max(1e-9, 5.0 * std::sqrt(static_cast<double>(ell)) /
                            std::sqrt(static_cast<double>(m_samples)));
}

inline KernelRestriction kernel_projection(const RealEmbedding& E,
                                           double kernel_tol, double ridge) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E.Gr);
  const Eigen::VectorXd ev = es.eigenvalues();  // ascending
  const double cutoff = kernel_tol * std::max(1.0, ev.maxCoeff());
  int m = 0;
  while (m < ev.size() && ev(m) < cutoff) ++m;
  if (m == 0) throw NoFeasibleDirection{};

  KernelRestriction K;
  K.ell = E.ell;
  K.kernel_tol = kernel_tol;
  K.kernel_dim = m;
  K.basis = es.eigenvectors();
  K.g_eigenvalues = ev;
  const Eigen::MatrixXd Ff = K.basis.transpose() * E.Fr * K.basis;
  const Eigen::MatrixXd Hf = K.basis.transpose() * E.Hr * K.basis;
  K.Ft = 0.5 * (Ff.topLeftCorner(m, m) + Ff.topLeftCorner(m, m).transpose().eval());
  K.Ht = 0.5 * (Hf.topLeftCorner(m, m) + Hf.topLeftCorner(m, m).transpose().eval());
  // lift numerically negative noise; genuinely null directions are deflated
  // later in the pencil solve
  const double fmin = detail::min_eigenvalue_sym(K.Ft);
  if (fmin < 0.0)
    K.Ft += (ridge - fmin) * Eigen::MatrixXd::Identity(m, m);
  return K;
}

namespace detail {

// The kernel of G can intersect the kernel of F: directions x with
// M_x|iota> = 0 carry no state and admit no F-normalization, so they are cut
// out before solving the pencil. Keeping them would turn numerical noise in
// Ht into spurious eigenvalues of order noise/ridge.
struct DeflatedPencil {
  Eigen::MatrixXd V;    // m x kept, orthonormal columns
  Eigen::MatrixXd Ftr;  // kept x kept, positive-definite
  Eigen::MatrixXd Htr;
  int dropped = 0;
};

inline DeflatedPencil deflate_pencil(const KernelRestriction& K) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K.Ft);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.maxCoeff());
  if (ev.minCoeff() < -1e-8 * scale)
    throw std::invalid_argument("pencil solve: Ft is not positive-semidefinite");
  const double cut = 1e-8 * scale;
  int first = 0;
  while (first < ev.size() && ev(first) < cut) ++first;
  if (first == ev.size()) throw NoFeasibleDirection{};
  DeflatedPencil D;
  D.dropped = first;
  D.V = es.eigenvectors().rightCols(ev.size() - first);
  D.Ftr = D.V.transpose() * K.Ft * D.V;
  D.Htr = D.V.transpose() * K.Ht * D.V;
  D.Ftr = 0.5 * (D.Ftr + D.Ftr.transpose().eval());
  D.Htr = 0.5 * (D.Htr + D.Htr.transpose().eval());
  return D;
}

} // namespace detail

// Smallest generalized eigenvalue of Ht x = lambda Ft x together with an
// Ft-orthonormal basis of its eigenspace, via symmetric-definite reduction.
inline std::pair<double, std::vector<Eigen::VectorXd>> solve_pencil(
    const KernelRestriction& K) {
  const detail::DeflatedPencil D = detail::deflate_pencil(K);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(D.Htr, D.Ftr);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double lambda0 = ev.minCoeff();
  const double tol = 1e-9 * std::max(1.0, std::abs(lambda0));
  std::vector<Eigen::VectorXd> space;
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i) <= lambda0 + tol)
      space.push_back(D.V * es.eigenvectors().col(i));
  return {lambda0, space};
}

// Largest lambda with min-eig(Ht - lambda Ft) >= -tol, found by bisection.
// Independent verification oracle for the strong-duality claim.
inline double dual_bisection(const KernelRestriction& K, double tol) {
  const detail::DeflatedPencil D = detail::deflate_pencil(K);
  const double fmin = detail::min_eigenvalue_sym(D.Ftr);
  // scaling by the smallest Ft eigenvalue keeps the overshoot of the
  // eigenvalue slack at ~tol in generalized-eigenvalue units
  const double slack = tol * std::min(1.0, fmin);
  auto feasible = [&](double lambda) {
    return detail::min_eigenvalue_sym(D.Htr - lambda * D.Ftr) >= -slack;
  };
  double lo = 0.0;
  double hi = detail::max_eigenvalue_sym(D.Htr) / fmin + 1.0;
  if (!feasible(lo)) return 0.0;  // Ht indefinite beyond tol; degenerate input
  for (int it = 0; it < 200 && (hi - lo) > tol * 1e-2; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

struct GepSolution {
  double lambda0 = 0.0;
  Eigen::VectorXd x0;          // kernel coordinates, x0' Ft x0 = 1
  Eigen::VectorXcd alpha0;     // complex coefficient vector
  double residual_f = 0.0;     // |a' F a - 1|
  double residual_g = 0.0;     // a' G a
  double residual_h = 0.0;     // |a' H a - lambda0|
  double dual_gap = 0.0;       // |lambda0 - dual_bisection|
  int eigenspace_dim = 0;
  int kernel_dim = 0;
  int ft_near_kernel_dim = 0;  // flat-direction diagnostic
  double alpha_l1 = 0.0;
};

namespace detail {

inline Eigen::VectorXcd backmap_alpha(const Eigen::VectorXd& x,
                                      const KernelRestriction& K) {
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(2 * K.ell);
  padded.head(K.kernel_dim) = x;
  const Eigen::VectorXd real = K.basis * padded;
  Eigen::VectorXcd alpha(K.ell);
  for (int j = 0; j < K.ell; ++j)
    alpha(j) = Complex{real(j), real(j + K.ell)};
  return alpha;
}

inline double alpha_l1_norm(const Eigen::VectorXcd& a) {
  double s = 0.0;
  for (int j = 0; j < a.size(); ++j) s += std::abs(a(j));
  return s;
}

} // namespace detail

// Normalizes to x' Ft x = 1, maps back to the complex coefficient vector,
// and breaks eigenspace degeneracy by a coarse pair-rotation search for the
// smallest l1 norm (which governs the LCU success probability).
inline GepSolution normalize_and_backmap(
    const std::vector<Eigen::VectorXd>& eigvecs, const KernelRestriction& K,
    const MomentMatrices& M, double lambda0) {
  if (eigvecs.empty())
    throw std::invalid_argument("normalize_and_backmap: empty eigenspace");

  std::vector<Eigen::VectorXd> basis;
  for (const Eigen::VectorXd& v : eigvecs) {
    const double fnorm = v.dot(K.Ft * v);
    if (!(fnorm > 0.0)) continue;
    basis.push_back(v / std::sqrt(fnorm));
  }
  if (basis.empty())
    throw std::invalid_argument("normalize_and_backmap: degenerate eigenspace");

  Eigen::VectorXd best = basis.front();
  double best_l1 = detail::alpha_l1_norm(detail::backmap_alpha(best, K));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = i + 1; j < basis.size(); ++j) {
      // basis vectors are Ft-orthonormal, so the rotation keeps x' Ft x = 1
      for (int step = 0; step < 64; ++step) {
        const double theta = step * (3.14159265358979323846 / 64.0);
        const Eigen::VectorXd cand =
            std::cos(theta) * basis[i] + std::sin(theta) * basis[j];
        const double l1 = detail::alpha_l1_norm(detail::backmap_alpha(cand, K));
        if (l1 < best_l1) {
          best_l1 = l1;
          best = cand;
        }
      }
    }
  }

  GepSolution sol;
  sol.lambda0 = lambda0;
  sol.x0 = best;
  sol.alpha0 = detail::backmap_alpha(best, K);
  sol.alpha_l1 = best_l1;
  sol.eigenspace_dim = static_cast<int>(eigvecs.size());
  sol.kernel_dim = K.kernel_dim;
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K.Ft, Eigen::EigenvaluesOnly);
    int d = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()(i) < 1e-9) ++d;
    sol.ft_near_kernel_dim = d;
  }
  const Eigen::VectorXcd& a = sol.alpha0;
  sol.residual_f = std::abs((a.adjoint() * M.F * a)(0).real() - 1.0);
  sol.residual_g = std::abs((a.adjoint() * M.G * a)(0).real());
  sol.residual_h = std::abs((a.adjoint() * M.H * a)(0).real() - lambda0);
  return sol;
}

// realify -> kernel_projection -> solve_pencil -> backmap, with the
// dual-bisection cross-check recorded in the diagnostics.
inline GepSolution solve_gep(const MomentMatrices& M, double kernel_tol,
                             double ridge, double bisect_tol = 1e-9) {
  const RealEmbedding E = realify(M);
  const KernelRestriction K = kernel_projection(E, kernel_tol, ridge);
  const auto [lambda0, space] = solve_pencil(K);
  GepSolution sol = normalize_and_backmap(space, K, M, lambda0);
  sol.dual_gap = std::abs(lambda0 - dual_bisection(K, bisect_tol));
  return sol;
}

inline nlohmann::json gep_solution_to_json(const GepSolution& s) {
  nlohmann::json alpha = nlohmann::json::array();
  for (int j = 0; j < s.alpha0.size(); ++j)
    alpha.push_back({s.alpha0(j).real(), s.alpha0(j).imag()});
  return {{"lambda0", s.lambda0},
          {"alpha0", std::move(alpha)},
          {"alpha_l1", s.alpha_l1},
          {"residual_f", s.residual_f},
          {"residual_g", s.residual_g},
          {"residual_h", s.residual_h},
          {"dual_gap", s.dual_gap},
          {"eigenspace_dim", s.eigenspace_dim},
          {"kernel_dim", s.kernel_dim},
          {"ft_near_kernel_dim", s.ft_near_kernel_dim}};
}

} // namespace qcp
