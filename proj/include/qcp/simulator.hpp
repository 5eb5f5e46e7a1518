#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcp/ccop.hpp"
#include "qcp/rng.hpp"

namespace qcp {

using Complex = std::complex<double>;

struct StateVector {
  int n_qubits = 0;
  std::vector<Complex> amps;

  static StateVector zero(int n) {
    StateVector s;
    s.n_qubits = n;
    s.amps.assign(std::size_t{1} << n, Complex{0.0, 0.0});
    return s;
  }

  std::size_t dim() const { return amps.size(); }

  double norm() const {
    double s = 0.0;
    for (const Complex& a : amps) s += std::norm(a);
    return std::sqrt(s);
  }
};

inline Complex inner_product(const StateVector& a, const StateVector& b) {
  if (a.n_qubits != b.n_qubits)
    throw std::invalid_argument("inner_product: qubit count mismatch");
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < a.amps.size(); ++i)
    s += std::conj(a.amps[i]) * b.amps[i];
  return s;
}

// Cached list of feasible labels; spans the subspace S.
class FeasibleSubspaceView {
public:
  explicit FeasibleSubspaceView(const CcopInstance& inst) : n_(inst.n) {
    const std::uint64_t dim = std::uint64_t{1} << inst.n;
    for (std::uint64_t b = 0; b < dim; ++b)
      if (inst.feasible(b)) labels_.push_back(b);
  }

  int n_qubits() const { return n_; }
  const std::vector<std::uint64_t>& labels() const { return labels_; }
  bool empty() const { return labels_.empty(); }

private:
  int n_;
  std::vector<std::uint64_t> labels_;
};

inline double infeasible_weight(const StateVector& state,
                                const FeasibleSubspaceView& view) {
  double feasible = 0.0;
  for (std::uint64_t b : view.labels()) feasible += std::norm(state.amps[b]);
  return std::clamp(1.0 - feasible, 0.0, 1.0);
}

enum class InitialMode { basis_state, uniform_feasible };

inline StateVector prepare_initial(const CcopInstance& inst,
                                   const FeasibleSubspaceView& view,
                                   InitialMode mode, std::uint64_t basis_label = 0) {
  StateVector s = StateVector::zero(inst.n);
  if (mode == InitialMode::basis_state) {
    if (!inst.feasible(basis_label))
      throw std::invalid_argument("prepare_initial: basis state is infeasible");
    s.amps[basis_label] = 1.0;
  } else {
    if (view.empty())
      throw std::invalid_argument("prepare_initial: feasible set is empty");
    const double a = 1.0 / std::sqrt(static_cast<double>(view.labels().size()));
    for (std::uint64_t b : view.labels()) s.amps[b] = a;
  }
  return s;
}

// exp(-i gamma C): diagonal, multiplies amplitude at b by exp(-i gamma c(b)).
inline StateVector apply_phase_separator(const StateVector& state,
                                         const CcopInstance& inst, double gamma) {
  StateVector out = state;
  for (std::size_t b = 0; b < out.amps.size(); ++b)
    out.amps[b] *= std::polar(1.0, -gamma * inst.objective(b));
  return out;
}

namespace detail {

// Applies a 2x2 unitary to the target qubit of a dense statevector.
inline void apply_single_qubit(StateVector& s, int q, const Complex u[2][2]) {
  const std::size_t stride = std::size_t{1} << q;
  for (std::size_t base = 0; base < s.amps.size(); base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const Complex a0 = s.amps[i];
      const Complex a1 = s.amps[i + stride];
      s.amps[i] = u[0][0] * a0 + u[0][1] * a1;
      s.amps[i + stride] = u[1][0] * a0 + u[1][1] * a1;
    }
  }
}

inline void apply_cnot(StateVector& s, int control, int target) {
  const std::uint64_t cmask = std::uint64_t{1} << control;
  const std::uint64_t tmask = std::uint64_t{1} << target;
  for (std::size_t i = 0; i < s.amps.size(); ++i)
    if ((i & cmask) && !(i & tmask)) std::swap(s.amps[i], s.amps[i | tmask]);
}

} // namespace detail

// exp(-i beta B) with B = sum_i sigma_x^(i), as the n-fold product of
// single-qubit exp(-i beta sigma_x) rotations.
inline StateVector apply_transverse_mixer(const StateVector& state, double beta) {
  StateVector out = state;
  const Complex u[2][2] = {{{std::cos(beta), 0.0}, {0.0, -std::sin(beta)}},
                           {{0.0, -std::sin(beta)}, {std::cos(beta), 0.0}}};
  for (int q = 0; q < out.n_qubits; ++q) detail::apply_single_qubit(out, q, u);
  return out;
}

// exp(-i beta |S><S|) as the rank-one update
// psi -> psi - (1 - e^{-i beta}) <S|psi> |S>.
inline StateVector apply_grover_mixer(const StateVector& state,
                                      const FeasibleSubspaceView& view,
                                      double beta) {
  if (view.empty())
    throw std::invalid_argument("apply_grover_mixer: feasible set is empty");
  StateVector out = state;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(view.labels().size()));
  Complex overlap{0.0, 0.0};
  for (std::uint64_t b : view.labels()) overlap += out.amps[b];
  overlap *= inv_sqrt;
  const Complex factor = (1.0 - std::polar(1.0, -beta)) * overlap * inv_sqrt;
  for (std::uint64_t b : view.labels()) out.amps[b] -= factor;
  return out;
}

// ---- search unitaries ----

enum class GateKind { rx, ry, rz, cnot };

struct Gate {
  GateKind kind;
  int target = 0;
  int control = 0;  // cnot only
  double angle = 0.0;
};

inline StateVector apply_gate(const StateVector& state, const Gate& g) {
  StateVector out = state;
  const double h = g.angle / 2.0;
  switch (g.kind) {
    case GateKind::rx: {
      const Complex u[2][2] = {{{std::cos(h), 0.0}, {0.0, -std::sin(h)}},
                               {{0.0, -std::sin(h)}, {std::cos(h), 0.0}}};
      detail::apply_single_qubit(out, g.target, u);
      break;
    }
    case GateKind::ry: {
      const Complex u[2][2] = {{{std::cos(h), 0.0}, {-std::sin(h), 0.0}},
                               {{std::sin(h), 0.0}, {std::cos(h), 0.0}}};
      detail::apply_single_qubit(out, g.target, u);
      break;
    }
    case GateKind::rz: {
      const Complex u[2][2] = {{std::polar(1.0, -h), {0.0, 0.0}},
                               {{0.0, 0.0}, std::polar(1.0, h)}};
      detail::apply_single_qubit(out, g.target, u);
      break;
    }
    case GateKind::cnot:
      detail::apply_cnot(out, g.control, g.target);
      break;
  }
  return out;
}

enum class UnitaryKind {
  identity,
  phase_separator,
  transverse_mixer,
  grover_mixer,
  local_circuit
};

inline std::string to_string(UnitaryKind k) {
  switch (k) {
    case UnitaryKind::identity: return "identity";
    case UnitaryKind::phase_separator: return "phase_separator";
    case UnitaryKind::transverse_mixer: return "transverse_mixer";
    case UnitaryKind::grover_mixer: return "grover_mixer";
    case UnitaryKind::local_circuit: return "local_circuit";
  }
  return "unknown";
}

inline UnitaryKind unitary_kind_from_string(const std::string& s) {
  if (s == "identity") return UnitaryKind::identity;
  if (s == "phase_separator" || s == "phase") return UnitaryKind::phase_separator;
  if (s == "transverse_mixer" || s == "mixer") return UnitaryKind::transverse_mixer;
  if (s == "grover_mixer" || s == "grover") return UnitaryKind::grover_mixer;
  if (s == "local_circuit" || s == "local") return UnitaryKind::local_circuit;
  throw std::invalid_argument("unknown search unitary kind: " + s);
}

struct SearchUnitary {
  UnitaryKind kind = UnitaryKind::identity;
  double angle = 0.0;           // gamma or beta
  std::vector<Gate> gates;      // local_circuit only
};

inline StateVector apply_search_unitary(const StateVector& state,
                                        const SearchUnitary& u,
                                        const CcopInstance& inst,
                                        const FeasibleSubspaceView& view) {
  switch (u.kind) {
    case UnitaryKind::identity: return state;
    case UnitaryKind::phase_separator: return apply_phase_separator(state, inst, u.angle);
    case UnitaryKind::transverse_mixer: return apply_transverse_mixer(state, u.angle);
    case UnitaryKind::grover_mixer: return apply_grover_mixer(state, view, u.angle);
    case UnitaryKind::local_circuit: {
      StateVector out = state;
      for (const Gate& g : u.gates) out = apply_gate(out, g);
      return out;
    }
  }
  throw std::invalid_argument("apply_search_unitary: unknown kind");
}

struct FamilySpecEntry {
  UnitaryKind kind = UnitaryKind::identity;
  int gate_count = 4;  // local_circuit only
};

using FamilySpec = std::vector<FamilySpecEntry>;

struct SearchFamily {
  std::vector<SearchUnitary> unitaries;
  std::uint64_t seed = 0;
  FamilySpec spec;

  std::size_t size() const { return unitaries.size(); }
};

// Draws all angles uniformly from [0, 2*pi) with a per-unitary derived seed;
// the last spec entry must be the identity.
inline SearchFamily build_search_family(const CcopInstance& inst,
                                        const FamilySpec& spec,
                                        std::uint64_t seed) {
  if (spec.empty())
    throw std::invalid_argument("build_search_family: spec must have ell >= 1 entries");
  if (spec.back().kind != UnitaryKind::identity)
    throw std::invalid_argument("build_search_family: last unitary must be the identity");
  SearchFamily fam;
  fam.seed = seed;
  fam.spec = spec;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    SplitMix64 rng(derive_seed(seed, {0x66616d696cULL, j}));
    SearchUnitary u;
    u.kind = spec[j].kind;
    switch (spec[j].kind) {
      case UnitaryKind::identity:
        break;
      case UnitaryKind::phase_separator:
      case UnitaryKind::transverse_mixer:
      case UnitaryKind::grover_mixer:
        u.angle = rng.uniform_angle();
        break;
      case UnitaryKind::local_circuit:
        for (int g = 0; g < spec[j].gate_count; ++g) {
          Gate gate;
          const std::uint64_t pick = rng.next() % (inst.n > 1 ? 4u : 3u);
          gate.angle = rng.uniform_angle();
          gate.target = static_cast<int>(rng.next() % static_cast<std::uint64_t>(inst.n));
          if (pick == 3) {
            gate.kind = GateKind::cnot;
            gate.control = static_cast<int>(rng.next() %
                                            static_cast<std::uint64_t>(inst.n - 1));
            if (gate.control >= gate.target) ++gate.control;
          } else {
            gate.kind = static_cast<GateKind>(pick);
          }
          u.gates.push_back(gate);
        }
        break;
    }
    fam.unitaries.push_back(std::move(u));
  }
  return fam;
}

// ---- sampling ----

namespace detail {

inline std::vector<double> cumulative_probabilities(const StateVector& state) {
  std::vector<double> cdf(state.amps.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < state.amps.size(); ++i) {
    acc += std::norm(state.amps[i]);
    cdf[i] = acc;
  }
  if (!cdf.empty()) cdf.back() = std::max(cdf.back(), 1.0);
  return cdf;
}

inline std::uint64_t draw_label(const std::vector<double>& cdf, double u) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<std::uint64_t>(it - cdf.begin());
}

} // namespace detail

// i.i.d. Born samples, reproducible per seed.
inline std::vector<std::uint64_t> sample_bitstrings(const StateVector& state,
                                                    std::size_t m,
                                                    std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("sample_bitstrings: m must be >= 1");
  const std::vector<double> cdf = detail::cumulative_probabilities(state);
  SplitMix64 rng(derive_seed(seed, {0x73616d706cULL}));
  std::vector<std::uint64_t> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i)
    out.push_back(detail::draw_label(cdf, rng.uniform()));
  return out;
}

// Binary state dump: 2^n little-endian float64 (re, im) pairs in label order.
inline void dump_state(const StateVector& state, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("dump_state: cannot open " + path);
  for (const Complex& a : state.amps) {
    const double re = a.real(), im = a.imag();
    out.write(reinterpret_cast<const char*>(&re), sizeof(double));
    out.write(reinterpret_cast<const char*>(&im), sizeof(double));
  }
}

inline StateVector load_state(const std::string& path, int n_qubits) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_state: cannot open " + path);
  StateVector s = StateVector::zero(n_qubits);
  for (Complex& a : s.amps) {
    double re = 0.0, im = 0.0;
    in.read(reinterpret_cast<char*>(&re), sizeof(double));
    in.read(reinterpret_cast<char*>(&im), sizeof(double));
    if (!in) throw std::runtime_error("load_state: truncated file");
    a = Complex{re, im};
  }
  return s;
}

} // namespace qcp
