#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcp/ccop.hpp"
#include "qcp/gep.hpp"
#include "qcp/lcu.hpp"
#include "qcp/moments.hpp"
#include "qcp/simulator.hpp"

namespace qcp {

inline constexpr int kReportSchemaVersion = 1;

struct ExperimentConfig {
  nlohmann::json instance_spec;        // same schema as instance JSON files
  std::string initial_mode = "uniform_feasible";  // or a bit string like "101"
  std::vector<std::string> family_kinds = {"mixer", "phase", "identity"};
  int local_gate_count = 4;
  bool exact_mode = true;
  std::size_t samples = 10000;         // sampled mode
  int iterations = 1;                  // K
  double kernel_tol = 0.0;             // 0 => mode-dependent default
  double ridge = 0.0;                  // 0 => mode-dependent default
  double feasibility_tol = 1e-9;
  int retry_cap = 64;
  std::uint64_t seed = 0;
  std::string out_path;
};

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.iterations < 1)
    throw std::invalid_argument("config: iterations must be >= 1");
  if (!cfg.exact_mode && cfg.samples < 1)
    throw std::invalid_argument("config: samples must be >= 1");
  if (cfg.kernel_tol < 0.0 || cfg.ridge < 0.0 || !(cfg.feasibility_tol > 0.0))
    throw std::invalid_argument("config: tolerances must be positive");
  if (cfg.retry_cap < 1)
    throw std::invalid_argument("config: retry cap must be >= 1");
  if (cfg.family_kinds.empty())
    throw std::invalid_argument("config: family must have at least one unitary");
}

struct IterationRecord {
  int index = 0;
  double lambda0 = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double infeasible_weight = 0.0;
  double alpha_l1 = 0.0;
  double lcu_success_probability = 0.0;
  int lcu_attempts = 0;
  bool lcu_exact_fallback = false;
  double residual_f = 0.0, residual_g = 0.0, residual_h = 0.0;
  double dual_gap = 0.0;
  int kernel_dim = 0;
  int eigenspace_dim = 0;
};

struct RunReport {
  std::vector<IterationRecord> iterations;
  bool aborted = false;
  std::string abort_reason;
  double final_energy = 0.0;
  double initial_energy = 0.0;
  std::optional<BruteForceResult> brute_force;
  std::vector<std::uint64_t> final_samples;
  ExperimentConfig config;
};

namespace detail {

inline double exact_energy(const StateVector& s, const CcopInstance& inst) {
  double e = 0.0;
  for (std::size_t b = 0; b < s.amps.size(); ++b)
    e += inst.objective(b) * std::norm(s.amps[b]);
  return e;
}

inline FamilySpec spec_from_kinds(const std::vector<std::string>& kinds,
                                  int gate_count) {
  FamilySpec spec;
  for (const std::string& k : kinds)
    spec.push_back({unitary_kind_from_string(k), gate_count});
  return spec;
}

inline StateVector initial_state_from_config(const ExperimentConfig& cfg,
                                             const CcopInstance& inst,
                                             const FeasibleSubspaceView& view) {
  if (cfg.initial_mode == "uniform_feasible")
    return prepare_initial(inst, view, InitialMode::uniform_feasible);
  const BitString b = BitString::parse(cfg.initial_mode);
  check_length(inst, b);
  return prepare_initial(inst, view, InitialMode::basis_state, b.label());
}

} // namespace detail

// Iterated QCP: per round draw fresh angles, estimate moments, solve the GEP,
// apply the LCU update, and feed the post-state into the next round. Stops
// early once lambda0 stalls across two iterations.
inline RunReport run_qcp(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const CcopInstance inst = instance_from_json(cfg.instance_spec);
  const FeasibleSubspaceView view(inst);
  const FamilySpec spec =
      detail::spec_from_kinds(cfg.family_kinds, cfg.local_gate_count);
  if (spec.back().kind != UnitaryKind::identity)
    throw std::invalid_argument("config: last family unitary must be identity");

  RunReport report;
  report.config = cfg;
  StateVector iota = detail::initial_state_from_config(cfg, inst, view);
  report.initial_energy = detail::exact_energy(iota, inst);
  if (inst.n <= kEnumerationCap) report.brute_force = brute_force_optimum(inst);

  double prev_lambda = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k < cfg.iterations; ++k) {
    const std::uint64_t round_seed =
        derive_seed(cfg.seed, {0x726f756e64ULL, static_cast<std::uint64_t>(k)});
    const SearchFamily family = build_search_family(inst, spec, round_seed);

    MomentMatrices M;
    double kernel_tol = cfg.kernel_tol;
    double ridge = cfg.ridge;
    try {
      if (cfg.exact_mode) {
        M = exact_moments(iota, family, inst, view);
        if (kernel_tol <= 0.0)
          kernel_tol = default_kernel_tol(MomentMode::exact, M.ell, 0);
        if (ridge <= 0.0) ridge = 1e-10;
      } else {
        M = sampled_moments(iota, family, inst, view, cfg.samples,
                            derive_seed(round_seed, {0x6d6f6dULL}));
        const double repair_ridge =
            10.0 / std::sqrt(static_cast<double>(cfg.samples));
        M = psd_repair(M, repair_ridge);
        if (kernel_tol <= 0.0)
          kernel_tol = default_kernel_tol(MomentMode::sampled, M.ell, cfg.samples);
        if (ridge <= 0.0) ridge = repair_ridge;
      }

      const GepSolution sol = solve_gep(M, kernel_tol, ridge);
      const LcuOutcome lcu = apply_lcu_with_retries(
          iota, family, sol.alpha0, inst, view,
          derive_seed(round_seed, {0x6c6375ULL}), cfg.retry_cap);

      IterationRecord rec;
      rec.index = k;
      rec.lambda0 = sol.lambda0;
      rec.energy_before = detail::exact_energy(iota, inst);
      rec.energy_after = detail::exact_energy(lcu.post_state, inst);
      rec.infeasible_weight = infeasible_weight(lcu.post_state, view);
      rec.alpha_l1 = sol.alpha_l1;
      rec.lcu_success_probability = lcu.success_probability;
      rec.lcu_attempts = lcu.attempts;
      rec.lcu_exact_fallback = lcu.exact_fallback;
      rec.residual_f = sol.residual_f;
      rec.residual_g = sol.residual_g;
      rec.residual_h = sol.residual_h;
      rec.dual_gap = sol.dual_gap;
      rec.kernel_dim = sol.kernel_dim;
      rec.eigenspace_dim = sol.eigenspace_dim;
      report.iterations.push_back(rec);

      iota = lcu.post_state;
      if (!std::isnan(prev_lambda) &&
          std::abs(sol.lambda0 - prev_lambda) < 1e-10)
        break;
      prev_lambda = sol.lambda0;
    } catch (const NoFeasibleDirection& e) {
      report.aborted = true;
      report.abort_reason = e.what();
      break;
    }
  }

  report.final_energy = detail::exact_energy(iota, inst);
  report.final_samples =
      sample_bitstrings(iota, 256, derive_seed(cfg.seed, {0x66696e616cULL}));
  return report;
}

// ---- serialization ----

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  return {{"instance", cfg.instance_spec},
          {"initial_mode", cfg.initial_mode},
          {"family", cfg.family_kinds},
          {"local_gate_count", cfg.local_gate_count},
          {"estimation", cfg.exact_mode ? "exact" : "sampled"},
          {"samples", cfg.samples},
          {"iterations", cfg.iterations},
          {"kernel_tol", cfg.kernel_tol},
          {"ridge", cfg.ridge},
          {"feasibility_tol", cfg.feasibility_tol},
          {"retry_cap", cfg.retry_cap},
          {"seed", cfg.seed}};
}

inline nlohmann::json report_to_json(const RunReport& r,
                                     bool with_timestamp = true) {
  nlohmann::json iters = nlohmann::json::array();
  for (const IterationRecord& it : r.iterations) {
    iters.push_back({{"index", it.index},
                     {"lambda0", it.lambda0},
                     {"energy_before", it.energy_before},
                     {"energy_after", it.energy_after},
                     {"infeasible_weight", it.infeasible_weight},
                     {"alpha_l1", it.alpha_l1},
                     {"lcu_success_probability", it.lcu_success_probability},
                     {"lcu_attempts", it.lcu_attempts},
                     {"lcu_exact_fallback", it.lcu_exact_fallback},
                     {"residual_f", it.residual_f},
                     {"residual_g", it.residual_g},
                     {"residual_h", it.residual_h},
                     {"dual_gap", it.dual_gap},
                     {"kernel_dim", it.kernel_dim},
                     {"eigenspace_dim", it.eigenspace_dim}});
  }
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = config_to_json(r.config);
  j["iterations"] = std::move(iters);
  j["aborted"] = r.aborted;
  if (r.aborted) j["abort_reason"] = r.abort_reason;
  j["initial_energy"] = r.initial_energy;
  j["final_energy"] = r.final_energy;
  j["final_samples"] = r.final_samples;
  if (r.brute_force) {
    j["brute_force"] = {{"has_feasible", r.brute_force->has_feasible},
                        {"optimum", r.brute_force->optimum},
                        {"optimizers", r.brute_force->optimizers},
                        {"feasible_count", r.brute_force->feasible_count}};
  }
  if (with_timestamp) {
    // timestamps live in a separate field so reports stay byte-comparable
    j["timestamp_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
  }
  return j;
}

} // namespace qcp
