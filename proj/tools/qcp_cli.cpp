// Experiment harness for the conic-programming optimization pipeline.

#include <cstdint>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qcp/config.hpp"
#include "qcp/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitRunAbort = 3;

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool exact = false;
  std::size_t sampled_m = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "TOML config file")->required();
  cmd->add_option("--out", opts.out_path, "output JSON path (default: stdout)");
  cmd->add_option("--seed", opts.seed, "override master seed")
      ->each([&](const std::string&) { opts.seed_set = true; });
  cmd->add_flag("--exact", opts.exact, "force exact moment estimation");
  cmd->add_option("--sampled", opts.sampled_m,
                  "force sampled estimation with the given shot count");
}

qcp::ExperimentConfig load_with_overrides(const CommonOpts& opts) {
  qcp::ExperimentConfig cfg = qcp::load_config(opts.config_path);
  if (opts.seed_set) cfg.seed = opts.seed;
  if (opts.exact) cfg.exact_mode = true;
  if (opts.sampled_m > 0) {
    cfg.exact_mode = false;
    cfg.samples = opts.sampled_m;
  }
  if (!opts.out_path.empty()) cfg.out_path = opts.out_path;
  return cfg;
}

void emit(const nlohmann::json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot open output path: " + out_path);
  out << j.dump(2) << "\n";
}

int cmd_run(const CommonOpts& opts) {
  const qcp::ExperimentConfig cfg = load_with_overrides(opts);
  qcp::validate_config(cfg);
  const qcp::RunReport report = qcp::run_qcp(cfg);
  emit(qcp::report_to_json(report), cfg.out_path);
  return report.aborted ? kExitRunAbort : kExitOk;
}

int cmd_bruteforce(const CommonOpts& opts) {
  const qcp::ExperimentConfig cfg = load_with_overrides(opts);
  const qcp::CcopInstance inst = qcp::instance_from_json(cfg.instance_spec);
  const qcp::BruteForceResult r = qcp::brute_force_optimum(inst);
  nlohmann::json j = {{"has_feasible", r.has_feasible},
                      {"optimum", r.optimum},
                      {"feasible_count", r.feasible_count}};
  nlohmann::json optimizers = nlohmann::json::array();
  for (std::uint64_t b : r.optimizers)
    optimizers.push_back(qcp::BitString(b, inst.n).str());
  j["optimizers"] = std::move(optimizers);
  emit(j, cfg.out_path);
  std::cerr << (r.has_feasible
                    ? "optimum " + std::to_string(r.optimum)
                    : std::string("infeasible instance"))
            << "\n";
  return kExitOk;
}

int cmd_moments(const CommonOpts& opts) {
  const qcp::ExperimentConfig cfg = load_with_overrides(opts);
  qcp::validate_config(cfg);
  const qcp::CcopInstance inst = qcp::instance_from_json(cfg.instance_spec);
  const qcp::FeasibleSubspaceView view(inst);
  qcp::FamilySpec spec;
  for (const std::string& k : cfg.family_kinds)
    spec.push_back({qcp::unitary_kind_from_string(k), cfg.local_gate_count});
  const qcp::SearchFamily family = qcp::build_search_family(inst, spec, cfg.seed);
  const qcp::StateVector iota =
      qcp::detail::initial_state_from_config(cfg, inst, view);

  const qcp::MomentMatrices exact = qcp::exact_moments(iota, family, inst, view);
  nlohmann::json j;
  j["exact"] = qcp::moments_to_json(exact);
  if (!cfg.exact_mode) {
    const qcp::MomentMatrices sampled = qcp::sampled_moments(
        iota, family, inst, view, cfg.samples,
        qcp::derive_seed(cfg.seed, {0x6d6f6dULL}));
    j["sampled"] = qcp::moments_to_json(sampled);
    auto deltas = [&](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
      return qcp::matrix_to_json(Eigen::MatrixXcd(a - b));
    };
    j["delta"] = {{"F", deltas(sampled.F, exact.F)},
                  {"G", deltas(sampled.G, exact.G)},
                  {"H", deltas(sampled.H, exact.H)}};
  }
  emit(j, cfg.out_path);
  return kExitOk;
}

int cmd_sweep(const CommonOpts& opts, int count) {
  const qcp::ExperimentConfig base = load_with_overrides(opts);
  qcp::validate_config(base);
  std::vector<std::future<qcp::RunReport>> futures;
  for (int i = 0; i < count; ++i) {
    qcp::ExperimentConfig cfg = base;
    cfg.seed = qcp::derive_seed(base.seed, {0x7377656570ULL,
                                            static_cast<std::uint64_t>(i)});
    futures.push_back(std::async(std::launch::async,
                                 [cfg] { return qcp::run_qcp(cfg); }));
  }
  nlohmann::json reports = nlohmann::json::array();
  bool any_abort = false;
  for (auto& f : futures) {
    const qcp::RunReport r = f.get();
    any_abort = any_abort || r.aborted;
    reports.push_back(qcp::report_to_json(r));
  }
  emit(nlohmann::json{{"schema_version", qcp::kReportSchemaVersion},
                      {"reports", std::move(reports)}},
       base.out_path);
  return any_abort ? kExitRunAbort : kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum conic programming experiment harness"};
  app.require_subcommand(1);

  CommonOpts run_opts, bf_opts, mom_opts, sweep_opts;
  int sweep_count = 4;

  CLI::App* run = app.add_subcommand("run", "iterated QCP experiment");
  add_common(run, run_opts);
  CLI::App* bf = app.add_subcommand("bruteforce", "exact enumeration baseline");
  add_common(bf, bf_opts);
  CLI::App* mom = app.add_subcommand("moments", "exact vs sampled moment matrices");
  add_common(mom, mom_opts);
  CLI::App* sweep = app.add_subcommand("sweep", "concurrent seed sweep");
  add_common(sweep, sweep_opts);
  sweep->add_option("--count", sweep_count, "number of sweep runs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (bf->parsed()) return cmd_bruteforce(bf_opts);
    if (mom->parsed()) return cmd_moments(mom_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, sweep_count);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "run aborted: " << e.what() << "\n";
    return kExitRunAbort;
  }
  return kExitOk;
}
