#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rjtune/config.hpp"
#include "rjtune/diagnostics.hpp"
#include "rjtune/diffusion.hpp"
#include "rjtune/io.hpp"
#include "rjtune/kernel.hpp"
#include "rjtune/parallel.hpp"
#include "rjtune/tuning.hpp"

namespace {

using namespace rjtune;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitNumerical = 4;

struct FlagOverrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  std::optional<double> budget_seconds;
  bool override_budget = false;

  void apply(CommonConfig& common) const {
    if (seed) common.seed = *seed;
    if (workers) common.workers = *workers;
    if (out_dir) common.out_dir = *out_dir;
    if (budget_seconds) common.budget_seconds = *budget_seconds;
    if (override_budget) common.override_budget = true;
  }
};

nlohmann::json load_doc(const FlagOverrides& flags) {
  if (flags.config_path.empty()) return nlohmann::json::object();
  return load_config_file(flags.config_path);
}

std::filesystem::path out_path(const CommonConfig& common, const std::string& name) {
  std::filesystem::create_directories(common.out_dir);
  return std::filesystem::path(common.out_dir) / name;
}

int cmd_sample(const FlagOverrides& flags) {
  SampleConfig cfg = parse_sample_config(load_doc(flags));
  flags.apply(cfg.common);
  const TargetSpec target = cfg.target.build();
  const MoveConfig move = cfg.move.build(target);

  std::vector<ChainTrace> traces(static_cast<std::size_t>(cfg.chains));
  parallel_for_indexed(traces.size(), cfg.common.workers, [&](std::size_t c) {
    RngStream rng(cfg.common.seed, static_cast<std::uint64_t>(c) + 1);
    std::optional<ChainState> init;
    if (cfg.cold_init) init = ChainState::cold(target);
    traces[c] = run_chain(target, move, std::move(init), cfg.iterations, cfg.burn_in, rng);
  });

  nlohmann::json summary;
  summary["version"] = kVersion;
  summary["seed"] = cfg.common.seed;
  summary["n"] = cfg.target.n;
  summary["tau"] = move.tau;
  summary["a"] = move.a;
  summary["ell"] = move.ell;
  summary["iterations"] = cfg.iterations;
  summary["burn_in"] = cfg.burn_in;
  nlohmann::json chains = nlohmann::json::array();
  for (std::size_t c = 0; c < traces.size(); ++c) {
    const ChainTrace& trace = traces[c];
    write_trace_csv(out_path(cfg.common, "trace_c" + std::to_string(c) + ".csv"), trace);
    nlohmann::json jc;
    jc["chain"] = c;
    jc["proposed"] = {{"update", trace.proposed_count[0]},
                      {"birth", trace.proposed_count[1]},
                      {"death", trace.proposed_count[2]}};
    jc["accepted"] = {{"update", trace.accepted_count[0]},
                      {"birth", trace.accepted_count[1]},
                      {"death", trace.accepted_count[2]}};
    chains.push_back(jc);
  }
  summary["chains"] = chains;
  const std::string text = summary.dump(2) + "\n";
  atomic_write(out_path(cfg.common, "sample_summary.json"),
               [&](std::ostream& out) { out << text; });
  std::cout << "wrote " << traces.size() << " trace file(s) to " << cfg.common.out_dir
            << "\n";
  return kExitOk;
}

int cmd_tune(const FlagOverrides& flags) {
  TuneConfig cfg = parse_tune_config(load_doc(flags));
  flags.apply(cfg.common);
  const TargetSpec target = cfg.target.build();
  const MoveConfig move = cfg.move.build(target);

  RngStream rng(cfg.common.seed, 1);
  const TuneReport report = trial_run_tune(target, move, cfg.options, cfg.budget, rng);

  const std::string json_text = tune_report_json(report, cfg.common.seed);
  atomic_write(out_path(cfg.common, "tune_report.json"),
               [&](std::ostream& out) { out << json_text; });
  std::cout << tune_report_table(report);
  return kExitOk;
}

int cmd_curves(const FlagOverrides& flags) {
  CurvesConfig cfg = parse_curves_config(load_doc(flags));
  flags.apply(cfg.common);

  std::vector<double> tau_grid;
  tau_grid.reserve(static_cast<std::size_t>(cfg.tau_points));
  for (int i = 0; i < cfg.tau_points; ++i)
    tau_grid.push_back(cfg.tau_points == 1
                           ? cfg.tau_start
                           : cfg.tau_start + (cfg.tau_stop - cfg.tau_start) *
                                 static_cast<double>(i) /
                                 static_cast<double>(cfg.tau_points - 1));

  const InefficiencyCurves curves =
      inefficiency_curves(cfg.a_list, tau_grid, cfg.a_min, cfg.a_max, cfg.a_points);
  write_inefficiency_curves_csv(out_path(cfg.common, "inefficiency_curves.csv"), curves);
  write_tau_star_csv(out_path(cfg.common, "tau_star.csv"), curves);
  std::cout << "wrote inefficiency_curves.csv and tau_star.csv to " << cfg.common.out_dir
            << "\n";
  return kExitOk;
}

int cmd_experiment(const FlagOverrides& flags) {
  ExperimentCliConfig cfg = parse_experiment_config(load_doc(flags));
  flags.apply(cfg.common);
  cfg.experiment.master_seed = cfg.common.seed;
  cfg.experiment.workers = cfg.common.workers;
  cfg.experiment.budget_seconds = cfg.common.budget_seconds;
  cfg.experiment.override_budget = cfg.common.override_budget;

  const ExperimentResult result = run_experiment(cfg.experiment);
  write_experiment_csv(out_path(cfg.common, "experiment.csv"), result);
  const std::string meta = experiment_metadata_json(result);
  atomic_write(out_path(cfg.common, "experiment_meta.json"),
               [&](std::ostream& out) { out << meta; });
  std::cout << "wrote experiment.csv and experiment_meta.json to " << cfg.common.out_dir
            << "\n";
  return kExitOk;
}

int cmd_limitcheck(const FlagOverrides& flags) {
  LimitCheckConfig cfg = parse_limitcheck_config(load_doc(flags));
  flags.apply(cfg.common);

  std::vector<LimitCheckRow> rows;
  for (std::size_t i = 0; i < cfg.n_ladder.size(); ++i) {
    const int n = cfg.n_ladder[i];
    TargetConfig tc = cfg.target;
    tc.n = n;
    const TargetSpec target = tc.build();
    const MoveConfig move = cfg.move.build(target);

    RngStream birth_rng(cfg.common.seed, 2 * i + 1);
    const BirthRateReport birth =
        limit_check_birth_rate(target, move, cfg.birth_iterations, birth_rng);
    rows.push_back({"birth_rate", n, birth.estimate, birth.limit,
                    std::abs(birth.estimate - birth.limit)});

    RngStream z1_rng(cfg.common.seed, 2 * i + 2);
    const Z1MarginalReport z1 = limit_check_z1_marginal(target, move, cfg.z1_samples,
                                                        z1_rng, cfg.exact_sampling);
    rows.push_back({"z1_ks_jittered", n, z1.ks_jittered, 0.0, z1.ks_jittered});
    if (z1.lattice_too_coarse)
      std::cout << "note: n=" << n << " has a coarse K lattice (kmax="
                << target.prior.kmax() << "); the KS figures are unreliable\n";
  }

  write_limitcheck_csv(out_path(cfg.common, "limitcheck.csv"), rows);
  std::cout << "wrote limitcheck.csv to " << cfg.common.out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trans-dimensional MCMC toolkit: reversible-jump sampling with "
               "closed-form tuning rules and limiting-diffusion analytics"};
  app.require_subcommand(1);

  FlagOverrides flags;
  for (auto* sub : {app.add_subcommand("sample", "run chains, write trace CSV + summary JSON"),
                    app.add_subcommand("tune", "trial-run tuner for ell and tau"),
                    app.add_subcommand("curves", "inefficiency curves and tau*(A) tables"),
                    app.add_subcommand("experiment", "MAD sweep over the (A, tau) grid"),
                    app.add_subcommand("limitcheck", "birth-rate and Z1-marginal limit checks")}) {
    sub->add_option("--config", flags.config_path, "JSON config file");
    sub->add_option("--seed", flags.seed, "master seed (overrides config)");
    sub->add_option("--workers", flags.workers, "worker threads (0 = all cores)");
    sub->add_option("--out", flags.out_dir, "output directory");
    sub->add_option("--budget-seconds", flags.budget_seconds, "cost guard budget");
    sub->add_flag("--override-budget", flags.override_budget, "run past the cost guard");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (app.got_subcommand("sample")) return cmd_sample(flags);
    if (app.got_subcommand("tune")) return cmd_tune(flags);
    if (app.got_subcommand("curves")) return cmd_curves(flags);
    if (app.got_subcommand("experiment")) return cmd_experiment(flags);
    if (app.got_subcommand("limitcheck")) return cmd_limitcheck(flags);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const NumericalGuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}
