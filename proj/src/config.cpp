#include "rjtune/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "rjtune/tuning.hpp"

namespace rjtune {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("config: " + path + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.contains(key))
      throw ConfigError("config: unknown key '" + path + key + "'");
  }
}

template <typename T>
T get_or(const json& obj, const std::string& path, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for '" + path + key + "'");
  }
}

template <typename T>
std::optional<T> get_opt(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for '" + path + key + "'");
  }
}

CommonConfig parse_common(const json& doc) {
  CommonConfig c;
  c.seed = get_or<std::uint64_t>(doc, "", "seed", c.seed);
  c.workers = get_or<int>(doc, "", "workers", c.workers);
  c.out_dir = get_or<std::string>(doc, "", "out", c.out_dir);
  c.budget_seconds = get_or<double>(doc, "", "budget_seconds", c.budget_seconds);
  c.override_budget = get_or<bool>(doc, "", "override_budget", c.override_budget);
  return c;
}

const std::set<std::string> kCommonKeys = {"seed", "workers", "out", "budget_seconds",
                                           "override_budget"};

std::set<std::string> with_common(std::set<std::string> extra) {
  extra.insert(kCommonKeys.begin(), kCommonKeys.end());
  return extra;
}

TargetConfig parse_target(const json& doc) {
  TargetConfig t;
  if (!doc.contains("target")) return t;
  const json& obj = doc.at("target");
  require_keys(obj, "target.", {"n", "density", "proposal"});
  t.n = get_or<int>(obj, "target.", "n", t.n);
  if (obj.contains("density")) {
    const json& d = obj.at("density");
    require_keys(d, "target.density.", {"family", "mu", "sigma"});
    const std::string family = get_or<std::string>(d, "target.density.", "family", "normal");
    if (family != "normal")
      throw ConfigError(
          "config: target.density.family '" + family +
          "' is not available from a config file (custom densities are programmatic)");
    t.mu = get_or<double>(d, "target.density.", "mu", t.mu);
    t.sigma = get_or<double>(d, "target.density.", "sigma", t.sigma);
  }
  if (obj.contains("proposal")) {
    const json& p = obj.at("proposal");
    require_keys(p, "target.proposal.", {"mode", "astar"});
    const std::string mode = get_or<std::string>(p, "target.proposal.", "mode", "same_as_f");
    if (mode != "same_as_f")
      throw ConfigError(
          "config: target.proposal.mode '" + mode +
          "' is not available from a config file (custom proposals are programmatic)");
    t.astar = get_opt<double>(p, "target.proposal.", "astar");
  }
  return t;
}

MoveConfigInput parse_move(const json& doc) {
  MoveConfigInput m;
  if (!doc.contains("move")) return m;
  const json& obj = doc.at("move");
  require_keys(obj, "move.", {"tau", "a", "ell"});
  m.tau = get_opt<double>(obj, "move.", "tau");
  m.a = get_opt<double>(obj, "move.", "a");
  m.ell = get_opt<double>(obj, "move.", "ell");
  return m;
}

std::vector<double> parse_tau_grid(const json& value, const std::string& path) {
  std::vector<double> grid;
  if (value.is_array()) {
    grid = value.get<std::vector<double>>();
  } else if (value.is_object()) {
    require_keys(value, path + ".", {"start", "stop", "points"});
    const double start = get_or<double>(value, path + ".", "start", 0.1);
    const double stop = get_or<double>(value, path + ".", "stop", 0.9);
    const int points = get_or<int>(value, path + ".", "points", 9);
    if (points < 1 || !(start > 0.0) || !(stop < 1.0) || !(stop >= start))
      throw ConfigError("config: invalid " + path + " range");
    for (int i = 0; i < points; ++i)
      grid.push_back(points == 1 ? start
                                 : start + (stop - start) * static_cast<double>(i) /
                                       static_cast<double>(points - 1));
  } else {
    throw ConfigError("config: " + path + " must be an array or a range object");
  }
  if (grid.empty()) throw ConfigError("config: " + path + " is empty");
  return grid;
}

}  // namespace

TargetSpec TargetConfig::build() const {
  try {
    return TargetSpec(n, DensitySpec::normal(mu, sigma), ProposalSpec::same_as_f(astar));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

MoveConfig MoveConfigInput::build(const TargetSpec& target) const {
  double a_value;
  if (a) {
    a_value = *a;
  } else if (target.proposal.a()) {
    a_value = *target.proposal.a();
  } else {
    a_value = 2.0;  // working default when the f/q bound is unknown
  }
  const double ell_value = ell ? *ell : optimal_ell(roughness(target.density));
  const double tau_value = tau ? *tau : optimal_tau_closed_form(a_value);
  try {
    return MoveConfig(tau_value, a_value, ell_value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

SampleConfig parse_sample_config(const json& doc) {
  require_keys(doc, "",
               with_common({"target", "move", "iterations", "burn_in", "chains", "init"}));
  SampleConfig c;
  c.common = parse_common(doc);
  c.target = parse_target(doc);
  c.move = parse_move(doc);
  c.iterations = get_or<std::int64_t>(doc, "", "iterations", c.iterations);
  c.burn_in = get_or<std::int64_t>(doc, "", "burn_in", c.burn_in);
  c.chains = get_or<int>(doc, "", "chains", c.chains);
  const std::string init = get_or<std::string>(doc, "", "init", "from_target");
  if (init == "cold")
    c.cold_init = true;
  else if (init != "from_target")
    throw ConfigError("config: init must be 'from_target' or 'cold'");
  if (c.iterations < 0 || c.burn_in < 0 || c.iterations < c.burn_in)
    throw ConfigError("config: need iterations >= burn_in >= 0");
  if (c.chains < 1) throw ConfigError("config: chains must be >= 1");
  return c;
}

TuneConfig parse_tune_config(const json& doc) {
  require_keys(doc, "",
               with_common({"target", "move", "rate_target", "tolerance", "budget"}));
  TuneConfig c;
  c.common = parse_common(doc);
  c.target = parse_target(doc);
  c.move = parse_move(doc);
  c.options.rate_target = get_or<double>(doc, "", "rate_target", c.options.rate_target);
  c.options.tolerance = get_or<double>(doc, "", "tolerance", c.options.tolerance);
  if (doc.contains("budget")) {
    const json& b = doc.at("budget");
    require_keys(b, "budget.", {"max_iterations", "max_rate_evaluations"});
    c.budget.max_total_iterations =
        get_or<std::int64_t>(b, "budget.", "max_iterations", c.budget.max_total_iterations);
    c.budget.max_rate_evaluations =
        get_or<int>(b, "budget.", "max_rate_evaluations", c.budget.max_rate_evaluations);
  }
  if (!(c.options.rate_target > 0.0 && c.options.rate_target < 1.0))
    throw ConfigError("config: rate_target must be in (0,1)");
  if (!(c.options.tolerance > 0.0)) throw ConfigError("config: tolerance must be > 0");
  return c;
}

CurvesConfig parse_curves_config(const json& doc) {
  require_keys(doc, "", with_common({"a_list", "tau_grid", "a_range"}));
  CurvesConfig c;
  c.common = parse_common(doc);
  c.a_list = get_or<std::vector<double>>(doc, "", "a_list", c.a_list);
  if (doc.contains("tau_grid")) {
    const json& g = doc.at("tau_grid");
    require_keys(g, "tau_grid.", {"start", "stop", "points"});
    c.tau_start = get_or<double>(g, "tau_grid.", "start", c.tau_start);
    c.tau_stop = get_or<double>(g, "tau_grid.", "stop", c.tau_stop);
    c.tau_points = get_or<int>(g, "tau_grid.", "points", c.tau_points);
  }
  if (doc.contains("a_range")) {
    const json& r = doc.at("a_range");
    require_keys(r, "a_range.", {"min", "max", "points"});
    c.a_min = get_or<double>(r, "a_range.", "min", c.a_min);
    c.a_max = get_or<double>(r, "a_range.", "max", c.a_max);
    c.a_points = get_or<int>(r, "a_range.", "points", c.a_points);
  }
  // tau endpoints are open: the inefficiency is infinite at 0 and 1.
  if (!(c.tau_start > 0.0 && c.tau_stop < 1.0 && c.tau_stop >= c.tau_start))
    throw ConfigError("config: tau_grid must lie strictly inside (0,1)");
  if (c.tau_points < 1 || c.a_points < 1)
    throw ConfigError("config: grid point counts must be >= 1");
  if (c.a_list.empty()) throw ConfigError("config: a_list is empty");
  return c;
}

ExperimentCliConfig parse_experiment_config(const json& doc) {
  require_keys(doc, "",
               with_common({"n", "mu", "sigma", "a_list", "tau_grid", "replicates",
                            "iterations", "burn_in"}));
  ExperimentCliConfig c;
  c.common = parse_common(doc);
  ExperimentConfig& e = c.experiment;
  e.n = get_or<int>(doc, "", "n", e.n);
  e.mu = get_or<double>(doc, "", "mu", e.mu);
  e.sigma = get_or<double>(doc, "", "sigma", e.sigma);
  e.a_list = get_or<std::vector<double>>(doc, "", "a_list", e.a_list);
  if (doc.contains("tau_grid")) e.tau_grid = parse_tau_grid(doc.at("tau_grid"), "tau_grid");
  e.replicates = get_or<int>(doc, "", "replicates", e.replicates);
  e.iterations = get_or<std::int64_t>(doc, "", "iterations", e.iterations);
  e.burn_in = get_or<std::int64_t>(doc, "", "burn_in", e.burn_in);
  e.master_seed = c.common.seed;
  e.workers = c.common.workers;
  e.budget_seconds = c.common.budget_seconds;
  e.override_budget = c.common.override_budget;
  return c;
}

LimitCheckConfig parse_limitcheck_config(const json& doc) {
  require_keys(doc, "",
               with_common({"target", "move", "n_ladder", "mode", "z1_samples",
                            "birth_iterations"}));
  LimitCheckConfig c;
  c.common = parse_common(doc);
  c.target = parse_target(doc);
  c.move = parse_move(doc);
  c.n_ladder = get_or<std::vector<int>>(doc, "", "n_ladder", c.n_ladder);
  const std::string mode = get_or<std::string>(doc, "", "mode", "exact");
  if (mode == "exact")
    c.exact_sampling = true;
  else if (mode == "mcmc")
    c.exact_sampling = false;
  else
    throw ConfigError("config: mode must be 'exact' or 'mcmc'");
  c.z1_samples = get_or<std::int64_t>(doc, "", "z1_samples", c.z1_samples);
  c.birth_iterations = get_or<std::int64_t>(doc, "", "birth_iterations", c.birth_iterations);
  if (c.n_ladder.empty()) throw ConfigError("config: n_ladder is empty");
  for (int n : c.n_ladder)
    if (n < 7) throw ConfigError("config: n_ladder entries must be >= 7");
  return c;
}

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config: parse error in '" + path + "': " + e.what());
  }
}

}  // namespace rjtune
