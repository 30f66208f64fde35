#ifndef RJTUNE_CONFIG_HPP
#define RJTUNE_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rjtune/diagnostics.hpp"
#include "rjtune/kernel.hpp"
#include "rjtune/target.hpp"
#include "rjtune/tuning.hpp"

namespace rjtune {

/// Invalid or unknown configuration. Maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Settings shared by every subcommand; flag values win over file values.
struct CommonConfig {
  std::uint64_t seed = 12345;
  int workers = 0;  // 0 = hardware concurrency
  std::string out_dir = ".";
  double budget_seconds = 600.0;
  bool override_budget = false;
};

struct TargetConfig {
  int n = 7;
  double mu = 0.0;
  double sigma = 1.0;
  std::optional<double> astar = 1.0;  // absent = f/q bound unknown

  TargetSpec build() const;
};

struct MoveConfigInput {
  std::optional<double> tau;
  std::optional<double> a;
  std::optional<double> ell;

  /// Resolves defaults against a target: A from the f/q bound (2 when
  /// unknown), ell = 2.38/sqrt(Upsilon), tau = tau*(A).
  MoveConfig build(const TargetSpec& target) const;
};

struct SampleConfig {
  CommonConfig common;
  TargetConfig target;
  MoveConfigInput move;
  std::int64_t iterations = 100000;
  std::int64_t burn_in = 0;
  int chains = 1;
  bool cold_init = false;  // default "from_target"
};

struct TuneConfig {
  CommonConfig common;
  TargetConfig target;
  MoveConfigInput move;
  TuneOptions options;
  TuneBudget budget;
};

struct CurvesConfig {
  CommonConfig common;
  std::vector<double> a_list = {2.0, 5.0, 25.0};
  double tau_start = 0.01;
  double tau_stop = 0.99;
  int tau_points = 99;
  double a_min = 2.0;
  double a_max = 30.0;
  int a_points = 57;
};

struct ExperimentCliConfig {
  CommonConfig common;
  ExperimentConfig experiment;  // master_seed/workers/budget filled from common
};

struct LimitCheckConfig {
  CommonConfig common;
  TargetConfig target;  // n ignored; the ladder drives it
  MoveConfigInput move;
  std::vector<int> n_ladder = {50, 200, 1000};
  bool exact_sampling = true;
  std::int64_t z1_samples = 200000;
  std::int64_t birth_iterations = 1000000;
};

// Parsers reject unknown keys anywhere in the document (strict mode) and
// name the offending path in the error.
SampleConfig parse_sample_config(const nlohmann::json& doc);
TuneConfig parse_tune_config(const nlohmann::json& doc);
CurvesConfig parse_curves_config(const nlohmann::json& doc);
ExperimentCliConfig parse_experiment_config(const nlohmann::json& doc);
LimitCheckConfig parse_limitcheck_config(const nlohmann::json& doc);

nlohmann::json load_config_file(const std::string& path);

}  // namespace rjtune

#endif  // RJTUNE_CONFIG_HPP
