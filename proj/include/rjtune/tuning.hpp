#ifndef RJTUNE_TUNING_HPP
#define RJTUNE_TUNING_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rjtune/kernel.hpp"
#include "rjtune/rng.hpp"
#include "rjtune/stats.hpp"
#include "rjtune/target.hpp"

namespace rjtune {

/// The constant c = 2.38^2 Phi(-2.38/2) shared by the closed-form tau rule
/// and the limiting-process ACF rates (single source of truth).
double acf_rate_constant();

/// Optimal random-walk scale 2.38 / sqrt(Upsilon).
double optimal_ell(double upsilon);

/// Limiting update-acceptance rate 2 Phi(-ell sqrt(Upsilon) / 2); equals
/// 0.234 at the optimal ell.
double asymptotic_update_rate(double ell, double upsilon);

/// Optimal update-move probability tau*(A) = 1 / (1 + sqrt(c (A+1))).
double optimal_tau_closed_form(double a);

/// Rate-based rule: r = rate / (1 - tau_current), tau = 1 / (1 + sqrt(1/r)).
/// The rate is the accepted-K-move count over all iterations; r >= 1 is
/// inconsistent and rejected.
double tau_from_rate(double rate, double tau_current);

struct TuneBudget {
  std::int64_t max_total_iterations = 4'000'000;
  int max_rate_evaluations = 48;
};

struct TuneOptions {
  double rate_target = 0.234;
  double tolerance = 0.02;
  double burn_in_fraction = 0.10;
};

struct TuneReport {
  double recommended_ell = 0.0;
  double update_accept_rate = 0.0;  // measured at recommended_ell
  double switch_rate = 0.0;         // accepted K-moves / iterations
  double birth_accept_rate = 0.0;
  double death_accept_rate = 0.0;
  std::optional<double> tau_closed_form;
  std::optional<double> tau_rate_based;
  std::optional<double> a_estimate;  // 1 / mean birth acceptance
  bool a_was_estimated = false;
  std::int64_t iterations_used = 0;
  bool budget_exhausted = false;
  std::vector<std::string> flags;
};

/// Stochastic root-find of the ell giving the target update-acceptance
/// rate (bracketing then bisection; the rate is monotone decreasing in
/// ell). Returns the chosen ell and a report of the search.
std::pair<double, TuneReport> tune_ell(const TargetSpec& target, const MoveConfig& cfg_base,
                                       const TuneOptions& options, const TuneBudget& budget,
                                       RngStream& rng);

/// Full trial-run procedure: tunes ell, then measures per-move acceptance
/// rates and the model-switch rate at the tuned configuration, and emits
/// both the closed-form and the rate-based tau recommendations.
TuneReport trial_run_tune(const TargetSpec& target, const MoveConfig& cfg_init,
                          const TuneOptions& options, const TuneBudget& budget,
                          RngStream& rng);

}  // namespace rjtune

#endif  // RJTUNE_TUNING_HPP
