#include "rjtune/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rjtune {

double acf_rate_constant() {
  static const double c = 2.38 * 2.38 * standard_normal_cdf(-2.38 / 2.0);
  return c;
}

double optimal_ell(double upsilon) {
  if (!(upsilon > 0.0)) throw std::invalid_argument("optimal_ell: Upsilon must be > 0");
  return 2.38 / std::sqrt(upsilon);
}

double asymptotic_update_rate(double ell, double upsilon) {
  if (!(ell > 0.0) || !(upsilon > 0.0))
    throw std::invalid_argument("asymptotic_update_rate: inputs must be > 0");
  return 2.0 * standard_normal_cdf(-ell * std::sqrt(upsilon) / 2.0);
}

double optimal_tau_closed_form(double a) {
  if (!(a > 0.0)) throw std::invalid_argument("optimal_tau_closed_form: A must be > 0");
  return 1.0 / (1.0 + std::sqrt(acf_rate_constant() * (a + 1.0)));
}

double tau_from_rate(double rate, double tau_current) {
  if (!(tau_current > 0.0 && tau_current < 1.0))
    throw std::invalid_argument("tau_from_rate: tau_current must be in (0,1)");
  if (!(rate > 0.0))
    throw std::invalid_argument("tau_from_rate: rate must be > 0");
  const double r = rate / (1.0 - tau_current);
  if (!(r < 1.0))
    throw std::invalid_argument(
        "tau_from_rate: rate exceeds the model-switch proposal mass (r >= 1)");
  return 1.0 / (1.0 + std::sqrt(1.0 / r));
}

namespace {

struct RateEval {
  double rate;
  std::int64_t iterations;
};

// Measures the update-acceptance rate at a given ell from a stationary
// start, with enough update proposals that the binomial standard error is
// below se_cap.
RateEval measure_update_rate(const TargetSpec& target, const MoveConfig& cfg,
                             double se_cap, double burn_in_fraction, RngStream& rng) {
  const double p_guess = 0.25;  // worst-case-ish variance scale for the target rate
  const auto updates_needed = static_cast<std::int64_t>(
      std::ceil(p_guess * (1.0 - p_guess) / (se_cap * se_cap)));
  auto iterations = static_cast<std::int64_t>(
      std::ceil(static_cast<double>(updates_needed) / cfg.tau * 1.15));
  iterations = std::max<std::int64_t>(iterations, 2000);
  const auto burn = static_cast<std::int64_t>(
      std::floor(burn_in_fraction * static_cast<double>(iterations)));

  RunOptions opts;
  opts.record_series = false;
  const ChainTrace trace = run_chain(target, cfg, std::nullopt, iterations + burn, burn,
                                     rng, opts);
  return {trace.acceptance_rate(MoveKind::Update), iterations + burn};
}

MoveConfig with_ell(const MoveConfig& cfg, double ell) {
  return MoveConfig(cfg.tau, cfg.a, ell);
}

}  // namespace

std::pair<double, TuneReport> tune_ell(const TargetSpec& target, const MoveConfig& cfg_base,
                                       const TuneOptions& options, const TuneBudget& budget,
                                       RngStream& rng) {
  if (!(options.rate_target > 0.0 && options.rate_target < 1.0))
    throw std::invalid_argument("tune_ell: rate_target must be in (0,1)");
  if (!(options.tolerance > 0.0))
    throw std::invalid_argument("tune_ell: tolerance must be > 0");

  TuneReport report;
  std::int64_t iters_used = 0;
  int evals = 0;
  const double se_cap = options.tolerance / 2.0;

  const auto budget_left = [&]() {
    return iters_used < budget.max_total_iterations && evals < budget.max_rate_evaluations;
  };
  const auto eval_rate = [&](double ell) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(evals));
    const RateEval e = measure_update_rate(target, with_ell(cfg_base, ell), se_cap,
                                           options.burn_in_fraction, sub);
    iters_used += e.iterations;
    ++evals;
    return e.rate;
  };

  // Pilot estimate of the roughness gives the starting point.
  RngStream pilot = rng.substream(0xfffe);
  const double upsilon_hat = estimate_roughness_mc(target.density, 20000, pilot).estimate;
  double ell = optimal_ell(upsilon_hat);

  double best_ell = ell;
  double best_rate = eval_rate(ell);
  double best_gap = std::abs(best_rate - options.rate_target);

  // Bracket: rate(ell) is monotone decreasing, so walk by factors of two
  // until the target rate is straddled.
  double ell_lo = ell, ell_hi = ell;  // rate(ell_lo) > target > rate(ell_hi)
  double rate_lo = best_rate, rate_hi = best_rate;
  bool bracketed = false;
  if (best_rate > options.rate_target) {
    while (budget_left()) {
      ell_hi = ell_hi * 2.0;
      rate_hi = eval_rate(ell_hi);
      if (std::abs(rate_hi - options.rate_target) < best_gap) {
        best_gap = std::abs(rate_hi - options.rate_target);
        best_ell = ell_hi;
        best_rate = rate_hi;
      }
      if (rate_hi < options.rate_target) {
        bracketed = true;
        break;
      }
      ell_lo = ell_hi;
      rate_lo = rate_hi;
    }
  } else {
    while (budget_left()) {
      ell_lo = ell_lo / 2.0;
      rate_lo = eval_rate(ell_lo);
      if (std::abs(rate_lo - options.rate_target) < best_gap) {
        best_gap = std::abs(rate_lo - options.rate_target);
        best_ell = ell_lo;
        best_rate = rate_lo;
      }
      if (rate_lo > options.rate_target) {
        bracketed = true;
        break;
      }
      ell_hi = ell_lo;
      rate_hi = rate_lo;
    }
  }

  if (!bracketed) {
    report.budget_exhausted = true;
    report.flags.push_back("budget_exhausted_before_bracket");
  } else {
    // Bisection on log ell.
    while (budget_left()) {
      const double mid = std::sqrt(ell_lo * ell_hi);
      const double rate = eval_rate(mid);
      const double gap = std::abs(rate - options.rate_target);
      if (gap < best_gap) {
        best_gap = gap;
        best_ell = mid;
        best_rate = rate;
      }
      if (gap <= options.tolerance * 0.5) break;
      if (rate > options.rate_target)
        ell_lo = mid;
      else
        ell_hi = mid;
      if (ell_hi / ell_lo < 1.0 + 1e-4) break;
    }
    if (!budget_left() && best_gap > options.tolerance) {
      report.budget_exhausted = true;
      report.flags.push_back("budget_exhausted_during_bisection");
    }
  }

  report.recommended_ell = best_ell;
  report.update_accept_rate = best_rate;
  report.iterations_used = iters_used;
  return {best_ell, report};
}

TuneReport trial_run_tune(const TargetSpec& target, const MoveConfig& cfg_init,
                          const TuneOptions& options, const TuneBudget& budget,
                          RngStream& rng) {
  auto [ell, report] = tune_ell(target, cfg_init, options, budget, rng);

  // Measurement run at the tuned scale. Sized so the switch-rate standard
  // error is comfortably below the tau resolution anyone would act on.
  const std::int64_t measure_iters =
      std::max<std::int64_t>(100'000, budget.max_total_iterations / 8);
  const auto burn = static_cast<std::int64_t>(
      std::floor(options.burn_in_fraction * static_cast<double>(measure_iters)));
  RngStream sub = rng.substream(0xffff);
  RunOptions opts;
  opts.record_series = false;
  const MoveConfig cfg(cfg_init.tau, cfg_init.a, ell);
  const ChainTrace trace =
      run_chain(target, cfg, std::nullopt, measure_iters + burn, burn, sub, opts);
  report.iterations_used += measure_iters + burn;

  report.update_accept_rate = trace.acceptance_rate(MoveKind::Update);
  report.birth_accept_rate = trace.acceptance_rate(MoveKind::Birth);
  report.death_accept_rate = trace.acceptance_rate(MoveKind::Death);
  report.switch_rate = trace.switch_accept_rate();

  // Closed-form tau needs A: taken from the known f/q bound when supplied,
  // otherwise inverted from the mean birth acceptance probability. That
  // inversion is only meaningful under this target structure, hence the flag.
  if (target.proposal.a()) {
    report.tau_closed_form = optimal_tau_closed_form(*target.proposal.a());
  } else {
    const double mean_birth = trace.mean_accept_prob(MoveKind::Birth);
    if (mean_birth > 0.0) {
      report.a_estimate = 1.0 / mean_birth;
      report.a_was_estimated = true;
      report.flags.push_back("a_estimated_from_birth_acceptance");
      report.tau_closed_form = optimal_tau_closed_form(*report.a_estimate);
    } else {
      report.flags.push_back("no_accepted_births_cannot_estimate_a");
    }
  }

  if (report.switch_rate > 0.0 && report.switch_rate < 1.0 - cfg.tau) {
    report.tau_rate_based = tau_from_rate(report.switch_rate, cfg.tau);
  } else {
    report.flags.push_back("switch_rate_inconsistent_with_tau");
  }

  if (report.switch_rate < 0.01) report.flags.push_back("very_small_switch_rate");
  if (report.birth_accept_rate < 0.01) report.flags.push_back("very_small_birth_acceptance");

  return report;
}

}  // namespace rjtune
