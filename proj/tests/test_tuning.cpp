#include <doctest.h>

#include <cmath>

#include "rjtune/stats.hpp"
#include "rjtune/target.hpp"
#include "rjtune/tuning.hpp"

using namespace rjtune;

TEST_CASE("optimal ell from the roughness") {
  CHECK(optimal_ell(1.0) == doctest::Approx(2.38).epsilon(1e-15));
  CHECK(optimal_ell(4.0) == doctest::Approx(1.19).epsilon(1e-15));
  // Normal(mu, sigma^2): Upsilon = 1/sigma^2, so the optimum is 2.38 sigma.
  CHECK(optimal_ell(roughness(DensitySpec::normal(0, 3))) ==
        doctest::Approx(2.38 * 3).epsilon(1e-14));
  CHECK_THROWS_AS(optimal_ell(0.0), std::invalid_argument);
}

TEST_CASE("asymptotic update rate") {
  CHECK(asymptotic_update_rate(2.38, 1.0) == doctest::Approx(0.234).epsilon(2e-3));
  CHECK(asymptotic_update_rate(1e-9, 1.0) == doctest::Approx(1.0).epsilon(1e-6));

  // Depends on (ell, Upsilon) only through ell * sqrt(Upsilon).
  CHECK(asymptotic_update_rate(1.19, 4.0) == asymptotic_update_rate(2.38, 1.0));
  RngStream rng(21, 0);
  for (int i = 0; i < 200; ++i) {
    const double ell = 0.1 + 5.0 * rng.uniform();
    const double ups = 0.1 + 10.0 * rng.uniform();
    const double scale = 0.5 + 2.0 * rng.uniform();
    CHECK(asymptotic_update_rate(ell, ups) ==
          doctest::Approx(asymptotic_update_rate(ell * scale, ups / (scale * scale)))
              .epsilon(1e-12));
  }
}

TEST_CASE("optimal tau closed form reproduces the reference triple") {
  CHECK(optimal_tau_closed_form(2.0) == doctest::Approx(0.415).epsilon(1e-3));
  CHECK(optimal_tau_closed_form(5.0) == doctest::Approx(0.334).epsilon(1e-3));
  CHECK(optimal_tau_closed_form(25.0) == doctest::Approx(0.194).epsilon(1e-3));
}

TEST_CASE("the two algebraic forms of tau*(A) agree") {
  const double c = acf_rate_constant();
  RngStream rng(22, 0);
  for (int i = 0; i < 500; ++i) {
    const double a = 2.0 + 100.0 * rng.uniform();
    const double ca1 = c * (a + 1.0);
    const double form_a = (std::sqrt(ca1) - 1.0) / (ca1 - 1.0);
    CHECK(optimal_tau_closed_form(a) == doctest::Approx(form_a).epsilon(1e-12));
  }
}

TEST_CASE("tau*(A) decreases in A and vanishes at infinity") {
  double prev = optimal_tau_closed_form(2.0);
  for (double a = 2.5; a < 2000.0; a *= 1.5) {
    const double t = optimal_tau_closed_form(a);
    CHECK(t < prev);
    prev = t;
  }
  CHECK(optimal_tau_closed_form(1e12) < 1e-5);
}

TEST_CASE("tau from a measured switch rate") {
  // r = 1/4 gives tau = 1/3.
  CHECK(tau_from_rate(0.125, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // Theoretical rate 2(1-tau)/(A+1) at A=2 gives r = 2/3 whatever tau is.
  for (double tau : {0.2, 0.415, 0.7}) {
    const double rate = 2.0 * (1.0 - tau) / 3.0;
    CHECK(tau_from_rate(rate, tau) ==
          doctest::Approx(1.0 / (1.0 + std::sqrt(1.5))).epsilon(1e-12));
  }

  // The rule maps into (0, 1/2) and approaches 1/2 as r -> 1.
  RngStream rng(23, 0);
  for (int i = 0; i < 300; ++i) {
    const double tau = 0.05 + 0.9 * rng.uniform();
    const double r = rng.uniform() * 0.999 + 1e-6;
    const double t = tau_from_rate(r * (1.0 - tau), tau);
    CHECK(t > 0.0);
    CHECK(t < 0.5);
  }
  CHECK(tau_from_rate(0.9999 * 0.5, 0.5) > 0.49);

  CHECK_THROWS_AS(tau_from_rate(0.6, 0.5), std::invalid_argument);   // r > 1
  CHECK_THROWS_AS(tau_from_rate(0.5, 0.5), std::invalid_argument);   // r = 1
  CHECK_THROWS_AS(tau_from_rate(0.0, 0.5), std::invalid_argument);
}

TEST_CASE("tune_ell finds the 0.234 scale on a normal target") {
  const TargetSpec target(200, DensitySpec::normal(0, 1), ProposalSpec::same_as_f(1.0));
  const MoveConfig base(0.415, 2.0, 1.0);
  TuneOptions options;
  TuneBudget budget;
  RngStream rng(24, 0);
  const auto [ell, report] = tune_ell(target, base, options, budget, rng);
  CHECK_FALSE(report.budget_exhausted);
  CHECK(std::abs(ell - 2.38) / 2.38 < 0.15);
  CHECK(std::abs(report.update_accept_rate - 0.234) < 0.02);
  CHECK(report.iterations_used <= budget.max_total_iterations);
}

TEST_CASE("tune_ell rescales with sigma") {
  const TargetSpec target(100, DensitySpec::normal(0, 3), ProposalSpec::same_as_f(1.0));
  const MoveConfig base(0.415, 2.0, 1.0);
  TuneOptions options;
  TuneBudget budget;
  RngStream rng(25, 0);
  const auto [ell, report] = tune_ell(target, base, options, budget, rng);
  CHECK(std::abs(ell - 3.0 * 2.38) / (3.0 * 2.38) < 0.15);
}

TEST_CASE("tune_ell hits an extreme rate target via monotonicity") {
  const TargetSpec target(30, DensitySpec::normal(0, 1), ProposalSpec::same_as_f(1.0));
  const MoveConfig base(0.5, 2.0, 1.0);
  TuneOptions options;
  options.rate_target = 0.95;
  options.tolerance = 0.03;
  TuneBudget budget;
  RngStream rng(26, 0);
  const auto [ell, report] = tune_ell(target, base, options, budget, rng);
  CHECK(ell < 0.5);  // tiny steps are needed for near-certain acceptance
  CHECK(std::abs(report.update_accept_rate - 0.95) < 0.03);

  options.rate_target = 1.0;
  CHECK_THROWS_AS(tune_ell(target, base, options, budget, rng), std::invalid_argument);
}

TEST_CASE("measured rate curve tracks the asymptotic formula") {
  const TargetSpec target(500, DensitySpec::normal(0, 1), ProposalSpec::same_as_f(1.0));
  RngStream rng(27, 0);
  RunOptions opts;
  opts.record_series = false;
  for (double ell : {1.5, 2.38, 3.5}) {
    const MoveConfig cfg(0.5, 2.0, ell);
    RngStream sub = rng.substream(static_cast<std::uint64_t>(ell * 100));
    const ChainTrace trace = run_chain(target, cfg, std::nullopt, 60000, 0, sub, opts);
    const double measured = trace.acceptance_rate(MoveKind::Update);
    CHECK(std::abs(measured - asymptotic_update_rate(ell, 1.0)) < 0.03);
  }
}

TEST_CASE("trial_run_tune on the reference configuration") {
  const TargetSpec target(200, DensitySpec::normal(0, 1), ProposalSpec::same_as_f(1.0));
  const MoveConfig init(0.415, 2.0, 1.0);
  TuneOptions options;
  TuneBudget budget;
  RngStream rng(28, 0);
  const TuneReport report = trial_run_tune(target, init, options, budget, rng);

  CHECK(std::abs(report.update_accept_rate - 0.234) < 0.02);
  CHECK(report.death_accept_rate == 1.0);
  CHECK(std::abs(report.birth_accept_rate - 0.5) < 0.02);

  // Switch rate ~ 2(1-tau)/(A+1) within Monte Carlo error.
  const double expected_switch = 2.0 * (1.0 - init.tau) / (init.a + 1.0);
  CHECK(std::abs(report.switch_rate - expected_switch) < 0.01);

  REQUIRE(report.tau_closed_form.has_value());
  CHECK(*report.tau_closed_form == doctest::Approx(0.415).epsilon(1e-3));
  REQUIRE(report.tau_rate_based.has_value());
  CHECK(std::abs(*report.tau_rate_based - 0.4495) < 0.05);
  CHECK_FALSE(report.a_was_estimated);
}

TEST_CASE("trial_run_tune estimates A when the f/q bound is unknown") {
  const TargetSpec target(200, DensitySpec::normal(0, 1),
                          ProposalSpec::same_as_f(std::nullopt));
  const MoveConfig init(0.415, 2.0, 1.0);
  TuneOptions options;
  TuneBudget budget;
  RngStream rng(29, 0);
  const TuneReport report = trial_run_tune(target, init, options, budget, rng);
  CHECK(report.a_was_estimated);
  REQUIRE(report.a_estimate.has_value());
  CHECK(std::abs(*report.a_estimate - 2.0) < 0.1);
  bool flagged = false;
  for (const auto& f : report.flags) flagged = flagged || f.find("a_estimated") == 0;
  CHECK(flagged);
}

TEST_CASE("invalid initial tau is a construction error") {
  CHECK_THROWS_AS(MoveConfig(1.5, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(MoveConfig(-0.1, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("tiny budget exhausts with a warning instead of failing") {
  const TargetSpec target(50, DensitySpec::normal(0, 1), ProposalSpec::same_as_f(1.0));
  const MoveConfig base(0.415, 2.0, 1.0);
  TuneOptions options;
  TuneBudget budget;
  budget.max_total_iterations = 4000;
  budget.max_rate_evaluations = 1;
  RngStream rng(30, 0);
  const auto [ell, report] = tune_ell(target, base, options, budget, rng);
  CHECK(ell > 0.0);
  CHECK(report.budget_exhausted);
  CHECK_FALSE(report.flags.empty());
}
