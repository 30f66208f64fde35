#include <doctest.h>

#include <cmath>

#include "rjtune/diagnostics.hpp"
#include "rjtune/diffusion.hpp"
#include "rjtune/stats.hpp"
#include "rjtune/tuning.hpp"

using namespace rjtune;

namespace {

// Composite-Simpson quadrature of exp(-rate * s) over [0, 60/rate]; the
// truncated tail is ~1e-26/rate. Independent of the closed form under test.
double quad_exp_integral(double rate) {
  const double upper = 60.0 / rate;
  const int panels = 20000;
  const double h = upper / panels;
  double sum = 1.0 + std::exp(-rate * upper);
  for (int i = 1; i < panels; ++i)
    sum += (i % 2 == 1 ? 4.0 : 2.0) * std::exp(-rate * (i * h));
  return sum * h / 3.0;
}

double quad_inefficiency(double tau, double a) {
  const double theta1 = (1.0 - tau) / (a + 1.0);
  const double rate2 = tau * acf_rate_constant();
  return quad_exp_integral(theta1) + quad_exp_integral(rate2);
}

// Empirical ACF at a single continuous lag from a discretized path.
double path_acf(const Eigen::VectorXd& z, double s, double dt) {
  const auto lag = static_cast<int>(std::llround(s / dt));
  return empirical_acf(z, lag)[lag];
}

}  // namespace

TEST_CASE("diffusion spec coefficients") {
  const MoveConfig cfg(0.415, 2.0, 2.38);
  const DiffusionSpec spec = DiffusionSpec::from_move(cfg, DensitySpec::normal(0, 1));
  CHECK(spec.theta1 == doctest::Approx(0.585 / 3.0).epsilon(1e-12));
  CHECK(spec.speed2 ==
        doctest::Approx(2.0 * 0.415 * 2.38 * 2.38 * standard_normal_cdf(-1.19))
            .epsilon(1e-12));
  CHECK_THROWS_AS(DiffusionSpec(0.0, 1.0, DensitySpec::normal(0, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(DiffusionSpec(0.6, 1.0, DensitySpec::normal(0, 1)),
                  std::invalid_argument);
}

TEST_CASE("Z1 ACF closed form") {
  const MoveConfig cfg(0.415, 2.0, 2.38);
  const DiffusionSpec spec = DiffusionSpec::from_move(cfg, DensitySpec::normal(0, 1));
  CHECK(acf_z1(spec, 0.0) == 1.0);
  CHECK(acf_z1(spec, 1.0) == doctest::Approx(std::exp(-0.195)).epsilon(1e-12));
  CHECK_THROWS_AS(acf_z1(spec, -1.0), std::invalid_argument);
}

TEST_CASE("Z2 ACF at the optimal scale is sigma-invariant") {
  const double c = acf_rate_constant();
  CHECK(acf_z2_normal(0.415, 2.38, 1.0, 1.0, 0.0) == 1.0);
  CHECK(acf_z2_normal(0.415, 2.38, 1.0, 1.0, 1.0) ==
        doctest::Approx(std::exp(-0.415 * c)).epsilon(1e-12));
  // The decay rate tau*c is about 0.2751 at tau = 0.415.
  CHECK(0.415 * c == doctest::Approx(0.2751).epsilon(2e-3));
  for (double s : {0.3, 1.0, 4.0}) {
    const double at_sigma1 = acf_z2_normal(0.415, 2.38 * 1.0, 1.0, 1.0, s);
    const double at_sigma3 = acf_z2_normal(0.415, 2.38 * 3.0, 1.0 / 9.0, 3.0, s);
    CHECK(std::abs(at_sigma1 - at_sigma3) < 1e-12);
  }
}

TEST_CASE("inefficiency closed form, argmin, and convexity") {
  // Reference value at (tau, A) = (0.415, 2).
  const double expected = 3.0 / 0.585 + 1.0 / (0.415 * acf_rate_constant());
  CHECK(inefficiency(0.415, 2.0) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(inefficiency(0.415, 2.0) == doctest::Approx(8.7635).epsilon(1e-4));
  CHECK(std::isinf(inefficiency(0.0, 2.0)));
  CHECK(std::isinf(inefficiency(1.0, 2.0)));

  for (double a : {2.0, 5.0, 25.0}) {
    CAPTURE(a);
    // The numerical argmin agrees with the closed-form tau*.
    CHECK(std::abs(inefficiency_argmin(a) - optimal_tau_closed_form(a)) < 1e-6);

    // Convex along a tau grid (second differences nonnegative), and the
    // closed-form minimum beats every grid point.
    const double tau_star = optimal_tau_closed_form(a);
    const double f_star = inefficiency(tau_star, a);
    double prev2 = inefficiency(0.01, a), prev1 = inefficiency(0.02, a);
    for (int i = 3; i <= 99; ++i) {
      const double tau = 0.01 * i;
      const double f = inefficiency(tau, a);
      CHECK(f - 2.0 * prev1 + prev2 > -1e-10);
      CHECK(f_star <= inefficiency(tau, a) + 1e-12);
      prev2 = prev1;
      prev1 = f;
    }
  }
}

TEST_CASE("inefficiency matches quadrature of the ACF integrals") {
  RngStream rng(31, 0);
  for (int i = 0; i < 10; ++i) {
    const double tau = 0.05 + 0.9 * rng.uniform();
    const double a = 2.0 + 23.0 * rng.uniform();
    CHECK(inefficiency(tau, a) == doctest::Approx(quad_inefficiency(tau, a)).epsilon(1e-6));
  }
}

TEST_CASE("curves are flat near the optimum for small A") {
  for (double a : {2.0, 5.0}) {
    double lo = 1e300, hi = 0.0;
    for (double tau = 0.2; tau <= 0.6 + 1e-12; tau += 0.01) {
      const double v = inefficiency(tau, a);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(hi / lo < 1.35);
  }
}

TEST_CASE("inefficiency_curves tables") {
  const std::vector<double> a_list = {2.0, 5.0, 25.0};
  const std::vector<double> tau_grid = {0.1, 0.3, 0.5, 0.7, 0.9};
  const InefficiencyCurves out = inefficiency_curves(a_list, tau_grid, 2.0, 30.0, 29);
  CHECK(out.curves.size() == 15);
  CHECK(out.tau_star.size() == 29);
  CHECK(out.tau_star.front().first == 2.0);
  CHECK(out.tau_star.front().second == doctest::Approx(0.415).epsilon(1e-3));
  // tau*(A) decreasing along the range.
  for (std::size_t i = 1; i < out.tau_star.size(); ++i)
    CHECK(out.tau_star[i].second < out.tau_star[i - 1].second);
  CHECK_THROWS_AS(inefficiency_curves(a_list, std::vector<double>{0.0, 0.5}, 2, 30, 5),
                  std::invalid_argument);
}

TEST_CASE("simulated Z1 is stationary standard normal with the right ACF") {
  const MoveConfig cfg(0.415, 2.0, 2.38);
  const DiffusionSpec spec = DiffusionSpec::from_move(cfg, DensitySpec::normal(0, 1));
  RngStream rng(32, 0);
  const double dt = 0.05;
  const DiffusionPath path = simulate_diffusion(spec, 400000.0 * dt, dt, rng);

  // Long-run variance ~ 1 within 3 autocorrelation-aware standard errors.
  const double var = path.z1.squaredNorm() / path.z1.size();
  const double iat = integrated_autocorrelation_time(path.z1);
  const double se = std::sqrt(2.0 / (path.z1.size() / iat));
  CHECK(std::abs(var - 1.0) < 3.0 * se);

  for (double s : {0.5, 1.0, 2.0})
    CHECK(std::abs(path_acf(path.z1, s, dt) - acf_z1(spec, s)) < 0.02);
}

TEST_CASE("simulated Z2 preserves the target density") {
  const MoveConfig cfg(0.415, 2.0, 2.38 * 1.5);
  const DensitySpec density = DensitySpec::normal(2.0, 1.5);
  const DiffusionSpec spec = DiffusionSpec::from_move(cfg, density);
  RngStream rng(33, 0);
  const double dt = 0.01;  // small step keeps the Euler bias negligible
  const DiffusionPath path = simulate_diffusion(spec, 300000.0 * dt, dt, rng);

  const double mean = path.z2.mean();
  const double var = (path.z2.array() - mean).square().sum() / path.z2.size();
  CHECK(std::abs(mean - 2.0) < 0.05);
  CHECK(std::abs(var - 2.25) < 0.1);

  // Fitted exponential decay of the ACF ~ speed2 / (2 sigma^2) within 5%.
  const double rate_expected = spec.speed2 / (2.0 * 1.5 * 1.5);
  const int fit_lag = static_cast<int>(std::llround(1.0 / (rate_expected * dt)));
  const Eigen::VectorXd acf = empirical_acf(path.z2, fit_lag);
  double num = 0.0, den = 0.0;  // least squares of log acf on s
  for (int l = 1; l <= fit_lag; ++l) {
    const double s = l * dt;
    num += s * std::log(std::max(acf[l], 1e-12));
    den += s * s;
  }
  const double rate_fit = -num / den;
  CHECK(std::abs(rate_fit - rate_expected) / rate_expected < 0.05);
}

TEST_CASE("halving dt moves the lag-1 ACF by less than twice the MC error") {
  const MoveConfig cfg(0.415, 2.0, 2.38);
  const DiffusionSpec spec = DiffusionSpec::from_move(cfg, DensitySpec::normal(0, 1));
  const double horizon = 20000.0;
  RngStream rng_a(34, 0), rng_b(34, 1);
  const DiffusionPath coarse = simulate_diffusion(spec, horizon, 0.1, rng_a, false);
  const DiffusionPath fine = simulate_diffusion(spec, horizon, 0.05, rng_b, false);
  const double acf_coarse = path_acf(coarse.z2, 1.0, 0.1);
  const double acf_fine = path_acf(fine.z2, 1.0, 0.05);
  const double mc_error = 2.0 / std::sqrt(static_cast<double>(coarse.z2.size()) * 0.1);
  CHECK(std::abs(acf_coarse - acf_fine) < 2.0 * mc_error);
}

TEST_CASE("dt stability guard") {
  const DiffusionSpec spec(0.4, 1.0, DensitySpec::normal(0, 1));
  RngStream rng(35, 0);
  CHECK_THROWS_AS(simulate_diffusion(spec, 100.0, 2.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(simulate_diffusion(spec, 0.5, 1.0, rng), std::invalid_argument);
}

TEST_CASE("Z1 marginal check in exact-sampling mode") {
  const MoveConfig cfg(0.415, 2.0, 2.38);
  double prev = 1.0;
  for (int n : {50, 200, 1000}) {
    const TargetSpec target(n, DensitySpec::normal(0, 1), ProposalSpec::same_as_f(1.0));
    RngStream rng(36, static_cast<std::uint64_t>(n));
    const Z1MarginalReport report =
        limit_check_z1_marginal(target, cfg, 100000, rng, true);
    CHECK(report.exact_sampling);
    CHECK_FALSE(report.lattice_too_coarse);
    CHECK(report.ks_jittered < prev);
    prev = report.ks_jittered;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("Z1 marginal check flags the coarse n=7 lattice") {
  const TargetSpec target(7, DensitySpec::normal(0, 1), ProposalSpec::same_as_f(1.0));
  const MoveConfig cfg(0.415, 2.0, 2.38);
  RngStream rng(37, 0);
  const Z1MarginalReport report = limit_check_z1_marginal(target, cfg, 20000, rng, true);
  CHECK(report.lattice_too_coarse);
}

TEST_CASE("Z1 marginal check agrees between MCMC and exact sampling") {
  const TargetSpec target(100, DensitySpec::normal(0, 1), ProposalSpec::same_as_f(1.0));
  const MoveConfig cfg(0.415, 2.0, 2.38);
  RngStream rng_mcmc(38, 0), rng_exact(38, 1);
  const Z1MarginalReport mcmc =
      limit_check_z1_marginal(target, cfg, 4000, rng_mcmc, false);
  const Z1MarginalReport exact =
      limit_check_z1_marginal(target, cfg, 4000, rng_exact, true);
  CHECK(mcmc.draws == exact.draws);
  // Same lattice, same distribution; both KS values sit at the same scale.
  CHECK(std::abs(mcmc.ks_jittered - exact.ks_jittered) < 0.04);
}

TEST_CASE("birth-rate limit check against 1/A and the finite-n value") {
  const MoveConfig cfg2(0.415, 2.0, 2.38);
  const TargetSpec target(100, DensitySpec::normal(0, 1), ProposalSpec::same_as_f(1.0));
  RngStream rng(39, 0);
  const BirthRateReport report = limit_check_birth_rate(target, cfg2, 300000, rng);
  CHECK(report.limit == 0.5);
  CHECK(std::abs(report.estimate - report.analytic_finite_n) <
        3.0 * report.standard_error);

  // n=7 analytic value equals the telescoped sum of the table.
  const TargetSpec small(7, DensitySpec::normal(0, 1), ProposalSpec::same_as_f(1.0));
  RngStream rng7(39, 1);
  const BirthRateReport r7 = limit_check_birth_rate(small, cfg2, 100000, rng7);
  const std::vector<double> p = small.prior.pn_table();
  double sum = 0.0;
  for (std::size_t k = 1; k < p.size(); ++k) sum += p[k];
  sum += 0.0;  // p_n(kmax+1) = 0 term
  CHECK(std::abs(r7.analytic_finite_n - sum / cfg2.a) < 1e-10);
  CHECK(std::abs(r7.estimate - r7.analytic_finite_n) < 4.0 * r7.standard_error);
}
