#include "rjtune/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rjtune/stats.hpp"
#include "rjtune/tuning.hpp"

namespace rjtune {

DiffusionSpec::DiffusionSpec(double theta1_in, double speed2_in, DensitySpec density_in)
    : theta1(theta1_in), speed2(speed2_in), density(std::move(density_in)) {
  if (!(theta1 > 0.0 && theta1 < 0.5))
    throw std::invalid_argument("DiffusionSpec: theta1 must be in (0, 1/2)");
  if (!(speed2 > 0.0)) throw std::invalid_argument("DiffusionSpec: speed2 must be > 0");
}

DiffusionSpec DiffusionSpec::from_move(const MoveConfig& cfg, const DensitySpec& density) {
  const double upsilon = roughness(density);
  const double theta1 = (1.0 - cfg.tau) / (cfg.a + 1.0);
  const double speed2 = 2.0 * cfg.tau * cfg.ell * cfg.ell *
                        standard_normal_cdf(-cfg.ell * std::sqrt(upsilon) / 2.0);
  return DiffusionSpec(theta1, speed2, density);
}

double acf_z1(const DiffusionSpec& spec, double s) {
  if (!(s >= 0.0)) throw std::invalid_argument("acf_z1: s must be >= 0");
  return std::exp(-spec.theta1 * s);
}

double acf_z2_normal(double tau, double ell, double upsilon, double sigma, double s) {
  if (!(s >= 0.0)) throw std::invalid_argument("acf_z2_normal: s must be >= 0");
  if (!(tau > 0.0 && tau < 1.0) || !(ell > 0.0) || !(upsilon > 0.0) || !(sigma > 0.0))
    throw std::invalid_argument("acf_z2_normal: invalid parameter");
  const double speed2 =
      2.0 * tau * ell * ell * standard_normal_cdf(-ell * std::sqrt(upsilon) / 2.0);
  return std::exp(-speed2 / (2.0 * sigma * sigma) * s);
}

double inefficiency(double tau, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("inefficiency: A must be > 0");
  if (!(tau >= 0.0 && tau <= 1.0))
    throw std::invalid_argument("inefficiency: tau must be in [0,1]");
  if (tau == 0.0 || tau == 1.0) return std::numeric_limits<double>::infinity();
  return (a + 1.0) / (1.0 - tau) + 1.0 / (tau * acf_rate_constant());
}

InefficiencyCurves inefficiency_curves(std::span<const double> a_list,
                                       std::span<const double> tau_grid,
                                       double a_min, double a_max, int a_points) {
  if (a_list.empty() || tau_grid.empty())
    throw std::invalid_argument("inefficiency_curves: empty grid");
  for (double tau : tau_grid)
    if (!(tau > 0.0 && tau < 1.0))
      throw std::invalid_argument("inefficiency_curves: tau grid must lie in (0,1)");
  if (!(a_min > 0.0) || !(a_max >= a_min) || a_points < 1)
    throw std::invalid_argument("inefficiency_curves: invalid A range");

  InefficiencyCurves out;
  out.curves.reserve(a_list.size() * tau_grid.size());
  for (double a : a_list)
    for (double tau : tau_grid) out.curves.push_back({a, tau, inefficiency(tau, a)});

  out.tau_star.reserve(static_cast<std::size_t>(a_points));
  for (int i = 0; i < a_points; ++i) {
    const double a = a_points == 1
                         ? a_min
                         : a_min + (a_max - a_min) * static_cast<double>(i) /
                               static_cast<double>(a_points - 1);
    out.tau_star.emplace_back(a, optimal_tau_closed_form(a));
  }
  return out;
}

double inefficiency_argmin(double a) {
  // Golden-section search on (0, 1); the objective is strictly convex.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 1e-9, hi = 1.0 - 1e-9;
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = inefficiency(x1, a);
  double f2 = inefficiency(x2, a);
  while (hi - lo > 1e-11) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = inefficiency(x1, a);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = inefficiency(x2, a);
    }
  }
  return 0.5 * (lo + hi);
}

DiffusionPath simulate_diffusion(const DiffusionSpec& spec, double horizon, double dt,
                                 RngStream& rng, bool exact_ou) {
  if (!(dt > 0.0) || !(horizon >= dt))
    throw std::invalid_argument("simulate_diffusion: need dt > 0 and horizon >= dt");
  if (dt * spec.theta1 > 0.5)
    throw std::invalid_argument("simulate_diffusion: dt too large for stability");

  const auto steps = static_cast<Eigen::Index>(std::floor(horizon / dt));
  DiffusionPath path;
  path.t.resize(steps + 1);
  path.z1.resize(steps + 1);
  path.z2.resize(steps + 1);

  // Stationary starts: Z1(0) ~ N(0,1), Z2(0) ~ f.
  path.z1[0] = rng.normal();
  path.z2[0] = sample_f(spec.density, rng);
  path.t[0] = 0.0;

  // Exact OU conditional: mean decay e^{-theta dt}, matched variance.
  const double decay = std::exp(-spec.theta1 * dt);
  const double ou_sd = std::sqrt(1.0 - decay * decay);
  const double em_sd1 = std::sqrt(2.0 * spec.theta1 * dt);
  const double em_sd2 = std::sqrt(spec.speed2 * dt);
  const double half_speed2 = 0.5 * spec.speed2;

  for (Eigen::Index i = 1; i <= steps; ++i) {
    path.t[i] = static_cast<double>(i) * dt;
    const double z1 = path.z1[i - 1];
    if (exact_ou) {
      path.z1[i] = z1 * decay + ou_sd * rng.normal();
    } else {
      path.z1[i] = z1 - spec.theta1 * z1 * dt + em_sd1 * rng.normal();
    }
    const double z2 = path.z2[i - 1];
    path.z2[i] = z2 + half_speed2 * d_log_f(spec.density, z2) * dt + em_sd2 * rng.normal();
  }
  return path;
}

Z1MarginalReport limit_check_z1_marginal(const TargetSpec& target, const MoveConfig& cfg,
                                         std::int64_t samples, RngStream& rng,
                                         bool exact_sampling) {
  if (samples < 10) throw std::invalid_argument("limit_check_z1_marginal: too few samples");
  const int n = target.prior.n();
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double shift = target.prior.center();

  std::vector<double> z;
  z.reserve(static_cast<std::size_t>(samples));
  if (exact_sampling) {
    for (std::int64_t i = 0; i < samples; ++i) {
      const int k = target.prior.sample_k(rng);
      z.push_back((static_cast<double>(k) - shift) / sqrt_n);
    }
  } else {
    // One draw every n iterations, matching the diffusion time scale.
    const std::int64_t thin = n;
    const std::int64_t iterations = samples * thin;
    RunOptions opts;
    opts.record_series = true;
    const ChainTrace trace =
        run_chain(target, cfg, std::nullopt, iterations, 0, rng, opts);
    for (std::int64_t i = thin - 1; i < trace.recorded(); i += thin)
      z.push_back((static_cast<double>(trace.k[static_cast<std::size_t>(i)]) - shift) /
                  sqrt_n);
  }

  Z1MarginalReport report;
  report.n = n;
  report.draws = static_cast<std::int64_t>(z.size());
  report.exact_sampling = exact_sampling;
  report.lattice_too_coarse = target.prior.kmax() < 16;
  report.ks_raw = ks_distance_normal(z);

  std::vector<double> jittered(z.size());
  const double width = 1.0 / sqrt_n;
  for (std::size_t i = 0; i < z.size(); ++i)
    jittered[i] = z[i] + (rng.uniform() - 0.5) * width;
  report.ks_jittered = ks_distance_normal(jittered);
  return report;
}

BirthRateReport limit_check_birth_rate(const TargetSpec& target, const MoveConfig& cfg,
                                       std::int64_t iterations, RngStream& rng) {
  if (iterations < 1000)
    throw std::invalid_argument("limit_check_birth_rate: too few iterations");

  RunOptions opts;
  opts.record_series = false;
  opts.record_birth_probs = true;
  const ChainTrace trace = run_chain(target, cfg, std::nullopt, iterations, 0, rng, opts);

  BirthRateReport report;
  report.limit = 1.0 / cfg.a;
  report.proposals = static_cast<std::int64_t>(trace.birth_accept_probs.size());
  if (report.proposals == 0)
    throw std::invalid_argument("limit_check_birth_rate: no birth proposals recorded");
  report.estimate = sample_mean(trace.birth_accept_probs);

  // Batch-means standard error; honest under the K-path autocorrelation.
  const std::size_t batches = 50;
  const std::size_t per_batch = trace.birth_accept_probs.size() / batches;
  if (per_batch >= 2) {
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
      const auto begin = trace.birth_accept_probs.begin() +
                         static_cast<std::ptrdiff_t>(b * per_batch);
      means[b] = sample_mean(std::span<const double>(&*begin, per_batch));
    }
    report.standard_error = sample_sd(means) / std::sqrt(static_cast<double>(batches));
  } else {
    report.standard_error = sample_sd(trace.birth_accept_probs) /
                            std::sqrt(static_cast<double>(report.proposals));
  }

  // Finite-n exact value under q = f: the per-state acceptance probability
  // is p(k+1)/(A p(k)), so the stationary mean telescopes to (1 - p_n(1))/A.
  report.analytic_finite_n = (1.0 - std::exp(target.prior.log_pn(1))) / cfg.a;
  return report;
}

}  // namespace rjtune
