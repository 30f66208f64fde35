#include "rjtune/target.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rjtune {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
}  // namespace

DensitySpec DensitySpec::normal(double mu, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("DensitySpec: sigma must be > 0");
  if (!std::isfinite(mu) || !std::isfinite(sigma))
    throw std::invalid_argument("DensitySpec: non-finite parameter");
  DensitySpec d;
  d.family = Family::Normal;
  d.mu = mu;
  d.sigma = sigma;
  return d;
}

DensitySpec DensitySpec::custom(std::function<double(double)> log_density,
                                std::function<double(double)> d_log_density,
                                std::function<double(RngStream&)> sampler,
                                std::optional<double> roughness_value) {
  if (!log_density || !d_log_density || !sampler)
    throw std::invalid_argument("DensitySpec: custom density needs all three callables");
  if (roughness_value && !(*roughness_value > 0.0))
    throw std::invalid_argument("DensitySpec: roughness must be > 0");
  DensitySpec d;
  d.family = Family::Custom;
  d.custom_log_density = std::move(log_density);
  d.custom_d_log_density = std::move(d_log_density);
  d.custom_sampler = std::move(sampler);
  d.custom_roughness = roughness_value;
  return d;
}

double log_f(const DensitySpec& density, double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("log_f: non-finite input");
  if (density.family == DensitySpec::Family::Normal) {
    const double z = (x - density.mu) / density.sigma;
    return -0.5 * kLog2Pi - std::log(density.sigma) - 0.5 * z * z;
  }
  return density.custom_log_density(x);
}

double d_log_f(const DensitySpec& density, double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("d_log_f: non-finite input");
  if (density.family == DensitySpec::Family::Normal)
    return -(x - density.mu) / (density.sigma * density.sigma);
  return density.custom_d_log_density(x);
}

double sample_f(const DensitySpec& density, RngStream& rng) {
  if (density.family == DensitySpec::Family::Normal)
    return density.mu + density.sigma * rng.normal();
  return density.custom_sampler(rng);
}

double roughness(const DensitySpec& density) {
  if (density.family == DensitySpec::Family::Normal)
    return 1.0 / (density.sigma * density.sigma);
  if (!density.custom_roughness)
    throw std::invalid_argument("roughness: custom density without a supplied value");
  return *density.custom_roughness;
}

RoughnessEstimate estimate_roughness_mc(const DensitySpec& density,
                                        std::int64_t draws, RngStream& rng) {
  if (draws < 2) throw std::invalid_argument("estimate_roughness_mc: needs draws >= 2");
  double sum = 0.0, sum_sq = 0.0;
  for (std::int64_t i = 0; i < draws; ++i) {
    const double g = d_log_f(density, sample_f(density, rng));
    const double g2 = g * g;
    sum += g2;
    sum_sq += g2 * g2;
  }
  const double nd = static_cast<double>(draws);
  const double mean = sum / nd;
  const double var = std::max(0.0, sum_sq / nd - mean * mean);
  return {mean, std::sqrt(var / nd)};
}

double log_density_sum(const DensitySpec& density, const Eigen::VectorXd& x) {
  const double m = static_cast<double>(x.size());
  if (density.family == DensitySpec::Family::Normal) {
    const double inv_2s2 = 0.5 / (density.sigma * density.sigma);
    const double sq = (x.array() - density.mu).square().sum();
    return -m * (0.5 * kLog2Pi + std::log(density.sigma)) - sq * inv_2s2;
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) sum += density.custom_log_density(x[i]);
  return sum;
}

ProposalSpec ProposalSpec::same_as_f(std::optional<double> astar) {
  if (astar && !(*astar >= 1.0))
    throw std::invalid_argument("ProposalSpec: A* must be >= 1");
  ProposalSpec p;
  p.mode = Mode::SameAsF;
  p.bound_astar = astar;
  return p;
}

ProposalSpec ProposalSpec::custom(std::function<double(double)> log_density,
                                  std::function<double(RngStream&)> sampler,
                                  double astar) {
  if (!log_density || !sampler)
    throw std::invalid_argument("ProposalSpec: custom proposal needs both callables");
  if (!(astar >= 1.0)) throw std::invalid_argument("ProposalSpec: A* must be >= 1");
  ProposalSpec p;
  p.mode = Mode::Custom;
  p.bound_astar = astar;
  p.custom_log_density = std::move(log_density);
  p.custom_sampler = std::move(sampler);
  return p;
}

ModelPrior::ModelPrior(int n) : n_(n) {
  if (n < 7) throw std::invalid_argument("ModelPrior: n must be >= 7");
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  kmax_ = static_cast<int>(std::floor(sqrt_n * std::log(static_cast<double>(n))));

  const double c = center();
  // log a_{k,n}; a_{k,n} = 1 - b_{k,n}/sqrt(n), b_{k,n} = |k - kmax/2|/sqrt(n).
  const auto log_a = [&](int k) {
    const double b = std::abs(static_cast<double>(k) - c) / sqrt_n;
    return std::log1p(-b / sqrt_n);
  };

  log_p_.assign(static_cast<std::size_t>(kmax_), 0.0);
  int mode_lo, mode_hi;
  if (kmax_ % 2 == 1) {
    mode_lo = mode_hi = (kmax_ + 1) / 2;
    modes_ = {mode_lo};
  } else {
    mode_lo = kmax_ / 2;
    mode_hi = mode_lo + 1;
    modes_ = {mode_lo, mode_hi};
  }

  // Recursion outward from the mode: p(k+1) = a_{k,n} p(k) to the right,
  // p(k-1) = a_{k-1,n} p(k) to the left. Both modes start at log p = 0;
  // the mirrored b values make the table bitwise symmetric.
  log_p_[mode_lo - 1] = 0.0;
  log_p_[mode_hi - 1] = 0.0;
  for (int k = mode_hi; k <= kmax_ - 1; ++k)
    log_p_[k] = log_p_[k - 1] + log_a(k);
  for (int k = mode_lo; k >= 2; --k)
    log_p_[k - 2] = log_p_[k - 1] + log_a(k - 1);

  // Normalize via log-sum-exp (the maximum is 0 at the mode).
  double sum = 0.0;
  for (double lp : log_p_) sum += std::exp(lp);
  const double log_norm = std::log(sum);
  for (double& lp : log_p_) lp -= log_norm;

  cdf_.resize(log_p_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < log_p_.size(); ++i) {
    acc += std::exp(log_p_[i]);
    cdf_[i] = acc;
  }
  cdf_.back() = 1.0;
}

double ModelPrior::log_pn(int k) const {
  if (!in_support(k)) return -kInf;
  return log_p_[static_cast<std::size_t>(k - 1)];
}

double ModelPrior::log_ratio(int k_from, int k_to) const {
  if (!in_support(k_from))
    throw std::invalid_argument("ModelPrior::log_ratio: k_from outside support {1,...," +
                                std::to_string(kmax_) + "}");
  if (std::abs(k_to - k_from) != 1)
    throw std::invalid_argument("ModelPrior::log_ratio: |k_to - k_from| must be 1");
  if (!in_support(k_to)) return -kInf;
  return log_p_[static_cast<std::size_t>(k_to - 1)] -
         log_p_[static_cast<std::size_t>(k_from - 1)];
}

std::vector<double> ModelPrior::pn_table() const {
  std::vector<double> p(log_p_.size());
  for (std::size_t i = 0; i < log_p_.size(); ++i) p[i] = std::exp(log_p_[i]);
  return p;
}

int ModelPrior::sample_k(RngStream& rng) const {
  const double u = rng.uniform();
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<int>(it - cdf_.begin()) + 1;
}

double log_q(const TargetSpec& target, double x) {
  if (target.proposal.mode == ProposalSpec::Mode::SameAsF)
    return log_f(target.density, x);
  return target.proposal.custom_log_density(x);
}

double sample_q(const TargetSpec& target, RngStream& rng) {
  if (target.proposal.mode == ProposalSpec::Mode::SameAsF)
    return sample_f(target.density, rng);
  return target.proposal.custom_sampler(rng);
}

double log_joint(const TargetSpec& target, int k, const Eigen::VectorXd& x) {
  if (!target.prior.in_support(k))
    throw std::invalid_argument("log_joint: k outside support");
  const Eigen::Index expected = target.prior.n() + k;
  if (x.size() != expected)
    throw std::invalid_argument("log_joint: x has " + std::to_string(x.size()) +
                                " coordinates, expected n+k = " + std::to_string(expected));
  return target.prior.log_pn(k) + log_density_sum(target.density, x);
}

}  // namespace rjtune
