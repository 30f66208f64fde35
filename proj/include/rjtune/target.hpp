#ifndef RJTUNE_TARGET_HPP
#define RJTUNE_TARGET_HPP

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rjtune/rng.hpp"

namespace rjtune {

/// One-dimensional parameter density f. All evaluation happens in log
/// space. For the Normal family the roughness E[((log f)')^2] is exactly
/// 1/sigma^2; custom densities must supply their roughness value.
struct DensitySpec {
  enum class Family { Normal, Custom };

  Family family = Family::Normal;
  double mu = 0.0;
  double sigma = 1.0;

  // Custom-family callables; unused for Normal.
  std::function<double(double)> custom_log_density;
  std::function<double(double)> custom_d_log_density;
  std::function<double(RngStream&)> custom_sampler;
  std::optional<double> custom_roughness;

  static DensitySpec normal(double mu, double sigma);
  static DensitySpec custom(std::function<double(double)> log_density,
                            std::function<double(double)> d_log_density,
                            std::function<double(RngStream&)> sampler,
                            std::optional<double> roughness);
};

double log_f(const DensitySpec& density, double x);
double d_log_f(const DensitySpec& density, double x);
double sample_f(const DensitySpec& density, RngStream& rng);

/// Roughness constant Upsilon = E[((log f(X))')^2].
double roughness(const DensitySpec& density);

struct RoughnessEstimate {
  double estimate;
  double standard_error;
};

/// Monte Carlo check of a supplied roughness value (guards custom densities
/// against transcription errors).
RoughnessEstimate estimate_roughness_mc(const DensitySpec& density,
                                        std::int64_t draws, RngStream& rng);

/// Sum of log f over all coordinates (vectorized for the Normal family).
double log_density_sum(const DensitySpec& density, const Eigen::VectorXd& x);

/// Jump proposal q used by the birth move, with the f/q quality bound A*.
/// In experiment mode q is f itself while A* (and hence A = 2 A*) is set
/// freely to emulate distance between f and q; the acceptance probabilities
/// then behave as they would for a genuinely distant q.
struct ProposalSpec {
  enum class Mode { SameAsF, Custom };

  Mode mode = Mode::SameAsF;
  /// f/q <= A*; empty means the bound is unknown and must be estimated
  /// from birth acceptance rates.
  std::optional<double> bound_astar = 1.0;

  std::function<double(double)> custom_log_density;
  std::function<double(RngStream&)> custom_sampler;

  static ProposalSpec same_as_f(std::optional<double> astar = 1.0);
  static ProposalSpec custom(std::function<double(double)> log_density,
                             std::function<double(RngStream&)> sampler,
                             double astar);

  /// A = 2 A* when the bound is known.
  std::optional<double> a() const {
    if (!bound_astar) return std::nullopt;
    return 2.0 * *bound_astar;
  }
};

/// Model-index prior p_n on {1, ..., kmax}, kmax = floor(sqrt(n) log n)
/// (natural log). Unimodal for odd kmax, bimodal with two equal modes for
/// even kmax; the probability ratio between neighbours is a_{k,n} =
/// 1 - b_{k,n}/sqrt(n) with b_{k,n} = |k - kmax/2|/sqrt(n). The log table
/// is built once, outward from the mode, and normalized.
class ModelPrior {
 public:
  explicit ModelPrior(int n);

  int n() const { return n_; }
  int kmax() const { return kmax_; }
  bool bimodal() const { return kmax_ % 2 == 0; }
  const std::vector<int>& modes() const { return modes_; }
  /// Center of symmetry kmax/2 on the k axis (half-integer for odd kmax).
  double center() const { return 0.5 * static_cast<double>(kmax_); }

  bool in_support(int k) const { return k >= 1 && k <= kmax_; }

  /// log p_n(k); -inf outside the support.
  double log_pn(int k) const;

  /// log of p_n(k_to)/p_n(k_from) for |k_to - k_from| = 1. Returns -inf
  /// when k_to falls outside the support, so boundary moves reject.
  double log_ratio(int k_from, int k_to) const;

  /// Normalized PMF over {1, ..., kmax}.
  std::vector<double> pn_table() const;

  /// Exact inverse-CDF draw of K ~ p_n.
  int sample_k(RngStream& rng) const;

 private:
  int n_;
  int kmax_;
  std::vector<int> modes_;
  std::vector<double> log_p_;  // normalized, index k-1
  std::vector<double> cdf_;
};

/// Full target pi_n(k, x) = p_n(k) * prod_i f(x_i). Immutable after
/// construction; safe to share across chain workers.
struct TargetSpec {
  ModelPrior prior;
  DensitySpec density;
  ProposalSpec proposal;

  TargetSpec(int n, DensitySpec density_in, ProposalSpec proposal_in)
      : prior(n), density(std::move(density_in)), proposal(std::move(proposal_in)) {}
};

double log_q(const TargetSpec& target, double x);
double sample_q(const TargetSpec& target, RngStream& rng);

/// log pi_n(k, x) up to the (constant) normalizer of p_n already folded in.
double log_joint(const TargetSpec& target, int k, const Eigen::VectorXd& x);

}  // namespace rjtune

#endif  // RJTUNE_TARGET_HPP
