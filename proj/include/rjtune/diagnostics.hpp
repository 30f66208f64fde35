#ifndef RJTUNE_DIAGNOSTICS_HPP
#define RJTUNE_DIAGNOSTICS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rjtune/kernel.hpp"
#include "rjtune/target.hpp"

namespace rjtune {

/// Raised by cost guards before expensive sweeps. Maps to CLI exit code 3.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunSummary {
  int k_mode_hat = 0;     // most frequent k; ties resolve to the smallest
  double mu_hat = 0.0;    // sample mean of the x1 series
  double sigma_hat = 0.0; // sample sd (N-1 denominator)
  double update_accept_rate = 0.0;
  double birth_accept_rate = 0.0;
  double death_accept_rate = 0.0;
  double ess_x1 = 0.0;  // recorded length / IAT; NaN for short traces
  std::int64_t sample_size = 0;
};

RunSummary summarize(const ChainTrace& trace, const ModelPrior& prior);

/// Autocorrelation function with the biased (1/N) normalization, divided by
/// the lag-0 autocovariance. Throws on constant series.
Eigen::VectorXd empirical_acf(Eigen::Ref<const Eigen::VectorXd> series, int max_lag);

/// 1 + 2 sum rho(s) with Geyer initial-positive-sequence truncation.
/// `max_window` caps the examined lags.
double integrated_autocorrelation_time(Eigen::Ref<const Eigen::VectorXd> series,
                                       int max_window = 16384);

struct MadMetrics {
  double mad_k = 0.0;
  double mad_mu = 0.0;
  double mad_sigma = 0.0;
};

/// Mean absolute deviations over replicate estimates. The K distance is to
/// the nearest prior mode (relevant only for bimodal, even-kmax priors).
MadMetrics mad_metrics(std::span<const int> k_hats, std::span<const double> mu_hats,
                       std::span<const double> sigma_hats, const ModelPrior& prior,
                       double mu_true, double sigma_true);

struct GlobalMeasure {
  double value = 0.0;
  /// Set when a block has zero L2 deviation and contributes 0 by convention.
  bool k_degenerate = false;
  bool mu_degenerate = false;
  bool sigma_degenerate = false;
};

/// L1/L2 deviation ratio of the K block plus half the mu and sigma block
/// ratios; L1 uses 1/N, L2 uses 1/(N-1), exactly as defined.
GlobalMeasure global_measure(std::span<const int> k_hats, std::span<const double> mu_hats,
                             std::span<const double> sigma_hats, const ModelPrior& prior,
                             double mu_true, double sigma_true);

struct ExperimentConfig {
  int n = 20;
  double mu = 0.0;
  double sigma = 1.0;
  std::vector<double> a_list = {2.0};
  std::vector<double> tau_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int replicates = 100;
  std::int64_t iterations = 20000;
  std::int64_t burn_in = 0;
  std::uint64_t master_seed = 1;
  int workers = 0;  // 0 = hardware concurrency
  /// Refuse configurations whose estimated cost exceeds this without the
  /// override; <= 0 disables the guard.
  double budget_seconds = 600.0;
  bool override_budget = false;
};

struct ExperimentCell {
  double a = 0.0;
  double tau = 0.0;
  std::vector<int> k_hats;
  std::vector<double> mu_hats;
  std::vector<double> sigma_hats;
  MadMetrics mads;
  GlobalMeasure measure;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ExperimentCell> cells;  // row-major over (a_list, tau_grid)
};

/// MAD sweep over the (A, tau) grid: N independent chains per cell with
/// ell = 2.38 sigma and q = f, summarized into the MADs and the global
/// measure. Bitwise deterministic for a fixed (master seed, config),
/// independent of the worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace rjtune

#endif  // RJTUNE_DIAGNOSTICS_HPP
