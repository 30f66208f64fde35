#ifndef RJTUNE_STATS_HPP
#define RJTUNE_STATS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rjtune {

/// Standard normal CDF, accurate to ~1e-15 relative (erfc based).
double standard_normal_cdf(double x);

/// Regularized upper incomplete gamma Q(a, x), a > 0, x >= 0.
double regularized_gamma_q(double a, double x);

struct ChiSquareResult {
  double statistic;
  int degrees_of_freedom;
  double p_value;
};

/// Pearson chi-square goodness of fit of observed counts against expected
/// probabilities. Bins with zero expected probability must have zero counts.
ChiSquareResult chi_square_gof(std::span<const std::int64_t> counts,
                               std::span<const double> probs);

/// Two-sided Kolmogorov-Smirnov distance of a sample against the standard
/// normal CDF. The input is copied and sorted.
double ks_distance_normal(std::span<const double> sample);

/// Spearman rank correlation (average ranks on ties).
double spearman_rho(std::span<const double> x, std::span<const double> y);

double sample_mean(std::span<const double> x);
/// Sample standard deviation with N-1 denominator; 0 for N < 2.
double sample_sd(std::span<const double> x);

}  // namespace rjtune

#endif  // RJTUNE_STATS_HPP
