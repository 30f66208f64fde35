#ifndef RJTUNE_KERNEL_HPP
#define RJTUNE_KERNEL_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rjtune/rng.hpp"
#include "rjtune/target.hpp"

namespace rjtune {

/// Raised when a runtime numerical guard trips (cached-sum drift,
/// non-finite state). Maps to CLI exit code 4.
struct NumericalGuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MoveKind : std::uint8_t { Update = 0, Birth = 1, Death = 2 };

/// Move-choice distribution g and the random-walk scale.
/// g(1) = tau, g(2) = (1-tau) A/(A+1), g(3) = (1-tau)/(A+1); g3 is stored
/// as the complement so the three sum to 1 exactly.
struct MoveConfig {
  double tau;
  double a;
  double ell;

  MoveConfig(double tau_in, double a_in, double ell_in)
      : tau(tau_in), a(a_in), ell(ell_in) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("MoveConfig: tau must be in (0,1)");
    if (!(a >= 2.0)) throw std::invalid_argument("MoveConfig: A must be >= 2");
    if (!(ell > 0.0)) throw std::invalid_argument("MoveConfig: ell must be > 0");
  }

  double g1() const { return tau; }
  double g2() const { return (1.0 - tau) * a / (a + 1.0); }
  double g3() const { return 1.0 - g1() - g2(); }
};

/// Current chain position (K, X^K) with the cached sum of log f over the
/// coordinates. The cache is adjusted incrementally on birth/death and
/// refreshed in full periodically by run_chain.
struct ChainState {
  int k = 1;
  Eigen::VectorXd x;
  double log_f_sum = 0.0;

  static ChainState from_target(const TargetSpec& target, RngStream& rng);
  /// Deterministic start at the (smallest) prior mode with all
  /// coordinates at the density's location.
  static ChainState cold(const TargetSpec& target);

  void validate(const TargetSpec& target) const;
  /// Recomputes the cached sum; returns the absolute drift.
  double refresh_log_f_sum(const TargetSpec& target);
};

struct StepOutcome {
  MoveKind kind;
  bool proposed;  // death at k=1 still counts as proposed
  bool accepted;
  double log_accept_ratio;  // unclamped; acceptance uses min(0, .)
};

/// Per-iteration history with move-type bookkeeping.
struct ChainTrace {
  std::vector<std::int32_t> k;
  std::vector<double> x1;
  std::vector<std::uint8_t> move_kind;
  std::vector<std::uint8_t> accepted;

  std::array<std::int64_t, 3> proposed_count{};
  std::array<std::int64_t, 3> accepted_count{};
  std::array<double, 3> accept_prob_sum{};  // sum of exp(min(0, log ratio))

  std::vector<double> birth_accept_probs;  // filled when requested
  std::vector<std::pair<std::int64_t, Eigen::VectorXd>> snapshots;

  std::int64_t iterations = 0;
  std::int64_t burn_in = 0;

  std::int64_t recorded() const { return static_cast<std::int64_t>(k.size()); }
  double acceptance_rate(MoveKind kind) const;
  double mean_accept_prob(MoveKind kind) const;
  /// Accepted K-moves (either direction) per recorded iteration.
  double switch_accept_rate() const;
};

struct RunOptions {
  bool record_series = true;        // k, x1, move_kind, accepted
  bool record_birth_probs = false;  // per-birth-proposal acceptance probabilities
  std::int64_t snapshot_every = 0;  // 0 = no full-state snapshots
  std::int64_t refresh_every = 10000;
  double drift_tolerance = 1e-8;
};

// Log acceptance ratios of the three moves (also the unit-test hooks).
double update_log_ratio(const TargetSpec& target, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& y);
double birth_log_ratio(const TargetSpec& target, const MoveConfig& cfg, int k, double u);
double death_log_ratio(const TargetSpec& target, const MoveConfig& cfg, int k, double x_last);

/// Metropolis test on the log scale; -inf (or NaN) always rejects.
inline bool mh_accept(double log_ratio, double u) {
  if (!(log_ratio > -std::numeric_limits<double>::infinity())) return false;
  if (log_ratio >= 0.0) return true;
  return std::log(u) <= log_ratio;
}

// Individual moves; each mutates the state on acceptance and consumes a
// fixed number of draws from the stream regardless of the outcome.
StepOutcome update_move(const TargetSpec& target, const MoveConfig& cfg,
                        ChainState& state, RngStream& rng);
StepOutcome birth_move(const TargetSpec& target, const MoveConfig& cfg,
                       ChainState& state, RngStream& rng);
StepOutcome death_move(const TargetSpec& target, const MoveConfig& cfg,
                       ChainState& state, RngStream& rng);

/// One full kernel iteration: draws the move kind from g, then applies it.
StepOutcome step(const TargetSpec& target, const MoveConfig& cfg, ChainState& state,
                 RngStream& rng);

/// Runs the chain for `iterations` steps and records everything past
/// `burn_in`. When `init` is empty the chain starts from an exact draw of
/// the target (K ~ p_n, X ~ f i.i.d.).
ChainTrace run_chain(const TargetSpec& target, const MoveConfig& cfg,
                     std::optional<ChainState> init, std::int64_t iterations,
                     std::int64_t burn_in, RngStream& rng, const RunOptions& options = {});

/// Detailed-balance residual of the birth/death pair at (k, x) <-> (k+1, (x,u)):
/// |log[pi(k,x) g2 q(u) a_birth] - log[pi(k+1,(x,u)) g3 a_death]|.
double reversibility_identity_check(const TargetSpec& target, const MoveConfig& cfg,
                                    int k, const Eigen::VectorXd& x, double u);

}  // namespace rjtune

#endif  // RJTUNE_KERNEL_HPP
