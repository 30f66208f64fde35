#include "rjtune/kernel.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace rjtune {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

inline double clamped_accept_prob(double log_ratio) {
  if (!(log_ratio > -kInf)) return 0.0;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}
}  // namespace

ChainState ChainState::from_target(const TargetSpec& target, RngStream& rng) {
  ChainState s;
  s.k = target.prior.sample_k(rng);
  const Eigen::Index m = target.prior.n() + s.k;
  s.x.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) s.x[i] = sample_f(target.density, rng);
  s.log_f_sum = log_density_sum(target.density, s.x);
  return s;
}

ChainState ChainState::cold(const TargetSpec& target) {
  ChainState s;
  s.k = target.prior.modes().front();
  const double loc = target.density.family == DensitySpec::Family::Normal
                         ? target.density.mu
                         : 0.0;
  s.x = Eigen::VectorXd::Constant(target.prior.n() + s.k, loc);
  s.log_f_sum = log_density_sum(target.density, s.x);
  return s;
}

void ChainState::validate(const TargetSpec& target) const {
  if (!target.prior.in_support(k))
    throw std::invalid_argument("ChainState: k outside support");
  if (x.size() != target.prior.n() + k)
    throw std::invalid_argument("ChainState: x has " + std::to_string(x.size()) +
                                " coordinates, expected n+k = " +
                                std::to_string(target.prior.n() + k));
  if (!x.allFinite()) throw std::invalid_argument("ChainState: non-finite coordinate");
}

double ChainState::refresh_log_f_sum(const TargetSpec& target) {
  const double recomputed = log_density_sum(target.density, x);
  const double drift = std::abs(recomputed - log_f_sum);
  log_f_sum = recomputed;
  return drift;
}

double ChainTrace::acceptance_rate(MoveKind kind) const {
  const auto i = static_cast<std::size_t>(kind);
  if (proposed_count[i] == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(accepted_count[i]) / static_cast<double>(proposed_count[i]);
}

double ChainTrace::mean_accept_prob(MoveKind kind) const {
  const auto i = static_cast<std::size_t>(kind);
  if (proposed_count[i] == 0) return std::numeric_limits<double>::quiet_NaN();
  return accept_prob_sum[i] / static_cast<double>(proposed_count[i]);
}

double ChainTrace::switch_accept_rate() const {
  const std::int64_t total = recorded();
  if (total == 0) return std::numeric_limits<double>::quiet_NaN();
  const std::int64_t moves = accepted_count[static_cast<std::size_t>(MoveKind::Birth)] +
                             accepted_count[static_cast<std::size_t>(MoveKind::Death)];
  return static_cast<double>(moves) / static_cast<double>(total);
}

double update_log_ratio(const TargetSpec& target, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& y) {
  return log_density_sum(target.density, y) - log_density_sum(target.density, x);
}

double birth_log_ratio(const TargetSpec& target, const MoveConfig& cfg, int k, double u) {
  const double prior_part = target.prior.log_ratio(k, k + 1);
  if (!(prior_part > -kInf)) return -kInf;
  return log_f(target.density, u) - log_q(target, u) - std::log(cfg.a) + prior_part;
}

double death_log_ratio(const TargetSpec& target, const MoveConfig& cfg, int k,
                       double x_last) {
  const double prior_part = target.prior.log_ratio(k, k - 1);
  if (!(prior_part > -kInf)) return -kInf;
  return log_q(target, x_last) - log_f(target.density, x_last) + std::log(cfg.a) +
         prior_part;
}

StepOutcome update_move(const TargetSpec& target, const MoveConfig& cfg,
                        ChainState& state, RngStream& rng) {
  const Eigen::Index m = state.x.size();
  const double scale = cfg.ell / std::sqrt(static_cast<double>(m));
  Eigen::VectorXd y(m);
  rng.fill_normal(y);
  y = state.x + scale * y;
  const double y_sum = log_density_sum(target.density, y);
  const double log_ratio = y_sum - state.log_f_sum;
  const double ua = rng.uniform();
  const bool acc = mh_accept(log_ratio, ua);
  if (acc) {
    state.x.swap(y);
    state.log_f_sum = y_sum;
  }
  return {MoveKind::Update, true, acc, log_ratio};
}

StepOutcome birth_move(const TargetSpec& target, const MoveConfig& cfg,
                       ChainState& state, RngStream& rng) {
  const double u = sample_q(target, rng);
  const double log_ratio = birth_log_ratio(target, cfg, state.k, u);
  const double ua = rng.uniform();
  const bool acc = mh_accept(log_ratio, ua);
  if (acc) {
    const Eigen::Index m = state.x.size();
    state.x.conservativeResize(m + 1);
    state.x[m] = u;
    state.log_f_sum += log_f(target.density, u);
    state.k += 1;
  }
  return {MoveKind::Birth, true, acc, log_ratio};
}

StepOutcome death_move(const TargetSpec& target, const MoveConfig& cfg,
                       ChainState& state, RngStream& rng) {
  const double x_last = state.x[state.x.size() - 1];
  const double log_ratio = death_log_ratio(target, cfg, state.k, x_last);
  const double ua = rng.uniform();  // drawn even at k=1, for stream stability
  const bool acc = mh_accept(log_ratio, ua);
  // With q = f and A >= 2 a death at k > 1 has acceptance probability 1.
  if (!acc && state.k > 1 && target.proposal.mode == ProposalSpec::Mode::SameAsF)
    throw NumericalGuardError("death_move: rejected a death that must be auto-accepted");
  if (acc) {
    state.log_f_sum -= log_f(target.density, x_last);
    state.x.conservativeResize(state.x.size() - 1);
    state.k -= 1;
  }
  return {MoveKind::Death, true, acc, log_ratio};
}

StepOutcome step(const TargetSpec& target, const MoveConfig& cfg, ChainState& state,
                 RngStream& rng) {
  const double u = rng.uniform();
  if (u <= cfg.g1()) return update_move(target, cfg, state, rng);
  if (u <= cfg.g1() + cfg.g2()) return birth_move(target, cfg, state, rng);
  return death_move(target, cfg, state, rng);
}

ChainTrace run_chain(const TargetSpec& target, const MoveConfig& cfg,
                     std::optional<ChainState> init, std::int64_t iterations,
                     std::int64_t burn_in, RngStream& rng, const RunOptions& options) {
  if (burn_in < 0 || iterations < burn_in)
    throw std::invalid_argument("run_chain: need iterations >= burn_in >= 0");

  ChainState state = init ? std::move(*init) : ChainState::from_target(target, rng);
  state.validate(target);

  ChainTrace trace;
  trace.iterations = iterations;
  trace.burn_in = burn_in;
  const std::int64_t recorded = iterations - burn_in;
  if (options.record_series) {
    trace.k.reserve(recorded);
    trace.x1.reserve(recorded);
    trace.move_kind.reserve(recorded);
    trace.accepted.reserve(recorded);
  }

  for (std::int64_t m = 0; m < iterations; ++m) {
    const StepOutcome out = step(target, cfg, state, rng);

    if (m >= burn_in) {
      const auto kind_idx = static_cast<std::size_t>(out.kind);
      trace.proposed_count[kind_idx] += 1;
      if (out.accepted) trace.accepted_count[kind_idx] += 1;
      const double prob = clamped_accept_prob(out.log_accept_ratio);
      trace.accept_prob_sum[kind_idx] += prob;
      if (options.record_birth_probs && out.kind == MoveKind::Birth)
        trace.birth_accept_probs.push_back(prob);
      if (options.record_series) {
        trace.k.push_back(state.k);
        trace.x1.push_back(state.x[0]);
        trace.move_kind.push_back(static_cast<std::uint8_t>(out.kind));
        trace.accepted.push_back(out.accepted ? 1 : 0);
      }
      if (options.snapshot_every > 0 && (m - burn_in) % options.snapshot_every == 0)
        trace.snapshots.emplace_back(m, state.x);
    }

    if (options.refresh_every > 0 && (m + 1) % options.refresh_every == 0) {
      const double drift = state.refresh_log_f_sum(target);
      if (!(drift <= options.drift_tolerance))
        throw NumericalGuardError("run_chain: cached log-density drift " +
                                  std::to_string(drift) + " exceeds tolerance");
    }
  }
  return trace;
}

double reversibility_identity_check(const TargetSpec& target, const MoveConfig& cfg,
                                    int k, const Eigen::VectorXd& x, double u) {
  if (!target.prior.in_support(k) || !target.prior.in_support(k + 1))
    throw std::invalid_argument("reversibility_identity_check: k, k+1 must be in support");
  Eigen::VectorXd x_up(x.size() + 1);
  x_up << x, u;

  const double log_alpha_birth = std::min(0.0, birth_log_ratio(target, cfg, k, u));
  const double log_alpha_death = std::min(0.0, death_log_ratio(target, cfg, k + 1, u));

  const double lhs = log_joint(target, k, x) + std::log(cfg.g2()) + log_q(target, u) +
                     log_alpha_birth;
  const double rhs = log_joint(target, k + 1, x_up) + std::log(cfg.g3()) +
                     log_alpha_death;
  return std::abs(lhs - rhs);
}

}  // namespace rjtune
