#include "rjtune/diagnostics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rjtune/parallel.hpp"
#include "rjtune/stats.hpp"
#include "rjtune/tuning.hpp"

namespace rjtune {

RunSummary summarize(const ChainTrace& trace, const ModelPrior& prior) {
  if (trace.recorded() == 0) throw std::invalid_argument("summarize: empty trace");

  std::vector<std::int64_t> counts(static_cast<std::size_t>(prior.kmax()), 0);
  for (std::int32_t k : trace.k) {
    if (k < 1 || k > prior.kmax())
      throw std::invalid_argument("summarize: trace k outside the prior support");
    counts[static_cast<std::size_t>(k - 1)] += 1;
  }
  // Most frequent k; strict > keeps the smallest k on ties.
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i)
    if (counts[i] > counts[best]) best = i;

  RunSummary s;
  s.k_mode_hat = static_cast<int>(best) + 1;
  s.mu_hat = sample_mean(trace.x1);
  s.sigma_hat = sample_sd(trace.x1);
  s.update_accept_rate = trace.acceptance_rate(MoveKind::Update);
  s.birth_accept_rate = trace.acceptance_rate(MoveKind::Birth);
  s.death_accept_rate = trace.acceptance_rate(MoveKind::Death);
  s.sample_size = trace.recorded();
  if (trace.recorded() >= 1000) {
    const Eigen::Map<const Eigen::VectorXd> x1(trace.x1.data(),
                                               static_cast<Eigen::Index>(trace.x1.size()));
    s.ess_x1 = static_cast<double>(trace.recorded()) / integrated_autocorrelation_time(x1);
  } else {
    s.ess_x1 = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

namespace {

// Autocovariance at one lag, biased 1/N normalization, mean pre-subtracted.
double autocovariance(const Eigen::VectorXd& centered, int lag) {
  const Eigen::Index n = centered.size();
  return centered.head(n - lag).dot(centered.tail(n - lag)) / static_cast<double>(n);
}

}  // namespace

Eigen::VectorXd empirical_acf(Eigen::Ref<const Eigen::VectorXd> series, int max_lag) {
  const Eigen::Index n = series.size();
  if (max_lag < 1 || n <= max_lag)
    throw std::invalid_argument("empirical_acf: need series length > max_lag >= 1");
  Eigen::VectorXd centered = series.array() - series.mean();
  const double gamma0 = autocovariance(centered, 0);
  if (!(gamma0 > 0.0))
    throw std::invalid_argument("empirical_acf: zero-variance series");
  Eigen::VectorXd acf(max_lag + 1);
  acf[0] = 1.0;
  for (int s = 1; s <= max_lag; ++s) acf[s] = autocovariance(centered, s) / gamma0;
  return acf;
}

double integrated_autocorrelation_time(Eigen::Ref<const Eigen::VectorXd> series,
                                       int max_window) {
  const Eigen::Index n = series.size();
  if (n < 1000)
    throw std::invalid_argument("integrated_autocorrelation_time: series too short");
  Eigen::VectorXd centered = series.array() - series.mean();
  const double gamma0 = autocovariance(centered, 0);
  if (!(gamma0 > 0.0))
    throw std::invalid_argument("integrated_autocorrelation_time: zero-variance series");

  const int cap = std::min<int>(max_window, static_cast<int>(n / 3));
  // Geyer initial positive sequence: accumulate pair sums while positive.
  double tau = 1.0;  // rho(0)
  for (int s = 1; s + 1 <= cap; s += 2) {
    const double pair = autocovariance(centered, s) / gamma0 +
                        autocovariance(centered, s + 1) / gamma0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return std::max(tau, 1.0);
}

namespace {

double nearest_mode_distance(int k_hat, const ModelPrior& prior) {
  double d = std::numeric_limits<double>::infinity();
  for (int m : prior.modes())
    d = std::min(d, std::abs(static_cast<double>(k_hat - m)));
  return d;
}

struct BlockRatio {
  double ratio = 0.0;
  bool degenerate = false;
};

BlockRatio l1_over_l2(std::span<const double> deviations) {
  const auto n = static_cast<double>(deviations.size());
  double l1 = 0.0, ss = 0.0;
  for (double d : deviations) {
    l1 += std::abs(d);
    ss += d * d;
  }
  l1 /= n;
  const double l2 = std::sqrt(ss / (n - 1.0));
  if (!(l2 > 0.0)) return {0.0, true};
  return {l1 / l2, false};
}

}  // namespace

MadMetrics mad_metrics(std::span<const int> k_hats, std::span<const double> mu_hats,
                       std::span<const double> sigma_hats, const ModelPrior& prior,
                       double mu_true, double sigma_true) {
  const std::size_t n = k_hats.size();
  if (n < 2 || mu_hats.size() != n || sigma_hats.size() != n)
    throw std::invalid_argument("mad_metrics: need N >= 2 equally sized replicate arrays");
  MadMetrics m;
  for (std::size_t i = 0; i < n; ++i) {
    m.mad_k += nearest_mode_distance(k_hats[i], prior);
    m.mad_mu += std::abs(mu_hats[i] - mu_true);
    m.mad_sigma += std::abs(sigma_hats[i] - sigma_true);
  }
  const auto nd = static_cast<double>(n);
  m.mad_k /= nd;
  m.mad_mu /= nd;
  m.mad_sigma /= nd;
  return m;
}

GlobalMeasure global_measure(std::span<const int> k_hats, std::span<const double> mu_hats,
                             std::span<const double> sigma_hats, const ModelPrior& prior,
                             double mu_true, double sigma_true) {
  const std::size_t n = k_hats.size();
  if (n < 2 || mu_hats.size() != n || sigma_hats.size() != n)
    throw std::invalid_argument("global_measure: need N >= 2 equally sized replicate arrays");

  std::vector<double> dk(n), dmu(n), dsigma(n);
  for (std::size_t i = 0; i < n; ++i) {
    dk[i] = nearest_mode_distance(k_hats[i], prior);
    dmu[i] = mu_hats[i] - mu_true;
    dsigma[i] = sigma_hats[i] - sigma_true;
  }
  const BlockRatio bk = l1_over_l2(dk);
  const BlockRatio bmu = l1_over_l2(dmu);
  const BlockRatio bsigma = l1_over_l2(dsigma);

  GlobalMeasure g;
  g.value = bk.ratio + 0.5 * (bmu.ratio + bsigma.ratio);
  g.k_degenerate = bk.degenerate;
  g.mu_degenerate = bmu.degenerate;
  g.sigma_degenerate = bsigma.degenerate;
  return g;
}

namespace {

void enforce_budget(const ExperimentConfig& config) {
  if (config.budget_seconds <= 0.0 || config.override_budget) return;

  // Time a small pilot chain and extrapolate linearly in iterations.
  TargetSpec target(config.n, DensitySpec::normal(config.mu, config.sigma),
                    ProposalSpec::same_as_f(config.a_list.front() / 2.0));
  const MoveConfig cfg(0.5, config.a_list.front(), 2.38 * config.sigma);
  RngStream pilot_rng(config.master_seed, 0xbeef);
  const std::int64_t pilot_iters = 20000;
  const auto start = std::chrono::steady_clock::now();
  RunOptions opts;
  opts.record_series = false;
  run_chain(target, cfg, std::nullopt, pilot_iters, 0, pilot_rng, opts);
  const double pilot_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const double total_iters = static_cast<double>(config.a_list.size()) *
                             static_cast<double>(config.tau_grid.size()) *
                             static_cast<double>(config.replicates) *
                             static_cast<double>(config.iterations + config.burn_in);
  int workers = config.workers > 0 ? config.workers
                                   : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  const double estimated =
      pilot_seconds * total_iters / static_cast<double>(pilot_iters) / workers;
  if (estimated > config.budget_seconds)
    throw BudgetError("run_experiment: estimated " + std::to_string(estimated) +
                      "s exceeds budget " + std::to_string(config.budget_seconds) +
                      "s (pass the override to proceed)");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.a_list.empty() || config.tau_grid.empty())
    throw std::invalid_argument("run_experiment: empty grids");
  if (config.replicates < 2)
    throw std::invalid_argument("run_experiment: need at least 2 replicates");
  if (config.iterations < 1)
    throw std::invalid_argument("run_experiment: need at least 1 iteration");
  for (double a : config.a_list)
    if (!(a >= 2.0)) throw std::invalid_argument("run_experiment: A must be >= 2");
  for (double tau : config.tau_grid)
    if (!(tau > 0.0 && tau < 1.0))
      throw std::invalid_argument("run_experiment: tau grid must lie in (0,1)");

  enforce_budget(config);

  const DensitySpec density = DensitySpec::normal(config.mu, config.sigma);
  const double ell = 2.38 * config.sigma;  // optimal scale for q = f experiments
  const ModelPrior prior(config.n);

  ExperimentResult result;
  result.config = config;
  const std::size_t n_cells = config.a_list.size() * config.tau_grid.size();
  result.cells.resize(n_cells);

  struct Task {
    std::size_t cell;
    int replicate;
  };
  std::vector<Task> tasks;
  tasks.reserve(n_cells * static_cast<std::size_t>(config.replicates));
  for (std::size_t c = 0; c < n_cells; ++c) {
    result.cells[c].a = config.a_list[c / config.tau_grid.size()];
    result.cells[c].tau = config.tau_grid[c % config.tau_grid.size()];
    result.cells[c].k_hats.resize(static_cast<std::size_t>(config.replicates));
    result.cells[c].mu_hats.resize(static_cast<std::size_t>(config.replicates));
    result.cells[c].sigma_hats.resize(static_cast<std::size_t>(config.replicates));
    for (int r = 0; r < config.replicates; ++r) tasks.push_back({c, r});
  }

  parallel_for_indexed(tasks.size(), config.workers, [&](std::size_t t) {
    const Task task = tasks[t];
    ExperimentCell& cell = result.cells[task.cell];
    TargetSpec target(config.n, density, ProposalSpec::same_as_f(cell.a / 2.0));
    const MoveConfig cfg(cell.tau, cell.a, ell);
    // Stream id fixed by (cell, replicate); results do not depend on the
    // scheduling or the worker count.
    const std::uint64_t stream = static_cast<std::uint64_t>(task.cell) *
                                     static_cast<std::uint64_t>(config.replicates) +
                                 static_cast<std::uint64_t>(task.replicate) + 1;
    RngStream rng(config.master_seed, stream);
    const ChainTrace trace = run_chain(target, cfg, std::nullopt,
                                       config.iterations + config.burn_in,
                                       config.burn_in, rng);
    const RunSummary summary = summarize(trace, prior);
    cell.k_hats[static_cast<std::size_t>(task.replicate)] = summary.k_mode_hat;
    cell.mu_hats[static_cast<std::size_t>(task.replicate)] = summary.mu_hat;
    cell.sigma_hats[static_cast<std::size_t>(task.replicate)] = summary.sigma_hat;
  });

  // Sequential reduction in cell order.
  for (ExperimentCell& cell : result.cells) {
    cell.mads = mad_metrics(cell.k_hats, cell.mu_hats, cell.sigma_hats, prior, config.mu,
                            config.sigma);
    cell.measure = global_measure(cell.k_hats, cell.mu_hats, cell.sigma_hats, prior,
                                  config.mu, config.sigma);
  }
  return result;
}

}  // namespace rjtune
