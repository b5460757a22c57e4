#include "robsens/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include "robsens/errors.hpp"
#include "robsens/logistic.hpp"

namespace robsens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void parallel_for(int tasks, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, tasks));
  if (threads == 1) {
    for (int i = 0; i < tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= tasks) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

void BootstrapConfig::validate() const {
  if (replicates < 1) throw ConfigError("bootstrap needs B >= 1");
  if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError("alpha must be in (0, 0.5)");
  if (!(zeta >= 0.0 && zeta < 0.5)) throw ConfigError("zeta must be in [0, 0.5)");
  if (!(alpha + zeta < 0.5)) throw ConfigError("alpha + zeta must be < 0.5");
  if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0))
    throw ConfigError("max_failure_fraction must be in [0,1]");
}

std::vector<int> draw_multinomial(int n, Rng& rng) {
  if (n < 1) throw ConfigError("draw_multinomial: n >= 1 required");
  std::vector<int> k(n, 0);
  for (int t = 0; t < n; ++t)
    ++k[static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)))];
  return k;
}

int binomial_quantile(int n, double p, double level) {
  if (n < 0) throw ConfigError("binomial_quantile: n >= 0 required");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("binomial_quantile: p in [0,1]");
  if (!(level > 0.0 && level <= 1.0))
    throw ConfigError("binomial_quantile: level in (0,1]");
  if (p <= 0.0 || n == 0) return 0;
  if (p >= 1.0) return n;
  if (level >= 1.0) return n;

  const double log_level = std::log(level);
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  double log_pmf = n * log_q;
  double log_cdf = -kInf;
  for (int m = 0; m < n; ++m) {
    log_cdf = log_add_exp(log_cdf, log_pmf);
    if (log_cdf >= log_level - 1e-10) return m;
    log_pmf += std::log(static_cast<double>(n - m) / (m + 1)) + log_p - log_q;
  }
  return n;
}

SensitivityParams inflate_delta(const SensitivityParams& params, int n1,
                                int n0, double zeta) {
  params.validate();
  const double level = std::sqrt(1.0 - zeta);
  SensitivityParams out = params;
  out.delta1 = static_cast<double>(binomial_quantile(n1, params.delta1, level)) / n1;
  out.delta0 = static_cast<double>(binomial_quantile(n0, params.delta0, level)) / n0;
  return out;
}

WholeParams inflate_delta(const WholeParams& params, int n, double zeta) {
  params.validate();
  WholeParams out = params;
  out.delta = static_cast<double>(binomial_quantile(n, params.delta, 1.0 - zeta)) / n;
  return out;
}

double empirical_quantile(const std::vector<double>& draws, double level) {
  if (draws.empty()) throw ConfigError("empirical_quantile: no draws");
  const int b = static_cast<int>(draws.size());
  int rank = static_cast<int>(std::ceil(level * b - 1e-9));
  rank = std::clamp(rank, 1, b);
  std::vector<double> sorted = draws;
  std::nth_element(sorted.begin(), sorted.begin() + (rank - 1), sorted.end());
  return sorted[rank - 1];
}

CiResult run_ci(const Dataset& dataset, const SensitivityParams& params,
                const BootstrapConfig& config) {
  config.validate();
  params.validate();
  const int n = dataset.n(), n1 = dataset.n1(), n0 = dataset.n0();
  const PropensityFit fit0 = fit_mle(dataset);

  CiResult out;
  out.point_bounds = solve_bounds(
      make_bounds_problem(dataset, fit0.fitted, params), config.relaxation);

  const double level = std::sqrt(1.0 - config.zeta);
  const int m1 = binomial_quantile(n1, params.delta1, level);
  const int m0 = binomial_quantile(n0, params.delta0, level);
  out.delta_inflated_1 = static_cast<double>(m1) / n1;
  out.delta_inflated_0 = static_cast<double>(m0) / n0;

  SensitivityParams rep = params;
  rep.lambda1 = params.lambda1 * std::exp(params.lambda_gap);
  rep.lambda0 = params.lambda0 * std::exp(params.lambda_gap);

  const int B = config.replicates;
  out.draws_min.assign(B, 0.0);
  out.draws_max.assign(B, 0.0);
  std::vector<char> failed(B, 0);

  parallel_for(B, config.threads, [&](int b) {
    Rng rng = Rng::for_replicate(config.seed, static_cast<std::uint64_t>(b));
    const std::vector<int> k = draw_multinomial(n, rng);
    try {
      const PropensityFit fit_b = fit_mle(dataset, k, fit0.beta);
      BoundsProblem problem = make_bounds_problem(dataset, fit_b.fitted, rep, k);
      problem.budget1 = n1 - m1;
      problem.budget0 = n0 - m0;
      const BoundsResult r = solve_bounds(problem, config.relaxation);
      if (r.status == BoundsStatus::Infeasible)
        throw Error("replicate infeasible");
      out.draws_min[b] = r.tau_min;
      out.draws_max[b] = r.tau_max;
    } catch (const Error&) {
      failed[b] = 1;
      out.draws_min[b] = -kInf;
      out.draws_max[b] = kInf;
    }
  });

  for (char f : failed) out.infeasible_count += f;
  if (out.infeasible_count > config.max_failure_fraction * B)
    throw BootstrapFailureError(
        std::to_string(out.infeasible_count) + " of " + std::to_string(B) +
        " bootstrap replicates failed");

  out.l_alpha = empirical_quantile(out.draws_min, config.alpha);
  out.u_alpha = empirical_quantile(out.draws_max, 1.0 - config.alpha);
  return out;
}

CiResult run_ci(const Dataset& dataset, const WholeParams& params,
                const BootstrapConfig& config) {
  config.validate();
  params.validate();
  const int n = dataset.n(), n1 = dataset.n1(), n0 = dataset.n0();
  const PropensityFit fit0 = fit_mle(dataset);

  CiResult out;
  out.point_bounds =
      solve_whole_bounds(dataset, fit0.fitted, params, {}, config.relaxation);

  const int m = binomial_quantile(n, params.delta, 1.0 - config.zeta);
  out.delta_inflated = static_cast<double>(m) / n;
  const AllocationGrid grid = make_allocation_grid(n1, n0, n - m);
  const int n_cells = static_cast<int>(grid.cells.size());

  SensitivityParams rep;
  rep.lambda1 = rep.lambda0 = params.lambda * std::exp(params.lambda_gap);
  rep.delta1 = rep.delta0 = 0.0;  // budgets come from the grid cells

  const int B = config.replicates;
  out.draws_min.assign(B, 0.0);
  out.draws_max.assign(B, 0.0);
  std::vector<char> failed(B, 0);
  std::vector<std::vector<double>> cell_min(n_cells, std::vector<double>(B)),
      cell_max(n_cells, std::vector<double>(B));
  std::vector<int> bad_cells(B, 0);

  parallel_for(B, config.threads, [&](int b) {
    Rng rng = Rng::for_replicate(config.seed, static_cast<std::uint64_t>(b));
    const std::vector<int> k = draw_multinomial(n, rng);
    try {
      const PropensityFit fit_b = fit_mle(dataset, k, fit0.beta);
      BoundsProblem base = make_bounds_problem(dataset, fit_b.fitted, rep, k);
      const WholeCellResults cells =
          solve_whole_cells(base, grid, config.relaxation);
      bad_cells[b] = cells.infeasible_cells;
      for (int c = 0; c < n_cells; ++c) {
        if (cells.cells[c].status == BoundsStatus::Infeasible) {
          // empty feasible set: sup is -inf, inf is +inf
          cell_min[c][b] = kInf;
          cell_max[c][b] = -kInf;
        } else {
          cell_min[c][b] = cells.cells[c].tau_min;
          cell_max[c][b] = cells.cells[c].tau_max;
        }
      }
      if (cells.envelope.status == BoundsStatus::Infeasible)
        throw Error("all cells infeasible");
      out.draws_min[b] = cells.envelope.tau_min;
      out.draws_max[b] = cells.envelope.tau_max;
    } catch (const Error&) {
      failed[b] = 1;
      out.draws_min[b] = -kInf;
      out.draws_max[b] = kInf;
      for (int c = 0; c < n_cells; ++c) {
        cell_min[c][b] = -kInf;
        cell_max[c][b] = kInf;
      }
    }
  });

  for (char f : failed) out.infeasible_count += f;
  for (int bc : bad_cells) out.infeasible_cells += bc;
  if (out.infeasible_count > config.max_failure_fraction * B)
    throw BootstrapFailureError(
        std::to_string(out.infeasible_count) + " of " + std::to_string(B) +
        " bootstrap replicates failed");

  out.l_alpha = empirical_quantile(out.draws_min, config.alpha);
  out.u_alpha = empirical_quantile(out.draws_max, 1.0 - config.alpha);

  std::vector<std::pair<double, double>> per_cell;
  for (int c = 0; c < n_cells; ++c) {
    CellQuantile q;
    q.cell = grid.cells[c];
    q.l_alpha = empirical_quantile(cell_min[c], config.alpha);
    q.u_alpha = empirical_quantile(cell_max[c], 1.0 - config.alpha);
    out.per_cell.push_back(q);
    per_cell.emplace_back(q.l_alpha, q.u_alpha);
  }
  std::tie(out.l_alpha_sharper, out.u_alpha_sharper) =
      sharper_ci_bounds(per_cell);
  return out;
}

}  // namespace robsens
