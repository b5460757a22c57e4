#include "robsens/whole.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robsens/errors.hpp"

namespace robsens {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

void WholeParams::validate() const {
  if (!(lambda >= 1.0)) throw ConfigError("lambda must be >= 1");
  if (!(delta >= 0.0 && delta <= 1.0)) throw ConfigError("delta must be in [0,1]");
  if (!(lambda_gap >= 0.0)) throw ConfigError("lambda gap must be >= 0");
}

AllocationGrid make_allocation_grid(int n1, int n0, int total_budget) {
  AllocationGrid grid;
  grid.total_budget = total_budget;
  const int lo = std::max(0, total_budget - n0);
  const int hi = std::min(n1, total_budget);
  for (int l = lo; l <= hi; ++l) grid.cells.emplace_back(l, total_budget - l);
  return grid;
}

WholeCellResults solve_whole_cells(
    const BoundsProblem& base, const AllocationGrid& grid, BoundsMode mode,
    std::vector<std::pair<BoundsSolveDetail, BoundsSolveDetail>>* details) {
  if (grid.cells.empty()) throw EmptyGridError("allocation grid is empty");
  WholeCellResults out;
  out.grid = grid;
  out.envelope.tau_min = kInf;
  out.envelope.tau_max = -kInf;
  out.envelope.status = BoundsStatus::Infeasible;
  if (details) details->resize(grid.cells.size());

  BoundsProblem cell_problem = base;
  for (size_t c = 0; c < grid.cells.size(); ++c) {
    cell_problem.budget1 = grid.cells[c].first;
    cell_problem.budget0 = grid.cells[c].second;
    BoundsSolveDetail* dmin = details ? &(*details)[c].first : nullptr;
    BoundsSolveDetail* dmax = details ? &(*details)[c].second : nullptr;
    BoundsResult r = solve_bounds(cell_problem, mode, dmin, dmax);
    out.envelope.stats.lp_iterations += r.stats.lp_iterations;
    out.envelope.stats.nodes += r.stats.nodes;
    out.envelope.stats.solves += r.stats.solves;
    if (r.status == BoundsStatus::Infeasible) {
      ++out.infeasible_cells;
    } else {
      out.envelope.tau_min = std::min(out.envelope.tau_min, r.tau_min);
      out.envelope.tau_max = std::max(out.envelope.tau_max, r.tau_max);
      out.envelope.status =
          mode == BoundsMode::Milp ? BoundsStatus::Exact : BoundsStatus::Relaxed;
    }
    out.cells.push_back(std::move(r));
  }
  if (out.envelope.status == BoundsStatus::Infeasible)
    out.envelope.tau_min = out.envelope.tau_max = kNaN;
  return out;
}

namespace {

BoundsProblem pooled_problem(const Dataset& dataset,
                             const Eigen::VectorXd& fitted,
                             const WholeParams& params,
                             const std::vector<int>& k) {
  params.validate();
  SensitivityParams sep;
  sep.lambda1 = sep.lambda0 = params.lambda;
  sep.delta1 = sep.delta0 = 0.0;
  return make_bounds_problem(dataset, fitted, sep, k);
}

}  // namespace

BoundsResult solve_whole_bounds(const Dataset& dataset,
                                const Eigen::VectorXd& fitted,
                                const WholeParams& params,
                                const std::vector<int>& k, BoundsMode mode) {
  BoundsProblem base = pooled_problem(dataset, fitted, params, k);
  const int budget = ceil_count(dataset.n(), 1.0 - params.delta);
  AllocationGrid grid = make_allocation_grid(dataset.n1(), dataset.n0(), budget);
  return solve_whole_cells(base, grid, mode).envelope;
}

BoundsResult adhoc_tighten(
    const BoundsProblem& base, const AllocationGrid& grid,
    const std::vector<std::pair<BoundsSolveDetail, BoundsSolveDetail>>&
        relaxed_details) {
  if (grid.cells.size() != relaxed_details.size())
    throw DimensionMismatchError("adhoc_tighten: detail count mismatch");
  const int n = base.n();
  const int n1 = base.n1;

  BoundsResult out;
  out.tau_min = kInf;
  out.tau_max = -kInf;
  out.status = BoundsStatus::Infeasible;

  // Round one arm of one cell: turn on the m largest fractional indicators,
  // m = rounded mass, never below the cell budget.
  auto round_arm = [&](const std::vector<double>& frac, int begin, int end,
                       int budget, std::vector<int>& delta) {
    double mass = 0.0;
    for (int i = begin; i < end; ++i) mass += frac[i];
    int m = static_cast<int>(std::lround(mass));
    m = std::clamp(m, budget, end - begin);
    std::vector<int> idx(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return frac[a] > frac[b];
    });
    for (int i = begin; i < end; ++i) delta[i] = 0;
    for (int r = 0; r < m; ++r) delta[idx[r]] = 1;
  };

  BoundsProblem cell_problem = base;
  for (size_t c = 0; c < grid.cells.size(); ++c) {
    cell_problem.budget1 = grid.cells[c].first;
    cell_problem.budget0 = grid.cells[c].second;
    for (int side = 0; side < 2; ++side) {
      const BoundsSolveDetail& d =
          side == 0 ? relaxed_details[c].first : relaxed_details[c].second;
      if (!d.valid) continue;
      std::vector<int> delta(n, 0);
      round_arm(d.delta_frac, 0, n1, cell_problem.budget1, delta);
      round_arm(d.delta_frac, n1, n, cell_problem.budget0, delta);
      LpProblem lp = build_charnes_cooper_fixed(
          cell_problem, side == 0 ? LpSense::Minimize : LpSense::Maximize,
          delta);
      LpSolution sol = solve_lp(lp);
      out.stats.lp_iterations += sol.iterations;
      ++out.stats.solves;
      if (sol.status != LpStatus::Optimal) continue;
      if (side == 0)
        out.tau_min = std::min(out.tau_min, sol.objective_value);
      else
        out.tau_max = std::max(out.tau_max, sol.objective_value);
      out.status = BoundsStatus::Exact;
    }
  }
  if (out.status == BoundsStatus::Infeasible) {
    out.tau_min = out.tau_max = kNaN;
  }
  return out;
}

BoundsResult adhoc_tighten(const Dataset& dataset,
                           const Eigen::VectorXd& fitted,
                           const WholeParams& params,
                           const std::vector<int>& k) {
  BoundsProblem base = pooled_problem(dataset, fitted, params, k);
  const int budget = ceil_count(dataset.n(), 1.0 - params.delta);
  AllocationGrid grid = make_allocation_grid(dataset.n1(), dataset.n0(), budget);
  std::vector<std::pair<BoundsSolveDetail, BoundsSolveDetail>> details;
  solve_whole_cells(base, grid, BoundsMode::RelaxedLp, &details);
  return adhoc_tighten(base, grid, details);
}

std::pair<double, double> sharper_ci_bounds(
    const std::vector<std::pair<double, double>>& per_cell_lower_upper) {
  if (per_cell_lower_upper.empty())
    throw EmptyGridError("sharper_ci_bounds: no cells");
  double lo = kInf, hi = -kInf;
  for (const auto& [l, u] : per_cell_lower_upper) {
    lo = std::min(lo, l);
    hi = std::max(hi, u);
  }
  return {lo, hi};
}

}  // namespace robsens
