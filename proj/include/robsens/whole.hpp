#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "robsens/bounds.hpp"
#include "robsens/dataset.hpp"

namespace robsens {

/// Whole-population sensitivity model: one Lambda and one delta for the
/// pooled sample.
struct WholeParams {
  double lambda = 1.0;
  double delta = 0.0;
  double lambda_gap = 0.0;

  void validate() const;
};

/// Ways to split the pooled counting budget ceil(n(1-delta)) between the
/// arms: cells (l, budget-l) with l within what each arm can absorb.
struct AllocationGrid {
  int total_budget = 0;
  std::vector<std::pair<int, int>> cells;
};

AllocationGrid make_allocation_grid(int n1, int n0, int total_budget);

/// Per-cell results of a whole-population solve plus their envelope. Cells
/// reporting Infeasible are skipped by the envelope and counted.
struct WholeCellResults {
  AllocationGrid grid;
  std::vector<BoundsResult> cells;
  BoundsResult envelope;
  int infeasible_cells = 0;
};

/// Envelope over the allocation grid for an already-assembled problem whose
/// boxes carry the pooled Lambda; budgets are overwritten cell by cell.
WholeCellResults solve_whole_cells(
    const BoundsProblem& base, const AllocationGrid& grid, BoundsMode mode,
    std::vector<std::pair<BoundsSolveDetail, BoundsSolveDetail>>* details =
        nullptr);

/// Whole-population bounds via the multiple-LP path: one separate-group
/// solve per admissible budget split, enveloped.
BoundsResult solve_whole_bounds(const Dataset& dataset,
                                const Eigen::VectorXd& fitted,
                                const WholeParams& params,
                                const std::vector<int>& k = {},
                                BoundsMode mode = BoundsMode::RelaxedLp);

/// Rounds each cell's relaxed indicator levels to the nearest integral
/// assignment, re-solves the residual LPs, and envelopes the results. The
/// returned interval is inner: it sits inside both the exact and the relaxed
/// intervals.
BoundsResult adhoc_tighten(
    const BoundsProblem& base, const AllocationGrid& grid,
    const std::vector<std::pair<BoundsSolveDetail, BoundsSolveDetail>>&
        relaxed_details);

/// Convenience form matching the bound pipeline: re-solves the relaxed grid
/// with detail capture, then tightens.
BoundsResult adhoc_tighten(const Dataset& dataset,
                           const Eigen::VectorXd& fitted,
                           const WholeParams& params,
                           const std::vector<int>& k = {});

/// Decomposed confidence bounds: max of the per-cell upper quantiles and min
/// of the per-cell lower quantiles. Requires all cells evaluated on shared
/// bootstrap replicates.
std::pair<double, double> sharper_ci_bounds(
    const std::vector<std::pair<double, double>>& per_cell_lower_upper);

}  // namespace robsens
