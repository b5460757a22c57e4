#include "robsens/whole.hpp"

#include <cmath>

#include "doctest.h"
#include "robsens/errors.hpp"
#include "robsens/logistic.hpp"
#include "robsens/rng.hpp"
#include "support.hpp"

using namespace robsens;
using testsupport::kInf;

TEST_CASE("allocation grid respects arm capacities") {
  AllocationGrid g = make_allocation_grid(3, 4, 5);
  CHECK(g.total_budget == 5);
  // l in [max(0, 5-4), min(3, 5)] = [1, 3]
  REQUIRE(g.cells.size() == 3);
  CHECK(g.cells.front() == std::pair<int, int>{1, 4});
  CHECK(g.cells.back() == std::pair<int, int>{3, 2});

  AllocationGrid full = make_allocation_grid(3, 4, 7);
  REQUIRE(full.cells.size() == 1);
  CHECK(full.cells[0] == std::pair<int, int>{3, 4});
}

TEST_CASE("delta 0 whole bounds equal separate bounds at delta 0") {
  Rng rng(11);
  BoundsProblem p = testsupport::random_bounds_problem(rng, 3, 4, true, false);
  p.budget1 = 3;
  p.budget0 = 4;
  BoundsResult sep = solve_bounds(p, BoundsMode::RelaxedLp);

  AllocationGrid grid = make_allocation_grid(3, 4, 7);
  WholeCellResults whole = solve_whole_cells(p, grid, BoundsMode::RelaxedLp);
  if (sep.status == BoundsStatus::Infeasible) {
    CHECK(whole.envelope.status == BoundsStatus::Infeasible);
  } else {
    CHECK(whole.envelope.tau_min == doctest::Approx(sep.tau_min).epsilon(1e-9));
    CHECK(whole.envelope.tau_max == doctest::Approx(sep.tau_max).epsilon(1e-9));
  }
}

TEST_CASE("envelope equals brute force over pooled indicator vectors") {
  Rng rng(4096);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n1 = 2 + static_cast<int>(rng.uniform() * 2);
    const int n0 = 2 + static_cast<int>(rng.uniform() * 2);
    const int n = n1 + n0;
    BoundsProblem p = testsupport::random_bounds_problem(
        rng, n1, n0, trial % 2 == 0, false);
    const int budget = 1 + static_cast<int>(rng.uniform() * (n - 1));

    // pooled brute force: all indicator vectors with total >= budget
    BoundsResult oracle;
    oracle.tau_min = kInf;
    oracle.tau_max = -kInf;
    oracle.status = BoundsStatus::Infeasible;
    for (long mask = 0; mask < (1L << n); ++mask) {
      std::vector<int> delta(n);
      int total = 0;
      for (int i = 0; i < n; ++i) total += delta[i] = (mask >> i) & 1;
      if (total < budget) continue;
      BoundsProblem q = p;
      q.budget1 = 0;
      q.budget0 = 0;
      for (int side = 0; side < 2; ++side) {
        LpProblem lp = build_charnes_cooper_fixed(
            q, side == 0 ? LpSense::Minimize : LpSense::Maximize, delta);
        LpSolution sol = solve_lp(lp);
        if (sol.status != LpStatus::Optimal) continue;
        oracle.status = BoundsStatus::Exact;
        if (side == 0)
          oracle.tau_min = std::min(oracle.tau_min, sol.objective_value);
        else
          oracle.tau_max = std::max(oracle.tau_max, sol.objective_value);
      }
    }

    AllocationGrid grid = make_allocation_grid(n1, n0, budget);
    WholeCellResults whole = solve_whole_cells(p, grid, BoundsMode::Milp);
    if (oracle.status == BoundsStatus::Infeasible) {
      CHECK(whole.envelope.status == BoundsStatus::Infeasible);
      continue;
    }
    REQUIRE(whole.envelope.status == BoundsStatus::Exact);
    CHECK(whole.envelope.tau_min ==
          doctest::Approx(oracle.tau_min).epsilon(1e-6));
    CHECK(whole.envelope.tau_max ==
          doctest::Approx(oracle.tau_max).epsilon(1e-6));
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("adhoc tighten returns an interval inside the relaxed envelope") {
  Rng rng(5555);
  int nontrivial = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n1 = 3 + static_cast<int>(rng.uniform() * 3);
    const int n0 = 3 + static_cast<int>(rng.uniform() * 3);
    const int n = n1 + n0;
    BoundsProblem p = testsupport::random_bounds_problem(
        rng, n1, n0, trial % 2 == 1, false);
    const int budget = 1 + static_cast<int>(rng.uniform() * (n - 1));
    AllocationGrid grid = make_allocation_grid(n1, n0, budget);
    std::vector<std::pair<BoundsSolveDetail, BoundsSolveDetail>> details;
    WholeCellResults relaxed =
        solve_whole_cells(p, grid, BoundsMode::RelaxedLp, &details);
    if (relaxed.envelope.status == BoundsStatus::Infeasible) continue;
    BoundsResult inner = adhoc_tighten(p, grid, details);
    if (inner.status == BoundsStatus::Infeasible) continue;
    CHECK(inner.tau_min >= relaxed.envelope.tau_min - 1e-7);
    CHECK(inner.tau_max <= relaxed.envelope.tau_max + 1e-7);
    ++nontrivial;
  }
  CHECK(nontrivial >= 10);
}

TEST_CASE("adhoc tighten is exact when the relaxed solution is integral") {
  // Separate boxes, no balance rows: the relaxed optimum is integral, and
  // rounding must reproduce it.
  BoundsProblem p;
  p.n1 = p.n0 = 2;
  p.y.resize(4);
  p.y << 1, 3, 0, 0;
  p.g.resize(4, 0);
  p.k = {1, 1, 1, 1};
  p.boxes = {unit_box(0.5, 1, 2.0), unit_box(0.5, 1, 2.0),
             unit_box(0.5, 0, 2.0), unit_box(0.5, 0, 2.0)};
  AllocationGrid grid = make_allocation_grid(2, 2, 4);  // single cell (2,2)
  std::vector<std::pair<BoundsSolveDetail, BoundsSolveDetail>> details;
  WholeCellResults relaxed =
      solve_whole_cells(p, grid, BoundsMode::RelaxedLp, &details);
  BoundsResult inner = adhoc_tighten(p, grid, details);
  REQUIRE(inner.status != BoundsStatus::Infeasible);
  CHECK(inner.tau_min == doctest::Approx(relaxed.envelope.tau_min).epsilon(1e-8));
  CHECK(inner.tau_max == doctest::Approx(relaxed.envelope.tau_max).epsilon(1e-8));
}

TEST_CASE("sharper bounds take the cellwise extremes") {
  CHECK(sharper_ci_bounds({{1.0, 4.0}}) == std::pair<double, double>{1.0, 4.0});
  auto [lo, hi] = sharper_ci_bounds({{1.0, 4.0}, {0.5, 5.0}, {2.0, 3.0}});
  CHECK(lo == doctest::Approx(0.5));
  CHECK(hi == doctest::Approx(5.0));
  CHECK_THROWS_AS(sharper_ci_bounds({}), EmptyGridError);
}
