#pragma once

// Shared helpers for the test suites: small random problem generators and
// brute-force reference solvers kept independent of the library's solve
// paths.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "robsens/bounds.hpp"
#include "robsens/dataset.hpp"
#include "robsens/linprog.hpp"
#include "robsens/rng.hpp"

namespace testsupport {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Exhaustive vertex enumeration for small dense LPs with finite variable
/// bounds. Every subset of n constraints (equalities, inequalities, bounds)
/// is solved as a square system and feasibility-filtered; the best feasible
/// vertex value is returned. Assumes the feasible region is bounded.
inline std::optional<double> vertex_enum_optimum(const robsens::LpProblem& p,
                                                 double feas_tol = 1e-7) {
  const int n = p.num_vars();
  struct Row {
    Eigen::VectorXd a;
    double b;
    bool eq;
  };
  std::vector<Row> rows;
  for (int i = 0; i < p.b_eq.size(); ++i)
    rows.push_back({p.a_eq.row(i).transpose(), p.b_eq[i], true});
  for (int i = 0; i < p.b_le.size(); ++i)
    rows.push_back({p.a_le.row(i).transpose(), p.b_le[i], false});
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(p.upper[j])) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
      a[j] = 1;
      rows.push_back({a, p.upper[j], false});
    }
    if (std::isfinite(p.lower[j])) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
      a[j] = -1;
      rows.push_back({a, -p.lower[j], false});
    }
  }
  const int r = static_cast<int>(rows.size());
  if (r < n) return std::nullopt;

  const bool maximize = p.sense == robsens::LpSense::Maximize;
  std::optional<double> best;
  std::vector<int> pick(n);
  for (int j = 0; j < n; ++j) pick[j] = j;

  auto feasible = [&](const Eigen::VectorXd& x) {
    for (const Row& row : rows) {
      const double lhs = row.a.dot(x);
      if (row.eq ? std::abs(lhs - row.b) > feas_tol : lhs > row.b + feas_tol)
        return false;
    }
    return true;
  };

  while (true) {
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd b(n);
    for (int j = 0; j < n; ++j) {
      A.row(j) = rows[pick[j]].a.transpose();
      b[j] = rows[pick[j]].b;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.isInvertible()) {
      Eigen::VectorXd x = lu.solve(b);
      if (x.allFinite() && feasible(x)) {
        const double v = p.c.dot(x);
        if (!best || (maximize ? v > *best : v < *best)) best = v;
      }
    }
    // next combination
    int j = n - 1;
    while (j >= 0 && pick[j] == r - n + j) --j;
    if (j < 0) break;
    ++pick[j];
    for (int t = j + 1; t < n; ++t) pick[t] = pick[t - 1] + 1;
  }
  return best;
}

/// Random bounded-feasible LP: box bounds plus inequality rows anchored at a
/// known interior point.
inline robsens::LpProblem random_bounded_lp(robsens::Rng& rng, int n_vars,
                                            int n_le, int n_eq) {
  using robsens::LpProblem;
  LpProblem p = LpProblem::make(n_vars);
  p.sense = rng.uniform() < 0.5 ? robsens::LpSense::Maximize
                                : robsens::LpSense::Minimize;
  Eigen::VectorXd x0(n_vars);
  for (int j = 0; j < n_vars; ++j) {
    const double lo = -2.0 + 2.0 * rng.uniform();
    const double hi = lo + 0.5 + 3.0 * rng.uniform();
    p.lower[j] = lo;
    p.upper[j] = hi;
    x0[j] = lo + (hi - lo) * rng.uniform();
    p.c[j] = -1.0 + 2.0 * rng.uniform();
  }
  p.a_le.resize(n_le, n_vars);
  p.b_le.resize(n_le);
  for (int i = 0; i < n_le; ++i) {
    for (int j = 0; j < n_vars; ++j) p.a_le(i, j) = -1.0 + 2.0 * rng.uniform();
    p.b_le[i] = p.a_le.row(i).dot(x0) + 0.1 + rng.uniform();
  }
  p.a_eq.resize(n_eq, n_vars);
  p.b_eq.resize(n_eq);
  for (int i = 0; i < n_eq; ++i) {
    for (int j = 0; j < n_vars; ++j) p.a_eq(i, j) = -1.0 + 2.0 * rng.uniform();
    p.b_eq[i] = p.a_eq.row(i).dot(x0);
  }
  return p;
}

inline robsens::Dataset toy_dataset(const std::vector<double>& y,
                                    const std::vector<int>& z,
                                    const std::vector<std::vector<double>>& x) {
  std::vector<robsens::Observation> rows;
  for (size_t i = 0; i < y.size(); ++i)
    rows.push_back({y[i], z[i], x.empty() ? std::vector<double>{} : x[i]});
  return robsens::Dataset(std::move(rows));
}

/// Exact bound oracle for small instances: enumerate every indicator vector
/// meeting the budgets and solve the residual LP with indicators pinned.
inline robsens::BoundsResult brute_force_bounds(
    const robsens::BoundsProblem& p) {
  using namespace robsens;
  const int n = p.n();
  BoundsResult out;
  out.tau_min = kInf;
  out.tau_max = -kInf;
  out.status = BoundsStatus::Infeasible;
  for (long mask = 0; mask < (1L << n); ++mask) {
    std::vector<int> delta(n);
    int on1 = 0, on0 = 0;
    for (int i = 0; i < n; ++i) {
      delta[i] = (mask >> i) & 1;
      (p.treated(i) ? on1 : on0) += delta[i];
    }
    if (on1 < p.budget1 || on0 < p.budget0) continue;
    for (int side = 0; side < 2; ++side) {
      LpProblem lp = build_charnes_cooper_fixed(
          p, side == 0 ? LpSense::Minimize : LpSense::Maximize, delta);
      LpSolution sol = solve_lp(lp);
      if (sol.status != LpStatus::Optimal) continue;
      out.status = BoundsStatus::Exact;
      if (side == 0)
        out.tau_min = std::min(out.tau_min, sol.objective_value);
      else
        out.tau_max = std::max(out.tau_max, sol.objective_value);
    }
  }
  if (out.status == BoundsStatus::Infeasible)
    out.tau_min = out.tau_max = std::numeric_limits<double>::quiet_NaN();
  return out;
}

/// Random small bound instance; with_g adds one balance column, with_zero_k
/// zeroes some multiplicities (keeping at least one per arm).
inline robsens::BoundsProblem random_bounds_problem(robsens::Rng& rng, int n1,
                                                    int n0, bool with_g,
                                                    bool with_zero_k,
                                                    double max_lambda = 4.0) {
  using namespace robsens;
  const int n = n1 + n0;
  BoundsProblem p;
  p.n1 = n1;
  p.n0 = n0;
  p.y.resize(n);
  p.boxes.resize(n);
  p.k.assign(n, 1);
  const double lambda = 1.0 + (max_lambda - 1.0) * rng.uniform();
  for (int i = 0; i < n; ++i) {
    p.y[i] = -2.0 + 4.0 * rng.uniform();
    const double e = 0.1 + 0.8 * rng.uniform();
    p.boxes[i] = unit_box(e, i < n1 ? 1 : 0, lambda);
  }
  if (with_g) {
    p.g.resize(n, 1);
    for (int i = 0; i < n; ++i) p.g(i, 0) = -1.0 + 2.0 * rng.uniform();
  } else {
    p.g.resize(n, 0);
  }
  if (with_zero_k) {
    for (int i = 0; i < n; ++i)
      if (rng.uniform() < 0.25) p.k[i] = 0;
    bool any1 = false, any0 = false;
    for (int i = 0; i < n; ++i) {
      if (p.k[i] > 0) (i < n1 ? any1 : any0) = true;
      if (rng.uniform() < 0.3) p.k[i] += 1;
    }
    if (!any1) p.k[0] = 1;
    if (!any0) p.k[n1] = 1;
  }
  p.budget1 = static_cast<int>(rng.uniform() * (n1 + 1));
  p.budget0 = static_cast<int>(rng.uniform() * (n0 + 1));
  return p;
}

}  // namespace testsupport
