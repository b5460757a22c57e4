#pragma once

#include <Eigen/Dense>
#include <vector>

#include "robsens/dataset.hpp"
#include "robsens/linprog.hpp"

namespace robsens {

/// Separate-group sensitivity parameters: confounding-strength bounds and
/// violation fractions per arm, plus the multiplicative gap applied to the
/// Lambda used inside bootstrap optimizations (Lambda' = Lambda * exp(gap)).
struct SensitivityParams {
  double lambda1 = 1.0;
  double lambda0 = 1.0;
  double delta1 = 0.0;
  double delta0 = 0.0;
  double lambda_gap = 0.0;

  void validate() const;
};

struct UnitBox {
  double a_low = 0.0;
  double a_up = 1.0;
};

enum class BoundsMode { RelaxedLp, Milp };
enum class BoundsStatus { Exact, Relaxed, Infeasible };

struct SolverStats {
  long lp_iterations = 0;
  long nodes = 0;
  int solves = 0;
};

struct BoundsResult {
  double tau_min = 0.0;
  double tau_max = 0.0;
  BoundsStatus status = BoundsStatus::Infeasible;
  SolverStats stats;
};

/// One bound-optimization instance over the canonical sample: per-unit boxes
/// at some Lambda, outcomes, balance rows, bootstrap multiplicities and the
/// per-arm counting budgets ceil(n_z (1 - delta_z)).
struct BoundsProblem {
  std::vector<UnitBox> boxes;
  Eigen::VectorXd y;
  Eigen::MatrixXd g;   // n x dim_g
  std::vector<int> k;  // multiplicities, sum n
  int n1 = 0;
  int n0 = 0;
  int budget1 = 0;
  int budget0 = 0;

  int n() const { return n1 + n0; }
  bool treated(int i) const { return i < n1; }
};

/// ceil(n * frac) with protection against floating-point drizzle just above
/// an integer.
int ceil_count(int n, double frac);

/// logit^{-1}(psi + logit(e_hat)); +-inf map exactly to 1/0.
double adjust_propensity(double e_hat, double psi);

/// Range of the Charnes-Cooper weight (1 - e for treated, e for controls)
/// when the unit's logit shift is bounded by log(lambda).
UnitBox unit_box(double e_hat, int z, double lambda);

/// k-weighted treated mean of y minus k-weighted control mean, weights omega.
double hajek(const std::vector<double>& omega, const std::vector<double>& y,
             const std::vector<int>& z, const std::vector<int>& k);

/// Assembles a BoundsProblem from fitted propensities. lambda enters the
/// boxes as given (callers apply any lambda_gap beforehand); budgets come
/// from the deltas.
BoundsProblem make_bounds_problem(const Dataset& dataset,
                                  const Eigen::VectorXd& fitted,
                                  const SensitivityParams& params,
                                  const std::vector<int>& k = {});

/// The Charnes-Cooper transform of the weighted fractional program, laid out
/// exactly as the template: variables (omega_bar_1..n, delta_bar_1..n, t1,
/// t0 [, n binaries in MILP mode]), box rows, counting rows, balance and
/// normalization equalities. MILP mode adds the big-M linearization rows;
/// RelaxedLp mode caps delta_bar at t instead.
LpProblem build_charnes_cooper(const BoundsProblem& problem, LpSense sense,
                               BoundsMode mode);

/// Same transform with every indicator pinned to the given 0/1 assignment;
/// delta-bar variables disappear. Used by enumeration oracles and the
/// rounding refinement.
LpProblem build_charnes_cooper_fixed(const BoundsProblem& problem,
                                     LpSense sense,
                                     const std::vector<int>& delta);

/// Per-sense solution detail: indicator levels delta_bar/t per original
/// unit (unsampled and forced units report 1) and the Charnes-Cooper scale.
struct BoundsSolveDetail {
  bool valid = false;
  std::vector<double> delta_frac;
  double t1 = 0.0;
  double t0 = 0.0;
};

/// Minimum and maximum of the weighted Hajek contrast over the feasible set.
/// Unsampled units are presolved out (their indicators count toward the
/// budgets for free) and arms whose budget forces every indicator on are
/// solved without indicator variables.
BoundsResult solve_bounds(const BoundsProblem& problem, BoundsMode mode,
                          BoundsSolveDetail* detail_min = nullptr,
                          BoundsSolveDetail* detail_max = nullptr);

}  // namespace robsens
