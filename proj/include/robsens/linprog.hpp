#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace robsens {

enum class LpSense { Minimize, Maximize };

enum class LpStatus {
  Optimal,
  Infeasible,
  Unbounded,
  NumericalBreakdown,
  NodeLimitExceeded,
};

std::string to_string(LpStatus status);

/// Dense LP/MILP in the form
///   min/max c'x   s.t.  a_eq x = b_eq,  a_le x <= b_le,  lower <= x <= upper,
/// with an optional subset of variables restricted to {0,1}.
struct LpProblem {
  LpSense sense = LpSense::Minimize;
  Eigen::VectorXd c;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_le;
  Eigen::VectorXd b_le;
  Eigen::VectorXd lower;  // -inf allowed
  Eigen::VectorXd upper;  // +inf allowed
  std::vector<int> binary_mask;  // variable indices restricted to {0,1}

  int num_vars() const { return static_cast<int>(c.size()); }
  static LpProblem make(int n_vars);
};

struct LpSolution {
  LpStatus status = LpStatus::NumericalBreakdown;
  Eigen::VectorXd x;
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  long iterations = 0;
  long nodes = 0;  // branch-and-bound nodes (MILP only)
};

struct LpOptions {
  double feas_tol = 1e-8;       // row residuals, after row equilibration
  double opt_tol = 1e-9;        // reduced-cost threshold
  double pivot_tol = 1e-9;
  double degen_tol = 1e-10;
  int bland_after = 500;        // degenerate pivots before Bland's rule
  double integrality_tol = 1e-6;
  double gap_tol = 1e-6;        // relative MILP optimality gap
  long node_limit = 1000000;
  long iteration_limit = 0;     // 0: scale with problem size
};

/// Two-phase revised simplex with general variable bounds. binary_mask is
/// ignored. Statuses are returned, not thrown.
LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});

namespace detail {
class Simplex;
}

/// Re-solvable LP handle: the constraint system is translated once and later
/// solves reuse the previous optimal basis, so changing only the objective
/// costs a warm phase-2 pass.
class LpObjectiveSweep {
 public:
  explicit LpObjectiveSweep(const LpProblem& problem,
                            const LpOptions& options = {});
  ~LpObjectiveSweep();
  LpObjectiveSweep(LpObjectiveSweep&&) noexcept;
  LpObjectiveSweep& operator=(LpObjectiveSweep&&) noexcept;

  LpSolution solve(const Eigen::VectorXd& c, LpSense sense);

 private:
  std::unique_ptr<detail::Simplex> impl_;
};

/// Best-first branch and bound over the binary variables; LP relaxations are
/// solved by solve_lp. Branches on the most fractional binary, lowest index
/// on ties.
LpSolution solve_milp(const LpProblem& problem, const LpOptions& options = {});

/// Plain-text dump (CPLEX LP interchange format) for external cross-checks.
void write_lp_format(const LpProblem& problem, std::ostream& out);

}  // namespace robsens
