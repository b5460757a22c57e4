#include "robsens/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <queue>

namespace {
bool lp_debug_enabled() {
  static const bool on = std::getenv("ROBSENS_LP_DEBUG") != nullptr;
  return on;
}
#define LP_DEBUG(...) \
  do {                \
    if (lp_debug_enabled()) std::fprintf(stderr, __VA_ARGS__); \
  } while (0)
}  // namespace

namespace robsens {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
enum class VarState : unsigned char { Basic, AtLower, AtUpper, FreeZero };
}  // namespace

namespace detail {

/// Bounded-variable two-phase revised simplex on
///   A x = b (rows equilibrated),  lb <= x <= ub,
/// where x = [structural | slacks-for-le-rows], plus one artificial per row.
/// The basis inverse is kept explicitly and updated by the product form.
/// After a successful solve the basis is retained, so another objective over
/// the same constraints re-enters at phase 2.
class Simplex {
 public:
  Simplex(const LpProblem& p, const Eigen::VectorXd& lb_struct,
          const Eigen::VectorXd& ub_struct, const LpOptions& opt)
      : opt_(opt) {
    m_eq_ = static_cast<int>(p.b_eq.size());
    m_le_ = static_cast<int>(p.b_le.size());
    m_ = m_eq_ + m_le_;
    n_struct_ = p.num_vars();
    n_cols_ = n_struct_ + m_le_;          // structural + slack
    n_total_ = n_cols_ + m_;              // + artificials

    // Row scaling by the largest structural coefficient.
    b_.resize(m_);
    row_scale_.assign(m_, 1.0);
    auto scale_of = [](const auto& row) {
      double s = row.cwiseAbs().maxCoeff();
      return s > 0 ? s : 1.0;
    };
    for (int i = 0; i < m_eq_; ++i) {
      row_scale_[i] = p.a_eq.cols() > 0 ? scale_of(p.a_eq.row(i)) : 1.0;
      b_[i] = p.b_eq[i] / row_scale_[i];
    }
    for (int i = 0; i < m_le_; ++i) {
      row_scale_[m_eq_ + i] = p.a_le.cols() > 0 ? scale_of(p.a_le.row(i)) : 1.0;
      b_[m_eq_ + i] = p.b_le[i] / row_scale_[m_eq_ + i];
    }

    // Column-sparse copy of the scaled constraint matrix.
    col_start_.assign(n_cols_ + 1, 0);
    std::vector<int> nnz_col(n_cols_, 0);
    auto entry = [&](int i, int j) -> double {
      return i < m_eq_ ? p.a_eq(i, j) : p.a_le(i - m_eq_, j);
    };
    for (int j = 0; j < n_struct_; ++j)
      for (int i = 0; i < m_; ++i)
        if (entry(i, j) != 0.0) ++nnz_col[j];
    for (int r = 0; r < m_le_; ++r) nnz_col[n_struct_ + r] = 1;
    for (int j = 0; j < n_cols_; ++j) col_start_[j + 1] = col_start_[j] + nnz_col[j];
    row_idx_.resize(col_start_[n_cols_]);
    val_.resize(col_start_[n_cols_]);
    {
      std::vector<int> pos(col_start_.begin(), col_start_.end() - 1);
      for (int j = 0; j < n_struct_; ++j)
        for (int i = 0; i < m_; ++i) {
          double v = entry(i, j);
          if (v != 0.0) {
            row_idx_[pos[j]] = i;
            val_[pos[j]] = v / row_scale_[i];
            ++pos[j];
          }
        }
      for (int r = 0; r < m_le_; ++r) {
        row_idx_[pos[n_struct_ + r]] = m_eq_ + r;
        val_[pos[n_struct_ + r]] = 1.0;
      }
    }

    lb_.assign(n_total_, 0.0);
    ub_.assign(n_total_, kInf);
    for (int j = 0; j < n_struct_; ++j) {
      lb_[j] = lb_struct[j];
      ub_[j] = ub_struct[j];
    }
    // slacks: [0, inf); artificials: [0, inf) until phase 2.
  }

  LpStatus run(const Eigen::VectorXd& c, bool minimize, Eigen::VectorXd* x_out,
               double* obj_out, long* iters_out) {
    cost_.assign(n_total_, 0.0);
    for (int j = 0; j < n_struct_; ++j) cost_[j] = minimize ? c[j] : -c[j];

    long iters = 0;
    const long max_iters = opt_.iteration_limit > 0
                               ? opt_.iteration_limit
                               : 20000 + 200L * m_;
    LpStatus st;
    if (!have_basis_) {
      for (int j = 0; j < n_struct_; ++j)
        if (lb_[j] > ub_[j] + 1e-12) return LpStatus::Infeasible;

      state_.assign(n_total_, VarState::AtLower);
      xval_.assign(n_total_, 0.0);
      for (int j = 0; j < n_cols_; ++j) {
        if (std::isfinite(lb_[j])) {
          state_[j] = VarState::AtLower;
          xval_[j] = lb_[j];
        } else if (std::isfinite(ub_[j])) {
          state_[j] = VarState::AtUpper;
          xval_[j] = ub_[j];
        } else {
          state_[j] = VarState::FreeZero;
          xval_[j] = 0.0;
        }
      }

      // Start basis: the slack wherever it is already feasible, an
      // artificial (oriented to a >= 0 value) elsewhere. Artificials of
      // slack-covered rows are pinned immediately.
      Eigen::VectorXd resid = residual_rhs();
      basics_.resize(m_);
      art_sign_.assign(m_, 1.0);
      binv_ = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                            Eigen::RowMajor>::Zero(m_, m_);
      xb_.resize(m_);
      for (int i = 0; i < m_; ++i) {
        const int aj = n_cols_ + i;
        if (i >= m_eq_ && resid[i] >= 0.0) {
          const int sj = n_struct_ + (i - m_eq_);
          basics_[i] = sj;
          state_[sj] = VarState::Basic;
          binv_(i, i) = 1.0;
          xb_[i] = resid[i];
          ub_[aj] = 0.0;
          state_[aj] = VarState::AtLower;
          xval_[aj] = 0.0;
        } else {
          art_sign_[i] = resid[i] >= 0 ? 1.0 : -1.0;
          basics_[i] = aj;
          state_[aj] = VarState::Basic;
          binv_(i, i) = art_sign_[i];
          xb_[i] = std::abs(resid[i]);
        }
      }

      // Phase 1: minimize a mildly perturbed sum of artificials; the
      // perturbation breaks the ties that drive degenerate cycling and
      // cannot change feasibility (the optimum is zero either way).
      std::vector<double> saved_cost = cost_;
      std::fill(cost_.begin(), cost_.end(), 0.0);
      std::uint64_t mix = 0x9E3779B97F4A7C15ULL;
      for (int i = 0; i < m_; ++i) {
        mix ^= mix << 13;
        mix ^= mix >> 7;
        mix ^= mix << 17;
        cost_[n_cols_ + i] = 1.0 + 1e-7 * static_cast<double>(mix % 1024);
      }
      phase_ = 1;
      st = iterate(max_iters, &iters);
      if (st != LpStatus::Optimal) {
        *iters_out = iters;
        return st == LpStatus::Unbounded ? LpStatus::NumericalBreakdown : st;
      }
      double infeas = 0.0;
      for (int i = 0; i < m_; ++i)
        if (basics_[i] >= n_cols_) infeas += std::max(0.0, xb_[i]);
      const double b_max = m_ > 0 ? b_.cwiseAbs().maxCoeff() : 0.0;
      if (infeas > opt_.feas_tol * (1.0 + b_max)) {
        *iters_out = iters;
        return LpStatus::Infeasible;
      }

      // Pin artificials at zero for phase 2 and every later solve.
      for (int i = 0; i < m_; ++i) {
        int aj = n_cols_ + i;
        ub_[aj] = 0.0;
        if (state_[aj] != VarState::Basic) {
          state_[aj] = VarState::AtLower;
          xval_[aj] = 0.0;
        }
      }
      cost_ = saved_cost;
    }

    phase_ = 2;
    st = iterate(max_iters, &iters);
    *iters_out = iters;
    if (st != LpStatus::Optimal) {
      have_basis_ = false;
      return st;
    }
    have_basis_ = true;

    refresh_basic_values();
    Eigen::VectorXd x(n_struct_);
    for (int j = 0; j < n_struct_; ++j) x[j] = value_of(j);
    for (int j = 0; j < n_struct_; ++j) {
      if (std::isfinite(lb_[j])) x[j] = std::max(x[j], lb_[j]);
      if (std::isfinite(ub_[j])) x[j] = std::min(x[j], ub_[j]);
    }
    if (max_scaled_residual(x) > opt_.feas_tol * 10) {
      LP_DEBUG("lp: final residual %g exceeds tolerance\n", max_scaled_residual(x));
      have_basis_ = false;
      return LpStatus::NumericalBreakdown;
    }
    double obj = 0.0;
    for (int j = 0; j < n_struct_; ++j) obj += cost_[j] * x[j];
    *obj_out = minimize ? obj : -obj;
    *x_out = std::move(x);
    return LpStatus::Optimal;
  }

 private:
  double value_of(int j) const {
    if (state_[j] == VarState::Basic) {
      for (int i = 0; i < m_; ++i)
        if (basics_[i] == j) return xb_[i];
    }
    return xval_[j];
  }

  Eigen::VectorXd residual_rhs() const {
    Eigen::VectorXd r = b_;
    for (int j = 0; j < n_cols_; ++j) {
      double v = xval_[j];
      if (v == 0.0 || state_[j] == VarState::Basic) continue;
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
        r[row_idx_[k]] -= val_[k] * v;
    }
    return r;
  }

  void refresh_basic_values() {
    Eigen::VectorXd r = residual_rhs();
    for (int i = 0; i < m_; ++i) {
      double s = 0.0;
      for (int k = 0; k < m_; ++k) s += binv_(i, k) * r[k];
      xb_[i] = s;
    }
  }

  double max_scaled_residual(const Eigen::VectorXd& x) const {
    Eigen::VectorXd r = b_;
    for (int j = 0; j < n_struct_; ++j) {
      if (x[j] == 0.0) continue;
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
        r[row_idx_[k]] -= val_[k] * x[j];
    }
    double worst = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (i < m_eq_) {
        worst = std::max(worst, std::abs(r[i]));
      } else {
        worst = std::max(worst, -r[i]);  // slack must be >= 0
      }
    }
    return worst;
  }

  /// w = Binv * A_col(j); artificial columns are +-e_i.
  void ftran(int j, Eigen::VectorXd& w) const {
    w.setZero();
    if (j >= n_cols_) {
      int r = j - n_cols_;
      for (int i = 0; i < m_; ++i) w[i] = art_sign_[r] * binv_(i, r);
      return;
    }
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      const double a = val_[k];
      const int r = row_idx_[k];
      for (int i = 0; i < m_; ++i) w[i] += a * binv_(i, r);
    }
  }

  double reduced_cost(int j, const Eigen::VectorXd& y) const {
    double d = cost_[j];
    if (j >= n_cols_) return d - art_sign_[j - n_cols_] * y[j - n_cols_];
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
      d -= y[row_idx_[k]] * val_[k];
    return d;
  }

  bool refactorize() {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
      int j = basics_[i];
      if (j >= n_cols_) {
        B(j - n_cols_, i) = art_sign_[j - n_cols_];
      } else {
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
          B(row_idx_[k], i) = val_[k];
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    Eigen::MatrixXd inv = lu.inverse();
    if (!inv.allFinite()) return false;
    binv_ = inv;
    refresh_basic_values();
    return true;
  }

  double current_objective() const {
    double obj = 0.0;
    for (int i = 0; i < m_; ++i) obj += cost_[basics_[i]] * xb_[i];
    for (int j = 0; j < n_total_; ++j)
      if (state_[j] != VarState::Basic && cost_[j] != 0.0 && xval_[j] != 0.0)
        obj += cost_[j] * xval_[j];
    return obj;
  }

  LpStatus iterate(long max_iters, long* iters) {
    Eigen::VectorXd y(m_), w(m_);
    int degenerate_pivots = 0;
    bool bland = false;
    long since_refresh = 0;
    long stagnant = 0;
    double last_obj = kInf;

    while (true) {
      if (*iters >= max_iters) {
        LP_DEBUG("lp: iteration limit %ld (m=%d phase=%d)\n", max_iters, m_, phase_);
        return LpStatus::NumericalBreakdown;
      }
      ++*iters;
      ++since_refresh;
      if (since_refresh >= 512) {
        refresh_basic_values();
        since_refresh = 0;
      }
      if ((*iters & 63) == 0) {
        const double obj = current_objective();
        if (obj < last_obj - 1e-12 * (1.0 + std::abs(last_obj))) {
          last_obj = obj;
          stagnant = 0;
        } else {
          stagnant += 64;
          if (stagnant >= 4000) bland = true;
          if (stagnant >= 20000) {
            LP_DEBUG("lp: stalled for %ld iterations (phase=%d m=%d)\n",
                     stagnant, phase_, m_);
            return LpStatus::NumericalBreakdown;
          }
        }
      }

      // y = cB' Binv
      y.setZero();
      for (int i = 0; i < m_; ++i) {
        const double cb = cost_[basics_[i]];
        if (cb == 0.0) continue;
        for (int k = 0; k < m_; ++k) y[k] += cb * binv_(i, k);
      }

      // Pricing.
      int q = -1;
      double best = opt_.opt_tol;
      int dir_q = +1;
      const int price_limit = phase_ == 1 ? n_total_ : n_cols_;
      for (int j = 0; j < price_limit; ++j) {
        VarState st = state_[j];
        if (st == VarState::Basic) continue;
        if (ub_[j] - lb_[j] <= 0.0) continue;  // fixed
        double d = reduced_cost(j, y);
        int dir = 0;
        if (st == VarState::AtLower && d < -opt_.opt_tol) dir = +1;
        else if (st == VarState::AtUpper && d > opt_.opt_tol) dir = -1;
        else if (st == VarState::FreeZero && std::abs(d) > opt_.opt_tol)
          dir = d < 0 ? +1 : -1;
        if (dir == 0) continue;
        if (bland) {
          q = j;
          dir_q = dir;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          q = j;
          dir_q = dir;
        }
      }
      if (q < 0) return LpStatus::Optimal;

      ftran(q, w);

      // Ratio test; the entering variable moves by theta*dir_q >= 0.
      double theta = kInf;
      int leave_row = -1;
      double leave_pivot = 0.0;
      int leave_bound = 0;  // -1: leaves at lower, +1: at upper
      const double room = ub_[q] - lb_[q];  // own-bound flip distance

      for (int i = 0; i < m_; ++i) {
        const double delta = dir_q * w[i];
        const int bj = basics_[i];
        double t, bound;
        if (delta > opt_.pivot_tol && std::isfinite(lb_[bj])) {
          t = (xb_[i] - lb_[bj]) / delta;
          bound = -1;
        } else if (delta < -opt_.pivot_tol && std::isfinite(ub_[bj])) {
          t = (xb_[i] - ub_[bj]) / delta;
          bound = +1;
        } else {
          continue;
        }
        if (t < -1e-11) t = 0.0;
        if (t < theta - 1e-12 ||
            (t < theta + 1e-12 &&
             (bland ? bj < (leave_row >= 0 ? basics_[leave_row] : n_total_)
                    : std::abs(delta) > std::abs(leave_pivot)))) {
          theta = std::max(t, 0.0);
          leave_row = i;
          leave_pivot = w[i];
          leave_bound = static_cast<int>(bound);
        }
      }

      bool bound_flip = false;
      if (std::isfinite(room) && room <= theta) {
        theta = room;
        bound_flip = true;
      }
      if (!std::isfinite(theta)) {
        return phase_ == 1 ? LpStatus::NumericalBreakdown : LpStatus::Unbounded;
      }

      if (theta <= opt_.degen_tol) {
        if (++degenerate_pivots >= opt_.bland_after) bland = true;
      }

      // Apply the step.
      if (theta != 0.0)
        for (int i = 0; i < m_; ++i) xb_[i] -= theta * dir_q * w[i];

      if (bound_flip) {
        state_[q] = dir_q > 0 ? VarState::AtUpper : VarState::AtLower;
        xval_[q] = dir_q > 0 ? ub_[q] : lb_[q];
        continue;
      }

      // Basis change.
      const int out = basics_[leave_row];
      double enter_value =
          (state_[q] == VarState::AtUpper ? ub_[q]
           : state_[q] == VarState::AtLower ? lb_[q]
                                            : 0.0) +
          theta * dir_q;
      state_[out] = leave_bound < 0 ? VarState::AtLower : VarState::AtUpper;
      xval_[out] = leave_bound < 0 ? lb_[out] : ub_[out];
      if (out >= n_cols_) {
        // An artificial that leaves never comes back.
        ub_[out] = 0.0;
        xval_[out] = 0.0;
        state_[out] = VarState::AtLower;
      }
      basics_[leave_row] = q;
      state_[q] = VarState::Basic;
      xb_[leave_row] = enter_value;

      // Product-form update of the explicit inverse.
      const double piv = leave_pivot;
      if (std::abs(piv) < opt_.pivot_tol) {
        LP_DEBUG("lp: tiny pivot %g at iter %ld, refactorizing\n", piv, *iters);
        if (!refactorize()) {
          LP_DEBUG("lp: refactorization failed\n");
          return LpStatus::NumericalBreakdown;
        }
        continue;
      }
      binv_.row(leave_row) /= piv;
      for (int i = 0; i < m_; ++i) {
        if (i == leave_row) continue;
        const double f = w[i];
        if (f != 0.0) binv_.row(i) -= f * binv_.row(leave_row);
      }
    }
  }

  LpOptions opt_;
  bool have_basis_ = false;
  int phase_ = 1;
  int m_eq_ = 0, m_le_ = 0, m_ = 0;
  int n_struct_ = 0, n_cols_ = 0, n_total_ = 0;

  std::vector<double> cost_;
  Eigen::VectorXd b_;
  std::vector<double> row_scale_;
  std::vector<int> col_start_, row_idx_;
  std::vector<double> val_;
  std::vector<double> lb_, ub_;

  std::vector<VarState> state_;
  std::vector<double> xval_;
  std::vector<int> basics_;
  std::vector<double> art_sign_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> binv_;
  Eigen::VectorXd xb_;
};

}  // namespace detail

namespace {

LpSolution solve_with_bounds(const LpProblem& problem,
                             const Eigen::VectorXd& lb,
                             const Eigen::VectorXd& ub,
                             const LpOptions& options) {
  LpSolution sol;
  detail::Simplex simplex(problem, lb, ub, options);
  long iters = 0;
  sol.status = simplex.run(problem.c, problem.sense == LpSense::Minimize,
                           &sol.x, &sol.objective_value, &iters);
  sol.iterations = iters;
  if (sol.status != LpStatus::Optimal)
    sol.objective_value = std::numeric_limits<double>::quiet_NaN();
  return sol;
}

}  // namespace

LpObjectiveSweep::LpObjectiveSweep(const LpProblem& problem,
                                   const LpOptions& options)
    : impl_(std::make_unique<detail::Simplex>(problem, problem.lower,
                                              problem.upper, options)) {}

LpObjectiveSweep::~LpObjectiveSweep() = default;
LpObjectiveSweep::LpObjectiveSweep(LpObjectiveSweep&&) noexcept = default;
LpObjectiveSweep& LpObjectiveSweep::operator=(LpObjectiveSweep&&) noexcept =
    default;

LpSolution LpObjectiveSweep::solve(const Eigen::VectorXd& c, LpSense sense) {
  LpSolution sol;
  long iters = 0;
  sol.status = impl_->run(c, sense == LpSense::Minimize, &sol.x,
                          &sol.objective_value, &iters);
  sol.iterations = iters;
  if (sol.status != LpStatus::Optimal)
    sol.objective_value = std::numeric_limits<double>::quiet_NaN();
  return sol;
}

LpProblem LpProblem::make(int n_vars) {
  LpProblem p;
  p.c = Eigen::VectorXd::Zero(n_vars);
  p.a_eq.resize(0, n_vars);
  p.b_eq.resize(0);
  p.a_le.resize(0, n_vars);
  p.b_le.resize(0);
  p.lower = Eigen::VectorXd::Constant(n_vars, -kInf);
  p.upper = Eigen::VectorXd::Constant(n_vars, kInf);
  return p;
}

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::NumericalBreakdown: return "numerical_breakdown";
    case LpStatus::NodeLimitExceeded: return "node_limit_exceeded";
  }
  return "unknown";
}

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options) {
  return solve_with_bounds(problem, problem.lower, problem.upper, options);
}

LpSolution solve_milp(const LpProblem& problem, const LpOptions& options) {
  if (problem.binary_mask.empty()) return solve_lp(problem, options);

  const bool maximize = problem.sense == LpSense::Maximize;
  const double worst = maximize ? -kInf : kInf;

  Eigen::VectorXd lb = problem.lower, ub = problem.upper;
  for (int j : problem.binary_mask) {
    lb[j] = std::max(lb[j], 0.0);
    ub[j] = std::min(ub[j], 1.0);
  }

  struct Node {
    double bound;
    long id;
    std::vector<std::pair<int, int>> fixes;  // (variable, 0/1)
  };
  auto better = [&](double a, double b) { return maximize ? a > b : a < b; };
  auto node_order = [&](const Node& a, const Node& b) {
    if (a.bound != b.bound) return better(b.bound, a.bound);
    return a.id > b.id;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(node_order)> open(
      node_order);

  LpSolution best;
  best.status = LpStatus::Infeasible;
  best.objective_value = worst;
  bool have_incumbent = false;
  long nodes = 0;
  long total_iters = 0;

  open.push(Node{maximize ? kInf : -kInf, 0, {}});
  long next_id = 1;
  bool node_limit_hit = false;
  bool root_unbounded = false;
  bool breakdown = false;

  Eigen::VectorXd nlb(lb.size()), nub(ub.size());
  while (!open.empty()) {
    Node node = open.top();
    open.pop();

    if (have_incumbent) {
      const double gap = std::abs(node.bound - best.objective_value);
      if (!better(node.bound, best.objective_value) ||
          gap <= options.gap_tol * std::max(1.0, std::abs(best.objective_value)))
        continue;
    }
    if (++nodes > options.node_limit) {
      node_limit_hit = true;
      break;
    }

    nlb = lb;
    nub = ub;
    for (auto [var, valb] : node.fixes) {
      nlb[var] = valb;
      nub[var] = valb;
    }
    LpSolution rel = solve_with_bounds(problem, nlb, nub, options);
    total_iters += rel.iterations;
    LP_DEBUG("milp node %ld: depth=%zu status=%s obj=%.6f bound=%.6f\n",
             nodes, node.fixes.size(), to_string(rel.status).c_str(),
             rel.objective_value, node.bound);
    if (rel.status == LpStatus::Infeasible) continue;
    if (rel.status == LpStatus::Unbounded) {
      if (node.fixes.empty()) root_unbounded = true;
      break;
    }
    if (rel.status != LpStatus::Optimal) {
      breakdown = true;
      continue;
    }
    if (have_incumbent && !better(rel.objective_value, best.objective_value))
      continue;

    // Most fractional binary, lowest index on ties.
    int branch_var = -1;
    double most_frac = options.integrality_tol;
    for (int j : problem.binary_mask) {
      double f = std::abs(rel.x[j] - std::round(rel.x[j]));
      if (f > most_frac + 1e-15) {
        most_frac = f;
        branch_var = j;
      }
    }
    if (branch_var < 0) {
      // Integral within tolerance. Big-M rows can leak through sub-tolerance
      // fractionality, so pin every binary and re-solve; the polished value
      // is the certified one.
      for (int j : problem.binary_mask) {
        const double v = std::round(rel.x[j]);
        nlb[j] = v;
        nub[j] = v;
      }
      LpSolution polished = solve_with_bounds(problem, nlb, nub, options);
      total_iters += polished.iterations;
      if (polished.status == LpStatus::Optimal) {
        for (int j : problem.binary_mask)
          polished.x[j] = std::round(polished.x[j]);
        if (!have_incumbent ||
            better(polished.objective_value, best.objective_value)) {
          best = polished;
          have_incumbent = true;
        }
        const double leak =
            std::abs(rel.objective_value - polished.objective_value);
        if (leak <= options.gap_tol *
                        std::max(1.0, std::abs(polished.objective_value)))
          continue;  // relaxation met the integral point: fathomed
      }
      // Material leak (or pinned infeasibility): keep splitting on the most
      // fractional binary below tolerance.
      double f_max = 1e-12;
      for (int j : problem.binary_mask) {
        double f = std::abs(rel.x[j] - std::round(rel.x[j]));
        if (f > f_max) {
          f_max = f;
          branch_var = j;
        }
      }
      if (branch_var < 0) continue;  // exactly integral: nothing to split
    }
    for (int v = 0; v <= 1; ++v) {
      Node child{rel.objective_value, next_id++, node.fixes};
      child.fixes.emplace_back(branch_var, v);
      open.push(std::move(child));
    }
  }

  if (root_unbounded) {
    best.status = LpStatus::Unbounded;
    best.objective_value = std::numeric_limits<double>::quiet_NaN();
  } else if (have_incumbent) {
    best.status = node_limit_hit ? LpStatus::NodeLimitExceeded : LpStatus::Optimal;
  } else {
    best.status = node_limit_hit ? LpStatus::NodeLimitExceeded
                  : breakdown    ? LpStatus::NumericalBreakdown
                                 : LpStatus::Infeasible;
    best.objective_value = std::numeric_limits<double>::quiet_NaN();
  }
  best.nodes = nodes;
  best.iterations = total_iters;
  return best;
}

void write_lp_format(const LpProblem& problem, std::ostream& out) {
  auto var = [](int j) { return "x" + std::to_string(j + 1); };
  auto term = [&](double coef, int j, bool first) {
    std::string s;
    if (coef >= 0 && !first) s += " + ";
    if (coef < 0) s += first ? "-" : " - ";
    s += std::to_string(std::abs(coef)) + " " + var(j);
    return s;
  };
  out << (problem.sense == LpSense::Maximize ? "Maximize" : "Minimize") << "\n obj:";
  bool first = true;
  for (int j = 0; j < problem.num_vars(); ++j) {
    if (problem.c[j] == 0.0) continue;
    out << " " << term(problem.c[j], j, first);
    first = false;
  }
  if (first) out << " 0 " << var(0);
  out << "\nSubject To\n";
  int cidx = 0;
  auto emit_row = [&](const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                      int i, const char* rel) {
    out << " c" << ++cidx << ":";
    bool f = true;
    for (int j = 0; j < problem.num_vars(); ++j) {
      if (a(i, j) == 0.0) continue;
      out << " " << term(a(i, j), j, f);
      f = false;
    }
    if (f) out << " 0 " << var(0);
    out << " " << rel << " " << b[i] << "\n";
  };
  for (int i = 0; i < problem.b_eq.size(); ++i) emit_row(problem.a_eq, problem.b_eq, i, "=");
  for (int i = 0; i < problem.b_le.size(); ++i) emit_row(problem.a_le, problem.b_le, i, "<=");
  out << "Bounds\n";
  for (int j = 0; j < problem.num_vars(); ++j) {
    const double lo = problem.lower[j], hi = problem.upper[j];
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      out << " " << var(j) << " free\n";
    } else if (!std::isfinite(hi)) {
      out << " " << var(j) << " >= " << lo << "\n";
    } else if (!std::isfinite(lo)) {
      out << " " << var(j) << " <= " << hi << "\n";
    } else {
      out << " " << lo << " <= " << var(j) << " <= " << hi << "\n";
    }
  }
  if (!problem.binary_mask.empty()) {
    out << "Binaries\n";
    for (int j : problem.binary_mask) out << " " << var(j) << "\n";
  }
  out << "End\n";
}

}  // namespace robsens
