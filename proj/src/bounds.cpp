#include "robsens/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "robsens/errors.hpp"
#include "robsens/logistic.hpp"

namespace robsens {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

void SensitivityParams::validate() const {
  if (!(lambda1 >= 1.0) || !(lambda0 >= 1.0))
    throw ConfigError("lambda must be >= 1");
  if (!(delta1 >= 0.0 && delta1 <= 1.0) || !(delta0 >= 0.0 && delta0 <= 1.0))
    throw ConfigError("delta must be in [0,1]");
  if (!(lambda_gap >= 0.0)) throw ConfigError("lambda gap must be >= 0");
}

int ceil_count(int n, double frac) {
  const double v = static_cast<double>(n) * frac;
  int c = static_cast<int>(std::ceil(v - 1e-9));
  return std::clamp(c, 0, n);
}

double adjust_propensity(double e_hat, double psi) {
  if (!(e_hat > 0.0 && e_hat < 1.0))
    throw BoundaryInputError("adjust_propensity: e_hat must be interior");
  if (psi == kInf) return 1.0;
  if (psi == -kInf) return 0.0;
  return sigmoid(psi + logit(e_hat));
}

UnitBox unit_box(double e_hat, int z, double lambda) {
  if (!(lambda >= 1.0)) throw ConfigError("unit_box: lambda must be >= 1");
  if (!(e_hat > 0.0 && e_hat < 1.0))
    throw BoundaryInputError("unit_box: e_hat must be interior");
  const double log_lambda = std::log(lambda);
  const double e_under = adjust_propensity(e_hat, -log_lambda);
  const double e_over = adjust_propensity(e_hat, log_lambda);
  if (z == 1) return {1.0 - e_over, 1.0 - e_under};
  return {e_under, e_over};
}

double hajek(const std::vector<double>& omega, const std::vector<double>& y,
             const std::vector<int>& z, const std::vector<int>& k) {
  const size_t n = y.size();
  if (omega.size() != n || z.size() != n || (!k.empty() && k.size() != n))
    throw DimensionMismatchError("hajek: input length mismatch");
  double num1 = 0, den1 = 0, num0 = 0, den0 = 0;
  for (size_t i = 0; i < n; ++i) {
    const double w = (k.empty() ? 1.0 : k[i]) * omega[i];
    if (z[i] == 1) {
      num1 += w * y[i];
      den1 += w;
    } else {
      num0 += w * y[i];
      den0 += w;
    }
  }
  if (den1 <= 0.0 || den0 <= 0.0)
    throw ZeroMassError("hajek: a treatment arm has zero total weight");
  return num1 / den1 - num0 / den0;
}

BoundsProblem make_bounds_problem(const Dataset& dataset,
                                  const Eigen::VectorXd& fitted,
                                  const SensitivityParams& params,
                                  const std::vector<int>& k) {
  params.validate();
  const int n = dataset.n();
  if (fitted.size() != n)
    throw DimensionMismatchError("make_bounds_problem: fitted length");
  BoundsProblem p;
  p.n1 = dataset.n1();
  p.n0 = dataset.n0();
  p.y.resize(n);
  for (int i = 0; i < n; ++i) p.y[i] = dataset.y()[i];
  p.g = dataset.has_designs() ? dataset.g_design() : Eigen::MatrixXd(n, 0);
  p.k = k.empty() ? std::vector<int>(n, 1) : k;
  if (static_cast<int>(p.k.size()) != n)
    throw DimensionMismatchError("make_bounds_problem: k length");
  p.boxes.resize(n);
  for (int i = 0; i < n; ++i) {
    const int z = dataset.z()[i];
    p.boxes[i] = unit_box(fitted[i], z, z == 1 ? params.lambda1 : params.lambda0);
  }
  p.budget1 = ceil_count(p.n1, 1.0 - params.delta1);
  p.budget0 = ceil_count(p.n0, 1.0 - params.delta0);
  return p;
}

namespace {

double glover_big_m(const BoundsProblem& p) {
  // M has to dominate t_z = 1/sum(k omega); the smallest positive box floor
  // among sampled units times the smaller budget gives the scale.
  double a_min = kInf;
  for (int i = 0; i < p.n(); ++i)
    if (p.k[i] > 0 && p.boxes[i].a_low > 0)
      a_min = std::min(a_min, p.boxes[i].a_low);
  const int budget_min = std::max(1, std::min(p.budget1, p.budget0));
  double m = 1e6;
  if (std::isfinite(a_min)) m = std::max(1.0 / (a_min * budget_min), 1e6);
  return std::min(m, 1e9);
}

}  // namespace

// Template layout (documented for the structure tests):
//   variables: omega_bar 0..n-1, delta_bar n..2n-1, t1 = 2n, t0 = 2n+1,
//              binaries 2n+2..3n+1 in MILP mode;
//   eq rows:   treated normalization, control normalization, balance columns;
//   le rows:   per-unit box pairs (lower, upper), the two counting rows,
//              then the per-unit cap rows (relaxed) or Glover rows (MILP).
LpProblem build_charnes_cooper(const BoundsProblem& problem, LpSense sense,
                               BoundsMode mode) {
  const int n = problem.n();
  const int n1 = problem.n1;
  const int dim_g = static_cast<int>(problem.g.cols());
  const bool milp = mode == BoundsMode::Milp;
  const int n_vars = 2 * n + 2 + (milp ? n : 0);
  const int t1 = 2 * n;
  const int t0 = 2 * n + 1;
  auto tz = [&](int i) { return problem.treated(i) ? t1 : t0; };

  LpProblem lp = LpProblem::make(n_vars);
  lp.sense = sense;
  lp.lower.setZero();
  for (int i = 0; i < n; ++i)
    lp.c[i] = problem.treated(i) ? problem.y[i] : -problem.y[i];

  lp.a_eq = Eigen::MatrixXd::Zero(2 + dim_g, n_vars);
  lp.b_eq.resize(2 + dim_g);
  for (int i = 0; i < n; ++i) {
    lp.a_eq(problem.treated(i) ? 0 : 1, i) = 1.0;
    for (int j = 0; j < dim_g; ++j)
      lp.a_eq(2 + j, i) = problem.treated(i) ? problem.g(i, j) : -problem.g(i, j);
  }
  lp.b_eq << 1.0, 1.0, Eigen::VectorXd::Zero(dim_g);

  const int n_le = 2 * n + 2 + (milp ? 3 * n : n);
  lp.a_le = Eigen::MatrixXd::Zero(n_le, n_vars);
  lp.b_le = Eigen::VectorXd::Zero(n_le);
  int r = 0;
  for (int i = 0; i < n; ++i) {
    const double k = problem.k[i];
    const UnitBox& box = problem.boxes[i];
    // k a_low delta_bar - omega_bar <= 0
    lp.a_le(r, n + i) = k * box.a_low;
    lp.a_le(r, i) = -1.0;
    ++r;
    // omega_bar - k t_z + k (1 - a_up) delta_bar <= 0
    lp.a_le(r, i) = 1.0;
    lp.a_le(r, tz(i)) = -k;
    lp.a_le(r, n + i) = k * (1.0 - box.a_up);
    ++r;
  }
  // budget_z t_z - sum delta_bar <= 0
  lp.a_le(r, t1) = problem.budget1;
  for (int i = 0; i < n1; ++i) lp.a_le(r, n + i) = -1.0;
  ++r;
  lp.a_le(r, t0) = problem.budget0;
  for (int i = n1; i < n; ++i) lp.a_le(r, n + i) = -1.0;
  ++r;

  if (!milp) {
    for (int i = 0; i < n; ++i) {
      lp.a_le(r, n + i) = 1.0;
      lp.a_le(r, tz(i)) = -1.0;
      ++r;
    }
  } else {
    const double big_m = glover_big_m(problem);
    for (int i = 0; i < n; ++i) {
      const int bin = 2 * n + 2 + i;
      lp.upper[bin] = 1.0;
      lp.binary_mask.push_back(bin);
      // delta_bar <= M * indicator
      lp.a_le(r, n + i) = 1.0;
      lp.a_le(r, bin) = -big_m;
      ++r;
      // t_z - M (1 - indicator) <= delta_bar
      lp.a_le(r, tz(i)) = 1.0;
      lp.a_le(r, n + i) = -1.0;
      lp.a_le(r, bin) = big_m;
      lp.b_le[r] = big_m;
      ++r;
      // delta_bar <= t_z
      lp.a_le(r, n + i) = 1.0;
      lp.a_le(r, tz(i)) = -1.0;
      ++r;
    }
  }
  return lp;
}

LpProblem build_charnes_cooper_fixed(const BoundsProblem& problem,
                                     LpSense sense,
                                     const std::vector<int>& delta) {
  const int n = problem.n();
  if (static_cast<int>(delta.size()) != n)
    throw DimensionMismatchError("fixed delta length mismatch");
  const int dim_g = static_cast<int>(problem.g.cols());
  const int n_vars = n + 2;
  const int t1 = n, t0 = n + 1;
  auto tz = [&](int i) { return problem.treated(i) ? t1 : t0; };

  LpProblem lp = LpProblem::make(n_vars);
  lp.sense = sense;
  lp.lower.setZero();
  for (int i = 0; i < n; ++i)
    lp.c[i] = problem.treated(i) ? problem.y[i] : -problem.y[i];

  lp.a_eq = Eigen::MatrixXd::Zero(2 + dim_g, n_vars);
  lp.b_eq.resize(2 + dim_g);
  for (int i = 0; i < n; ++i) {
    lp.a_eq(problem.treated(i) ? 0 : 1, i) = 1.0;
    for (int j = 0; j < dim_g; ++j)
      lp.a_eq(2 + j, i) = problem.treated(i) ? problem.g(i, j) : -problem.g(i, j);
  }
  lp.b_eq << 1.0, 1.0, Eigen::VectorXd::Zero(dim_g);

  lp.a_le = Eigen::MatrixXd::Zero(2 * n + 2, n_vars);
  lp.b_le = Eigen::VectorXd::Zero(2 * n + 2);
  int r = 0;
  int on1 = 0, on0 = 0;
  for (int i = 0; i < n; ++i) {
    const double k = problem.k[i];
    const UnitBox& box = problem.boxes[i];
    const int d = delta[i];
    if (d != 0 && d != 1) throw ConfigError("fixed delta must be 0/1");
    (problem.treated(i) ? on1 : on0) += d;
    // k a_low d t_z <= omega_bar
    lp.a_le(r, tz(i)) = k * box.a_low * d;
    lp.a_le(r, i) = -1.0;
    ++r;
    // omega_bar <= k (1 - (1 - a_up) d) t_z
    lp.a_le(r, i) = 1.0;
    lp.a_le(r, tz(i)) = -k * (1.0 - (1.0 - box.a_up) * d);
    ++r;
  }
  // counting reduces to a sign condition on t_z
  lp.a_le(r, t1) = problem.budget1 - on1;
  ++r;
  lp.a_le(r, t0) = problem.budget0 - on0;
  ++r;
  return lp;
}

namespace {

struct ReducedProblem {
  std::vector<int> unit;  // reduced index -> original index
  int n1_eff = 0;
  int n0_eff = 0;
  int budget1_eff = 0;
  int budget0_eff = 0;
  bool forced1 = false;  // budget saturates the arm: indicators pinned on
  bool forced0 = false;
};

ReducedProblem reduce(const BoundsProblem& p) {
  ReducedProblem r;
  int dropped1 = 0, dropped0 = 0;
  for (int i = 0; i < p.n(); ++i) {
    if (p.k[i] > 0) {
      r.unit.push_back(i);
      (p.treated(i) ? r.n1_eff : r.n0_eff) += 1;
    } else {
      (p.treated(i) ? dropped1 : dropped0) += 1;
    }
  }
  // Unsampled units cost nothing, so their indicators are turned on and
  // absorb budget; the counting constraint still ranges over all n units.
  r.budget1_eff = std::max(0, p.budget1 - dropped1);
  r.budget0_eff = std::max(0, p.budget0 - dropped0);
  r.forced1 = r.budget1_eff >= r.n1_eff;
  r.forced0 = r.budget0_eff >= r.n0_eff;
  return r;
}

struct ReducedLayout {
  std::vector<int> dvar;  // reduced unit -> delta variable index or -1
  int t1 = -1;
  int t0 = -1;
};

/// LP over the sampled units only. Arms whose effective budget pins every
/// indicator at t_z are built without delta variables.
LpProblem build_reduced(const BoundsProblem& p, const ReducedProblem& red,
                        LpSense sense, BoundsMode mode, ReducedLayout* layout) {
  const int ne = static_cast<int>(red.unit.size());
  const int dim_g = static_cast<int>(p.g.cols());
  const bool milp = mode == BoundsMode::Milp;

  std::vector<int> dvar(ne, -1);
  int n_free = 0;
  for (int u = 0; u < ne; ++u) {
    const bool tr = p.treated(red.unit[u]);
    if ((tr && !red.forced1) || (!tr && !red.forced0)) dvar[u] = ne + n_free++;
  }
  const int t1 = ne + n_free;
  const int t0 = t1 + 1;
  int n_vars = t0 + 1;
  std::vector<int> bvar(ne, -1);
  if (milp)
    for (int u = 0; u < ne; ++u)
      if (dvar[u] >= 0) bvar[u] = n_vars++;
  if (layout) *layout = ReducedLayout{dvar, t1, t0};

  LpProblem lp = LpProblem::make(n_vars);
  lp.sense = sense;
  lp.lower.setZero();

  int rows_le = 0;
  for (int u = 0; u < ne; ++u)
    rows_le += dvar[u] >= 0 ? (milp ? 5 : 3) : 2;
  rows_le += (red.forced1 ? 0 : 1) + (red.forced0 ? 0 : 1);
  lp.a_le = Eigen::MatrixXd::Zero(rows_le, n_vars);
  lp.b_le = Eigen::VectorXd::Zero(rows_le);
  lp.a_eq = Eigen::MatrixXd::Zero(2 + dim_g, n_vars);
  lp.b_eq.resize(2 + dim_g);
  lp.b_eq << 1.0, 1.0, Eigen::VectorXd::Zero(dim_g);

  const double big_m = milp ? glover_big_m(p) : 0.0;
  int r = 0;
  for (int u = 0; u < ne; ++u) {
    const int i = red.unit[u];
    const bool tr = p.treated(i);
    const int tzi = tr ? t1 : t0;
    const double k = p.k[i];
    const UnitBox& box = p.boxes[i];

    lp.c[u] = tr ? p.y[i] : -p.y[i];
    lp.a_eq(tr ? 0 : 1, u) = 1.0;
    for (int j = 0; j < dim_g; ++j)
      lp.a_eq(2 + j, u) = tr ? p.g(i, j) : -p.g(i, j);

    if (dvar[u] < 0) {
      // indicator pinned on: k a_low t_z <= omega_bar <= k a_up t_z
      lp.a_le(r, tzi) = k * box.a_low;
      lp.a_le(r, u) = -1.0;
      ++r;
      lp.a_le(r, u) = 1.0;
      lp.a_le(r, tzi) = -k * box.a_up;
      ++r;
    } else {
      const int d = dvar[u];
      lp.a_le(r, d) = k * box.a_low;
      lp.a_le(r, u) = -1.0;
      ++r;
      lp.a_le(r, u) = 1.0;
      lp.a_le(r, tzi) = -k;
      lp.a_le(r, d) = k * (1.0 - box.a_up);
      ++r;
      if (!milp) {
        lp.a_le(r, d) = 1.0;
        lp.a_le(r, tzi) = -1.0;
        ++r;
      } else {
        const int b = bvar[u];
        lp.upper[b] = 1.0;
        lp.binary_mask.push_back(b);
        lp.a_le(r, d) = 1.0;
        lp.a_le(r, b) = -big_m;
        ++r;
        lp.a_le(r, tzi) = 1.0;
        lp.a_le(r, d) = -1.0;
        lp.a_le(r, b) = big_m;
        lp.b_le[r] = big_m;
        ++r;
        lp.a_le(r, d) = 1.0;
        lp.a_le(r, tzi) = -1.0;
        ++r;
      }
    }
  }
  if (!red.forced1) {
    lp.a_le(r, t1) = red.budget1_eff;
    for (int u = 0; u < ne; ++u)
      if (p.treated(red.unit[u]) && dvar[u] >= 0) lp.a_le(r, dvar[u]) = -1.0;
    ++r;
  }
  if (!red.forced0) {
    lp.a_le(r, t0) = red.budget0_eff;
    for (int u = 0; u < ne; ++u)
      if (!p.treated(red.unit[u]) && dvar[u] >= 0) lp.a_le(r, dvar[u]) = -1.0;
    ++r;
  }
  return lp;
}

bool degenerate_boxes(const BoundsProblem& p, const ReducedProblem& red) {
  for (int u : red.unit)
    if (p.boxes[u].a_up - p.boxes[u].a_low > 1e-15) return false;
  return true;
}

struct PqLayout {
  std::vector<int> pvar, qvar;  // reduced unit -> variable index (-1: none)
  int t1 = -1;
  int t0 = -1;
};

/// Substituted form of the relaxed Charnes-Cooper program. With
///   p = omega_bar - k a_low delta_bar,
///   q = k t_z - omega_bar - k (1 - a_up) delta_bar,
/// the box rows become the sign constraints p, q >= 0 and each unit needs
/// only the two rows p+q <= k t_z (delta_bar >= 0) and
/// p+q >= k (a_up - a_low) t_z (delta_bar <= t_z). Requires
/// D = 1 + a_low - a_up bounded away from zero.
LpProblem build_reduced_pq(const BoundsProblem& p, const ReducedProblem& red,
                           PqLayout* layout) {
  const int ne = static_cast<int>(red.unit.size());
  const int dim_g = static_cast<int>(p.g.cols());

  PqLayout lay;
  lay.pvar.assign(ne, -1);
  lay.qvar.assign(ne, -1);
  int nv = 0;
  for (int u = 0; u < ne; ++u) {
    const bool tr = p.treated(red.unit[u]);
    const bool forced = tr ? red.forced1 : red.forced0;
    lay.pvar[u] = nv++;
    if (!forced) lay.qvar[u] = nv++;
  }
  lay.t1 = nv++;
  lay.t0 = nv++;

  LpProblem lp = LpProblem::make(nv);
  lp.lower.setZero();

  int rows_le = (red.forced1 ? 0 : 1) + (red.forced0 ? 0 : 1);
  for (int u = 0; u < ne; ++u) {
    const UnitBox& box = p.boxes[red.unit[u]];
    const bool slim = box.a_up - box.a_low <= 1e-15;
    if (lay.qvar[u] < 0)
      rows_le += slim ? 0 : 1;
    else
      rows_le += slim ? 1 : 2;
  }
  lp.a_le = Eigen::MatrixXd::Zero(rows_le, nv);
  lp.b_le = Eigen::VectorXd::Zero(rows_le);
  lp.a_eq = Eigen::MatrixXd::Zero(2 + dim_g, nv);
  lp.b_eq.resize(2 + dim_g);
  lp.b_eq << 1.0, 1.0, Eigen::VectorXd::Zero(dim_g);

  int r = 0;
  double count_t1 = red.budget1_eff, count_t0 = red.budget0_eff;
  const int count_row1 = red.forced1 ? -1 : rows_le - (red.forced0 ? 1 : 2);
  const int count_row0 = red.forced0 ? -1 : rows_le - 1;

  for (int u = 0; u < ne; ++u) {
    const int i = red.unit[u];
    const bool tr = p.treated(i);
    const int tz = tr ? lay.t1 : lay.t0;
    const double k = p.k[i];
    const UnitBox& box = p.boxes[i];
    const double width = box.a_up - box.a_low;
    const double sign = tr ? 1.0 : -1.0;
    const int pv = lay.pvar[u];
    const int qv = lay.qvar[u];

    // omega_bar expressed in (p, q, t): cp * p + cq * q + ct * t_z
    double cp, cq, ct;
    if (qv < 0) {
      // forced indicator: omega_bar = p + k a_low t_z, p <= k width t_z
      cp = 1.0;
      cq = 0.0;
      ct = k * box.a_low;
      if (width <= 1e-15) {
        lp.upper[pv] = 0.0;
      } else {
        lp.a_le(r, pv) = 1.0;
        lp.a_le(r, tz) = -k * width;
        ++r;
      }
    } else {
      const double d = 1.0 + box.a_low - box.a_up;
      const double phi = box.a_low / d;
      cp = 1.0 - phi;
      cq = -phi;
      ct = k * phi;
      lp.a_le(r, pv) = 1.0;
      lp.a_le(r, qv) = 1.0;
      lp.a_le(r, tz) = -k;
      ++r;
      if (width > 1e-15) {
        lp.a_le(r, tz) = k * width;
        lp.a_le(r, pv) = -1.0;
        lp.a_le(r, qv) = -1.0;
        ++r;
      }
      // counting: sum (k t - p - q) / (k d) >= budget t
      const int crow = tr ? count_row1 : count_row0;
      if (crow >= 0) {
        lp.a_le(crow, pv) += 1.0 / (k * d);
        lp.a_le(crow, qv) += 1.0 / (k * d);
        (tr ? count_t1 : count_t0) -= 1.0 / d;
      }
    }

    lp.c[pv] += sign * p.y[i] * cp;
    if (qv >= 0) lp.c[qv] += sign * p.y[i] * cq;
    lp.c[tz] += sign * p.y[i] * ct;

    lp.a_eq(tr ? 0 : 1, pv) += cp;
    if (qv >= 0) lp.a_eq(tr ? 0 : 1, qv) += cq;
    lp.a_eq(tr ? 0 : 1, tz) += ct;
    for (int j = 0; j < dim_g; ++j) {
      const double gj = sign * p.g(i, j);
      lp.a_eq(2 + j, pv) += gj * cp;
      if (qv >= 0) lp.a_eq(2 + j, qv) += gj * cq;
      lp.a_eq(2 + j, tz) += gj * ct;
    }
  }
  if (count_row1 >= 0) lp.a_le(count_row1, lay.t1) = count_t1;
  if (count_row0 >= 0) lp.a_le(count_row0, lay.t0) = count_t0;

  if (layout) *layout = std::move(lay);
  return lp;
}

bool pq_applicable(const BoundsProblem& p, const ReducedProblem& red) {
  for (int i : red.unit)
    if (1.0 + p.boxes[i].a_low - p.boxes[i].a_up < 1e-9) return false;
  return true;
}

}  // namespace

BoundsResult solve_bounds(const BoundsProblem& problem, BoundsMode mode,
                          BoundsSolveDetail* detail_min,
                          BoundsSolveDetail* detail_max) {
  BoundsResult out;
  const ReducedProblem red = reduce(problem);
  BoundsSolveDetail* details[2] = {detail_min, detail_max};
  for (auto* d : details)
    if (d) *d = BoundsSolveDetail{};
  if (red.n1_eff == 0 || red.n0_eff == 0) {
    out.status = BoundsStatus::Infeasible;
    out.tau_min = out.tau_max = kNaN;
    return out;
  }

  if (red.forced1 && red.forced0 && degenerate_boxes(problem, red)) {
    // Point boxes and a saturated budget leave a single candidate weight
    // vector; only the balance system can fail.
    double den1 = 0, den0 = 0;
    for (int i : red.unit) {
      const double w = problem.k[i] * problem.boxes[i].a_low;
      (problem.treated(i) ? den1 : den0) += w;
    }
    if (den1 <= 0 || den0 <= 0) {
      out.status = BoundsStatus::Infeasible;
      out.tau_min = out.tau_max = kNaN;
      return out;
    }
    double value = 0;
    Eigen::VectorXd balance = Eigen::VectorXd::Zero(problem.g.cols());
    for (int i : red.unit) {
      const double k = problem.k[i];
      const double a = problem.boxes[i].a_low;
      if (problem.treated(i)) {
        value += k * a / den1 * problem.y[i];
        balance += k * a / den1 * problem.g.row(i).transpose();
      } else {
        value -= k * a / den0 * problem.y[i];
        balance -= k * a / den0 * problem.g.row(i).transpose();
      }
    }
    for (int j = 0; j < problem.g.cols(); ++j) {
      const double scale = std::max(problem.g.col(j).cwiseAbs().maxCoeff(), 1e-12);
      if (std::abs(balance[j]) / scale > 1e-8) {
        out.status = BoundsStatus::Infeasible;
        out.tau_min = out.tau_max = kNaN;
        return out;
      }
    }
    out.tau_min = out.tau_max = value;
    out.status = BoundsStatus::Exact;
    for (auto* d : details)
      if (d) {
        d->valid = true;
        d->delta_frac.assign(problem.n(), 1.0);
        d->t1 = 1.0 / den1;
        d->t0 = 1.0 / den0;
      }
    return out;
  }

  const bool use_pq =
      mode == BoundsMode::RelaxedLp && pq_applicable(problem, red);
  ReducedLayout layout;
  PqLayout pq_layout;
  LpProblem lp = use_pq ? build_reduced_pq(problem, red, &pq_layout)
                        : build_reduced(problem, red, LpSense::Minimize, mode,
                                        &layout);
  // min and max share the constraint system; the relaxed path re-solves the
  // second sense from the first's basis.
  std::optional<LpObjectiveSweep> sweep;
  if (mode == BoundsMode::RelaxedLp) sweep.emplace(lp);

  double vals[2];
  for (int s = 0; s < 2; ++s) {
    const LpSense sense = s == 0 ? LpSense::Minimize : LpSense::Maximize;
    lp.sense = sense;
    LpSolution sol =
        mode == BoundsMode::Milp ? solve_milp(lp) : sweep->solve(lp.c, sense);
    out.stats.lp_iterations += sol.iterations;
    out.stats.nodes += sol.nodes;
    ++out.stats.solves;
    switch (sol.status) {
      case LpStatus::Optimal:
        vals[s] = sol.objective_value;
        if (details[s]) {
          BoundsSolveDetail& d = *details[s];
          d.valid = true;
          d.delta_frac.assign(problem.n(), 1.0);
          if (use_pq) {
            d.t1 = sol.x[pq_layout.t1];
            d.t0 = sol.x[pq_layout.t0];
            for (size_t u = 0; u < red.unit.size(); ++u) {
              if (pq_layout.qvar[u] < 0) continue;  // forced arm: stays 1
              const int i = red.unit[u];
              const UnitBox& box = problem.boxes[i];
              const double dwidth = 1.0 + box.a_low - box.a_up;
              const double tz = problem.treated(i) ? d.t1 : d.t0;
              const double k = problem.k[i];
              if (tz <= 1e-300) continue;
              const double pq =
                  sol.x[pq_layout.pvar[u]] + sol.x[pq_layout.qvar[u]];
              d.delta_frac[i] =
                  std::clamp((k * tz - pq) / (k * dwidth * tz), 0.0, 1.0);
            }
          } else {
            d.t1 = sol.x[layout.t1];
            d.t0 = sol.x[layout.t0];
            for (size_t u = 0; u < red.unit.size(); ++u) {
              if (layout.dvar[u] < 0) continue;  // forced arm: stays 1
              const int i = red.unit[u];
              const double tz = problem.treated(i) ? d.t1 : d.t0;
              const double frac =
                  tz > 1e-300 ? sol.x[layout.dvar[u]] / tz : 1.0;
              d.delta_frac[i] = std::clamp(frac, 0.0, 1.0);
            }
          }
        }
        break;
      case LpStatus::Infeasible:
        out.status = BoundsStatus::Infeasible;
        out.tau_min = out.tau_max = kNaN;
        return out;
      case LpStatus::Unbounded:
        vals[s] = s == 0 ? -kInf : kInf;
        break;
      default:
        throw Error("solve_bounds: LP solver failed (" + to_string(sol.status) + ")");
    }
  }
  out.tau_min = vals[0];
  out.tau_max = vals[1];
  out.status = mode == BoundsMode::Milp ? BoundsStatus::Exact : BoundsStatus::Relaxed;
  return out;
}

}  // namespace robsens
