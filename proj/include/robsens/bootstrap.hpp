#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "robsens/bounds.hpp"
#include "robsens/dataset.hpp"
#include "robsens/rng.hpp"
#include "robsens/whole.hpp"

namespace robsens {

enum class ModelKind { Separate, Whole };

struct BootstrapConfig {
  int replicates = 1000;  // B
  double alpha = 0.0125;  // per-side tail level
  double zeta = 0.025;    // prediction-set level
  std::uint64_t seed = 0;
  int threads = 0;  // 0: all hardware threads
  ModelKind mode = ModelKind::Separate;
  BoundsMode relaxation = BoundsMode::RelaxedLp;
  double max_failure_fraction = 0.2;

  void validate() const;
};

struct CellQuantile {
  std::pair<int, int> cell;
  double l_alpha = 0.0;
  double u_alpha = 0.0;
};

struct CiResult {
  BoundsResult point_bounds;  // original sample, uninflated parameters
  std::vector<double> draws_min;
  std::vector<double> draws_max;
  double l_alpha = 0.0;
  double u_alpha = 0.0;
  // effective inflated deltas: separate model fills the pair, whole fills
  // the pooled one
  double delta_inflated_1 = 0.0;
  double delta_inflated_0 = 0.0;
  double delta_inflated = 0.0;
  int infeasible_count = 0;
  int infeasible_cells = 0;  // whole model only
  // whole model: decomposed bounds and the per-cell quantiles behind them
  std::vector<CellQuantile> per_cell;
  double l_alpha_sharper = 0.0;
  double u_alpha_sharper = 0.0;
};

/// Exact multinomial(n; 1/n,...,1/n) by n uniform index draws.
std::vector<int> draw_multinomial(int n, Rng& rng);

/// Smallest m with P(Binomial(n,p) <= m) >= level, by stable log-space CDF
/// accumulation.
int binomial_quantile(int n, double p, double level);

/// Separate model: delta_z' = q_z / n_z with q_z the sqrt(1-zeta) binomial
/// quantile. The lambda gap is left untouched.
SensitivityParams inflate_delta(const SensitivityParams& params, int n1,
                                int n0, double zeta);

/// Whole-population model: delta' = q / n with q the (1-zeta) quantile.
WholeParams inflate_delta(const WholeParams& params, int n, double zeta);

/// Order-statistic quantile: the draw of rank max(1, ceil(level * B)),
/// ascending, infinities included.
double empirical_quantile(const std::vector<double>& draws, double level);

/// Augmented percentile bootstrap for the separate-group model: B multinomial
/// replicates, per-replicate propensity refit, bound solves at the inflated
/// (Lambda', delta'), and quantile extraction. Failed or infeasible
/// replicates enter the draws as -inf/+inf and are counted; more than
/// max_failure_fraction of them aborts.
CiResult run_ci(const Dataset& dataset, const SensitivityParams& params,
                const BootstrapConfig& config);

/// Whole-population variant: per replicate the allocation-grid envelope, plus
/// per-cell draws feeding the decomposed (sharper) bounds.
CiResult run_ci(const Dataset& dataset, const WholeParams& params,
                const BootstrapConfig& config);

}  // namespace robsens
