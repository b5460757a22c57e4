#pragma once

#include <Eigen/Dense>
#include <vector>

#include "robsens/dataset.hpp"

namespace robsens {

struct PropensityFit {
  Eigen::VectorXd beta;    // length 1 + dim_s
  Eigen::VectorXd fitted;  // e_hat per canonical row, strictly in (0,1)
  double loglik = 0.0;
  double grad_norm = 0.0;  // two-norm of the weighted score at beta
  int iterations = 0;
};

/// Weighted maximum-likelihood logistic fit of z on s(x) by Newton/IRLS with
/// step halving. k are nonnegative integer multiplicities (empty: all ones);
/// rows with k=0 drop out of the score but still receive fitted values.
/// Throws RankDeficientDesignError, SeparationError or NoConvergenceError.
PropensityFit fit_mle(const Dataset& dataset, const std::vector<int>& k = {},
                      const Eigen::VectorXd& beta_start = {});

double predict(const PropensityFit& fit, const Eigen::VectorXd& s_row);

/// logit^{-1}, numerically stable at large |t|.
double sigmoid(double t);
double logit(double p);

/// Weighted log-likelihood at an arbitrary beta (used by gradient checks).
double logistic_loglik(const Dataset& dataset, const std::vector<int>& k,
                       const Eigen::VectorXd& beta);

}  // namespace robsens
