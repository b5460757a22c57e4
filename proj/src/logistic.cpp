#include "robsens/logistic.hpp"

#include <cmath>

#include "robsens/errors.hpp"

namespace robsens {

double sigmoid(double t) {
  if (t == std::numeric_limits<double>::infinity()) return 1.0;
  if (t == -std::numeric_limits<double>::infinity()) return 0.0;
  if (t >= 0) {
    const double e = std::exp(-t);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

namespace {

constexpr double kScoreTol = 1e-8;
constexpr double kSeparationLogit = 30.0;
constexpr int kMaxIterations = 100;

double loglik_at(const Eigen::MatrixXd& s, const std::vector<double>& yz,
                 const std::vector<int>& k, const Eigen::VectorXd& beta) {
  const int n = static_cast<int>(yz.size());
  Eigen::VectorXd eta = s * beta;
  double ll = 0.0;
  for (int i = 0; i < n; ++i) {
    if (k[i] == 0) continue;
    // z*eta - log(1+exp(eta)), stable on both tails
    const double t = eta[i];
    const double log1pexp = t > 30 ? t : std::log1p(std::exp(t));
    ll += k[i] * (yz[i] * t - log1pexp);
  }
  return ll;
}

}  // namespace

double logistic_loglik(const Dataset& dataset, const std::vector<int>& k,
                       const Eigen::VectorXd& beta) {
  std::vector<int> kk = k.empty() ? std::vector<int>(dataset.n(), 1) : k;
  std::vector<double> z(dataset.z().begin(), dataset.z().end());
  return loglik_at(dataset.s_design(), z, kk, beta);
}

PropensityFit fit_mle(const Dataset& dataset, const std::vector<int>& k,
                      const Eigen::VectorXd& beta_start) {
  if (!dataset.has_designs())
    throw Error("fit_mle: dataset has no s design; call build_designs first");
  const Eigen::MatrixXd& s = dataset.s_design();
  const int n = dataset.n();
  const int p = static_cast<int>(s.cols());
  std::vector<int> kk = k.empty() ? std::vector<int>(n, 1) : k;
  if (static_cast<int>(kk.size()) != n)
    throw DimensionMismatchError("fit_mle: weight length mismatch");

  // Weighted design must have full column rank.
  {
    Eigen::MatrixXd sw(n, p);
    int rows = 0;
    for (int i = 0; i < n; ++i)
      if (kk[i] > 0) sw.row(rows++) = std::sqrt(double(kk[i])) * s.row(i);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sw.topRows(rows));
    qr.setThreshold(1e-10);
    if (qr.rank() < p)
      throw RankDeficientDesignError("fit_mle: weighted design is rank deficient");
  }

  std::vector<double> z(dataset.z().begin(), dataset.z().end());
  Eigen::VectorXd beta =
      beta_start.size() == p ? beta_start : Eigen::VectorXd::Zero(p);
  double ll = loglik_at(s, z, kk, beta);

  Eigen::VectorXd grad(p);
  Eigen::MatrixXd hess(p, p);
  Eigen::VectorXd eta(n), prob(n);
  double grad_norm = 0.0;
  int iter = 0;

  for (; iter < kMaxIterations; ++iter) {
    eta = s * beta;
    for (int i = 0; i < n; ++i) prob[i] = sigmoid(eta[i]);

    grad.setZero();
    hess.setZero();
    for (int i = 0; i < n; ++i) {
      if (kk[i] == 0) continue;
      const double w = kk[i];
      grad.noalias() += (w * (z[i] - prob[i])) * s.row(i).transpose();
      const double h = w * prob[i] * (1.0 - prob[i]);
      hess.noalias() += h * (s.row(i).transpose() * s.row(i));
    }
    grad_norm = grad.norm();
    if (grad_norm <= kScoreTol) break;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    Eigen::VectorXd step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      // Flat Hessian with a nonzero score: the likelihood still improves
      // along the gradient, i.e. a separated configuration.
      double max_eta = 0.0;
      for (int i = 0; i < n; ++i)
        if (kk[i] > 0) max_eta = std::max(max_eta, std::abs(eta[i]));
      if (max_eta > kSeparationLogit)
        throw SeparationError("fit_mle: complete separation");
      throw NoConvergenceError("fit_mle: singular Hessian");
    }

    double lambda = 1.0;
    double ll_new = ll;
    Eigen::VectorXd beta_new = beta;
    for (int h = 0; h < 40; ++h) {
      beta_new = beta + lambda * step;
      ll_new = loglik_at(s, z, kk, beta_new);
      if (ll_new >= ll - 1e-12) break;
      lambda *= 0.5;
    }
    beta = beta_new;
    ll = ll_new;

    double max_eta = (s * beta).cwiseAbs().maxCoeff();
    if (max_eta > kSeparationLogit && grad.norm() > kScoreTol)
      throw SeparationError("fit_mle: separation (|beta.s| > 30 while improving)");
  }

  if (grad_norm > kScoreTol)
    throw NoConvergenceError("fit_mle: score norm " + std::to_string(grad_norm) +
                             " after " + std::to_string(iter) + " iterations");

  PropensityFit fit;
  fit.beta = beta;
  fit.fitted.resize(n);
  eta = s * beta;
  for (int i = 0; i < n; ++i) fit.fitted[i] = sigmoid(eta[i]);
  fit.loglik = ll;
  fit.grad_norm = grad_norm;
  fit.iterations = iter;
  return fit;
}

double predict(const PropensityFit& fit, const Eigen::VectorXd& s_row) {
  if (s_row.size() != fit.beta.size())
    throw DimensionMismatchError("predict: design row length mismatch");
  return sigmoid(fit.beta.dot(s_row));
}

}  // namespace robsens
