#include "robsens/logistic.hpp"

#include <cmath>

#include "doctest.h"
#include "robsens/errors.hpp"
#include "robsens/rng.hpp"
#include "support.hpp"

using namespace robsens;

namespace {

Dataset random_logistic_dataset(Rng& rng, int n, int p) {
  std::vector<Observation> rows;
  Eigen::VectorXd beta(p + 1);
  for (int j = 0; j <= p; ++j) beta[j] = -1.0 + 2.0 * rng.uniform();
  for (int i = 0; i < n; ++i) {
    Observation o;
    o.x.resize(p);
    double eta = beta[0];
    for (int j = 0; j < p; ++j) {
      o.x[j] = -1.0 + 2.0 * rng.uniform();
      eta += beta[j + 1] * o.x[j];
    }
    o.z = rng.uniform() < sigmoid(eta) ? 1 : 0;
    o.y = rng.uniform();
    rows.push_back(o);
  }
  Dataset d(std::move(rows));
  std::vector<std::string> cols;
  for (int j = 0; j < p; ++j) cols.push_back("x" + std::to_string(j + 1));
  return build_designs(d, TransformSpec::identity(cols, {}));
}

}  // namespace

TEST_CASE("intercept-only balanced fit is exactly one half") {
  Dataset d = testsupport::toy_dataset({0, 0, 0, 0}, {1, 0, 1, 0}, {});
  d = build_designs(d, TransformSpec::identity({}, {}));
  PropensityFit fit = fit_mle(d);
  CHECK(fit.beta[0] == doctest::Approx(0.0).epsilon(1e-10).scale(1.0));
  for (int i = 0; i < 4; ++i) CHECK(fit.fitted[i] == doctest::Approx(0.5));
  CHECK(fit.grad_norm <= 1e-8);
}

TEST_CASE("intercept-only fit equals the logit of the weighted mean") {
  Dataset d = testsupport::toy_dataset({0, 0, 0, 0}, {1, 1, 1, 0}, {});
  d = build_designs(d, TransformSpec::identity({}, {}));
  PropensityFit fit = fit_mle(d);
  CHECK(fit.beta[0] == doctest::Approx(std::log(3.0)).epsilon(1e-10));
  CHECK(fit.fitted[0] == doctest::Approx(0.75).epsilon(1e-10));

  SUBCASE("with integer weights") {
    // weights (3,1,1,2): mean = 5/7
    PropensityFit wfit = fit_mle(d, {3, 1, 1, 2});
    CHECK(wfit.beta[0] == doctest::Approx(logit(5.0 / 7.0)).epsilon(1e-10));
  }
}

TEST_CASE("a perfectly separating covariate raises SeparationError") {
  Dataset d = testsupport::toy_dataset({0, 0, 0, 0, 0, 0}, {1, 1, 1, 0, 0, 0},
                                       {{2}, {1.5}, {1}, {-1}, {-1.5}, {-2}});
  d = build_designs(d, TransformSpec::identity({"x1"}, {}));
  CHECK_THROWS_AS(fit_mle(d), SeparationError);
}

TEST_CASE("rank-deficient weighted design is rejected") {
  // full rank unweighted, but the k>0 rows have a constant covariate
  Dataset d = testsupport::toy_dataset({0, 0, 0, 0}, {1, 0, 1, 0},
                                       {{5}, {5}, {1}, {2}});
  Dataset built = build_designs(d, TransformSpec::identity({"x1"}, {}));
  CHECK_NOTHROW(fit_mle(built));
  // canonical rows 0 and 2 carry x1 = 5 on both arms: constant covariate
  CHECK_THROWS_AS(fit_mle(built, {1, 0, 1, 0}), RankDeficientDesignError);
}

TEST_CASE("predict evaluates the logistic link") {
  PropensityFit fit;
  fit.beta = Eigen::VectorXd(2);
  fit.beta << 0.0, 1.0;
  Eigen::VectorXd row(2);
  row << 1.0, -1.0;
  CHECK(predict(fit, row) == doctest::Approx(sigmoid(-1.0)));
  row << 0.0, std::log(2.0);
  CHECK(predict(fit, row) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  row << 0.0, -std::log(9.0);
  CHECK(predict(fit, row) == doctest::Approx(0.1).epsilon(1e-12));
  Eigen::VectorXd bad(3);
  CHECK_THROWS_AS(predict(fit, bad), DimensionMismatchError);
}

TEST_CASE("score norm small and gradient matches finite differences") {
  Rng rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 40 + static_cast<int>(rng.uniform() * 60);
    const int p = 1 + static_cast<int>(rng.uniform() * 3);
    Dataset d = random_logistic_dataset(rng, n, p);
    std::vector<int> k(n, 1);
    if (trial % 3 == 0)
      for (int i = 0; i < n; ++i) k[i] = static_cast<int>(rng.uniform() * 3);
    PropensityFit fit;
    try {
      fit = fit_mle(d, k);
    } catch (const Error&) {
      continue;  // rare degenerate draw
    }
    CHECK(fit.grad_norm <= 1e-8);

    // central finite differences of the weighted log-likelihood
    Eigen::VectorXd beta = fit.beta;
    for (int j = 0; j < beta.size(); ++j) beta[j] += 0.05 * rng.uniform();
    const double h = 1e-5;
    Eigen::VectorXd grad_fd(beta.size());
    for (int j = 0; j < beta.size(); ++j) {
      Eigen::VectorXd bp = beta, bm = beta;
      bp[j] += h;
      bm[j] -= h;
      grad_fd[j] =
          (logistic_loglik(d, k, bp) - logistic_loglik(d, k, bm)) / (2 * h);
    }
    // analytic gradient at the same beta
    Eigen::VectorXd grad(beta.size());
    grad.setZero();
    const Eigen::MatrixXd& s = d.s_design();
    for (int i = 0; i < n; ++i) {
      if (k[i] == 0) continue;
      const double pi = sigmoid(s.row(i).dot(beta));
      grad += k[i] * (d.z()[i] - pi) * s.row(i).transpose();
    }
    const double denom = std::max(1.0, grad.norm());
    CHECK((grad - grad_fd).norm() / denom < 1e-6);
  }
}

TEST_CASE("unit weights equal the unweighted fit") {
  Rng rng(4242);
  Dataset d = random_logistic_dataset(rng, 80, 2);
  PropensityFit a = fit_mle(d);
  PropensityFit b = fit_mle(d, std::vector<int>(80, 1));
  CHECK(a.beta.isApprox(b.beta, 1e-12));
}

TEST_CASE("warm starts reach the same optimum") {
  Rng rng(31);
  Dataset d = random_logistic_dataset(rng, 120, 2);
  PropensityFit cold = fit_mle(d);
  Eigen::VectorXd start = cold.beta;
  start.array() += 0.3;
  PropensityFit warm = fit_mle(d, {}, start);
  CHECK((cold.beta - warm.beta).norm() < 1e-6);
}
