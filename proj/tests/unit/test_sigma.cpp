#include "helpers.hpp"
#include "qbgraph/errors.hpp"
#include "qbgraph/sigma.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace qbgraph;

namespace {

// Largest violation of the lasso subgradient conditions at beta.
double kkt_violation(const Vector& y, const Matrix& x, const Vector& beta, double lambda) {
  const double n = static_cast<double>(x.rows());
  const Vector g = x.transpose() * (y - x * beta) / n;
  double worst = 0.0;
  for (Index k = 0; k < beta.size(); ++k) {
    const double v = beta[k] != 0.0 ? std::abs(g[k] - lambda * (beta[k] > 0 ? 1.0 : -1.0))
                                    : std::max(0.0, std::abs(g[k]) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace

TEST_CASE("lasso threshold gives the null solution") {
  const Matrix x = testutil::random_data(40, 6, 1);
  const Vector y = testutil::random_data(40, 1, 2).col(0);
  const double lmax = lasso_lambda_max(x.transpose() * y, 40);
  CHECK(lmax == doctest::Approx((x.transpose() * y).cwiseAbs().maxCoeff() / 40));
  CHECK(lasso_cd(y, x, lmax).isZero(0.0));
  CHECK(lasso_cd(y, x, 2 * lmax).isZero(0.0));
  CHECK_FALSE(lasso_cd(y, x, 0.9 * lmax).isZero(0.0));
}

TEST_CASE("unpenalized lasso is least squares") {
  const Matrix x = testutil::random_data(50, 5, 3);
  const Vector y = testutil::random_data(50, 1, 4).col(0);
  const Vector ols = x.colPivHouseholderQr().solve(y);
  CHECK((lasso_cd(y, x, 0.0) - ols).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("lasso solutions satisfy the KKT conditions") {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const Index n = 20 + draw_index(rng, 60);
    const Index m = 2 + draw_index(rng, 40);
    const Matrix x = testutil::random_data(n, m, 100 + t);
    Vector y = testutil::random_data(n, 1, 200 + t).col(0);
    y += 2.0 * x.col(0);
    const double lmax = lasso_lambda_max(x.transpose() * y, n);
    const double lambda = lmax * std::pow(10.0, -2.5 * draw_uniform(rng));
    CHECK(kkt_violation(y, x, lasso_cd(y, x, lambda), lambda) <= 1e-8);
  }
}

TEST_CASE("lasso objective never increases across sweeps") {
  const Matrix x = testutil::random_data(60, 15, 6);
  Vector y = testutil::random_data(60, 1, 7).col(0) + x.col(3) - 0.5 * x.col(7);
  const Matrix gram = x.transpose() * x;
  const Vector xty = x.transpose() * y;
  std::vector<double> trace;
  lasso_cd_gram(gram, xty, 60, 0.01, Vector(), &trace);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-14);
}

TEST_CASE("lasso input validation") {
  Matrix x = testutil::random_data(10, 3, 8);
  Vector y = Vector::Ones(10);
  CHECK_THROWS_AS(lasso_cd(y, x, -1.0), InvalidArgument);
  x(2, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(lasso_cd(y, x, 0.1), InvalidArgument);
}

TEST_CASE("lambda grid") {
  const auto grid = lasso_lambda_grid(2.0);
  REQUIRE(grid.size() == 50);
  CHECK(grid.front() == doctest::Approx(2.0));
  CHECK(grid.back() == doctest::Approx(2e-3));
  for (std::size_t i = 1; i < grid.size(); ++i) {
    CHECK(grid[i] / grid[i - 1] == doctest::Approx(grid[1] / grid[0]));
  }
}

TEST_CASE("cross-validated variance on pure noise") {
  const Matrix x = testutil::random_data(500, 10, 9);
  SigmaSpec spec;
  spec.mode = SigmaMode::EmpiricalCV;
  spec.seed = 4;
  const double s2 = estimate_sigma2_cv(DataMatrix(x), 0, spec);
  CHECK(s2 >= 0.8);
  CHECK(s2 <= 1.2);
  CHECK(estimate_sigma2_cv(DataMatrix(x), 0, spec) == s2);
}

TEST_CASE("cross-validated variance with one strong predictor") {
  Matrix x = testutil::random_data(500, 10, 10);
  x.col(4) = 5.0 * x.col(1) + testutil::random_data(500, 1, 11).col(0);
  SigmaSpec spec;
  spec.mode = SigmaMode::EmpiricalCV;
  spec.seed = 5;
  const double s2 = estimate_sigma2_cv(DataMatrix(x), 4, spec);
  CHECK(s2 >= 0.7);
  CHECK(s2 <= 1.4);
}

TEST_CASE("known mode returns the given values") {
  const DataMatrix d(testutil::random_data(30, 4, 12));
  SigmaSpec spec;
  spec.known_values = Vector::LinSpaced(4, 0.5, 2.0);
  CHECK(estimate_sigma2_cv(d, 2, spec) == (*spec.known_values)[2]);
  CHECK(resolve_sigma2(d, spec) == *spec.known_values);
  spec.known_values.reset();
  CHECK_THROWS_AS(resolve_sigma2(d, spec), InvalidArgument);
  spec.mode = SigmaMode::EmpiricalCV;
  spec.folds = 1;
  CHECK_THROWS_AS(resolve_sigma2(d, spec), InvalidArgument);
}

TEST_CASE("all columns are positive and independent of the worker count") {
  const DataMatrix d(testutil::random_data(80, 12, 13));
  SigmaSpec spec;
  spec.mode = SigmaMode::EmpiricalCV;
  spec.seed = 6;
  const Vector a = resolve_sigma2(d, spec, 1);
  const Vector b = resolve_sigma2(d, spec, 4);
  CHECK(a == b);
  CHECK(a.minCoeff() > 0.0);
  CHECK(a[5] == estimate_sigma2_cv(d, 5, spec));
}
