#include "helpers.hpp"
#include "qbgraph/core_model.hpp"
#include "qbgraph/errors.hpp"
#include "qbgraph/oracle.hpp"
#include "qbgraph/special.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace qbgraph;

namespace {

// One observation (1, 2) padded with a zero row: the residual sum of squares
// is unchanged and DataMatrix needs n >= 2.
DataMatrix one_point() {
  Matrix x(2, 2);
  x << 1, 2, 0, 0;
  return DataMatrix(x);
}

// Integral of exp(-alpha l1 |z| - (1 - alpha) l2 z^2 / 2) over the real line.
double slab_integral(double alpha, double l1, double l2) {
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [&](double z) { return std::exp(-alpha * l1 * z - (1.0 - alpha) * l2 * z * z / 2.0); };
  return 2.0 * integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

Hyperparameters hyper_for(Index p) {
  Hyperparameters h;
  h.sigma2 = Vector::Ones(p);
  h.a2 = 50.0;
  return h;
}

}  // namespace

TEST_CASE("quasi-likelihood of a single observation") {
  const DataMatrix d = one_point();
  CHECK(log_quasi_likelihood_col(0, Vector::Constant(1, 0.5), d, 1.0) == doctest::Approx(0.0));
  CHECK(log_quasi_likelihood_col(0, Vector::Constant(1, 0.0), d, 1.0) == doctest::Approx(-0.5));
  CHECK(log_quasi_likelihood_col(0, Vector::Constant(1, 1.0), d, 1.0) == doctest::Approx(-0.5));
}

TEST_CASE("quasi-likelihood rejects a wrong-length theta and is never positive") {
  const DataMatrix d(testutil::random_data(20, 4, 3));
  CHECK_THROWS_AS(log_quasi_likelihood_col(0, Vector::Zero(2), d, 1.0), InvalidArgument);
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    Vector theta(3);
    for (Index k = 0; k < 3; ++k) theta[k] = 3.0 * draw_normal(rng);
    CHECK(log_quasi_likelihood_col(t % 4, theta, d, 0.7) <= 0.0);
  }
}

TEST_CASE("elastic-net normalizer closed forms") {
  CHECK(elastic_net_log_normalizer(1.0, 2.0, 1.0) == doctest::Approx(0.0));
  CHECK(elastic_net_log_normalizer(0.0, 1.0, 2.0 * std::numbers::pi) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK_THROWS_AS(elastic_net_log_normalizer(0.5, -1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(elastic_net_log_normalizer(0.5, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("elastic-net normalizer matches quadrature") {
  CHECK(elastic_net_log_normalizer(0.5, 1.0, 1.0) ==
        doctest::Approx(std::log(slab_integral(0.5, 1.0, 1.0))).epsilon(1e-10));
  for (double alpha : {0.1, 0.5, 0.9, 0.99}) {
    for (double l1 : {0.01, 1.0, 30.0}) {
      for (double l2 : {0.05, 1.0, 40.0}) {
        CHECK(elastic_net_log_normalizer(alpha, l1, l2) ==
              doctest::Approx(std::log(slab_integral(alpha, l1, l2))).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("elastic-net normalizer is strictly decreasing in lambda1") {
  for (double alpha : {0.2, 0.9, 1.0}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double l1 = 0.01; l1 < 1e4; l1 *= 1.7) {
      const double v = elastic_net_log_normalizer(alpha, l1, 2.0);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("elastic-net normalizer tends to the Laplace constant as lambda2 vanishes") {
  const double l1 = 1.3;
  const double alpha = 0.9;
  const double c = std::exp(elastic_net_log_normalizer(alpha, l1, 1e-14));
  CHECK(c == doctest::Approx(2.0 / (alpha * l1)).epsilon(1e-6));
  const double near_one = std::exp(elastic_net_log_normalizer(1.0 - 1e-9, l1, 1.0));
  CHECK(near_one == doctest::Approx(2.0 / l1).epsilon(1e-6));
}

TEST_CASE("log prior on the empty support") {
  const Index p = 5;
  Hyperparameters h = hyper_for(p);
  ColumnState s;
  s.delta.assign(4, 0);
  s.theta = Vector::Zero(4);
  s.q = 0.2;
  s.rho1 = 3.0;
  s.rho2 = 4.0;
  const double expected = ((p - 1) + std::pow(p, h.u) - 1) * std::log(1 - s.q) - 2 * std::log(h.a2 - h.a1);
  CHECK(log_prior_col(s, p, h, 1.0) == doctest::Approx(expected));
}

TEST_CASE("log prior of one active coefficient with a Laplace slab") {
  const Index p = 2;
  Hyperparameters h = hyper_for(p);
  h.alpha = 1.0;
  const double sigma2 = 0.7;
  ColumnState s;
  s.delta = {1};
  s.theta = Vector::Constant(1, -0.8);
  s.q = 0.3;
  s.rho1 = 2.5;
  s.rho2 = 1.0;
  const double expected = std::log(s.q / (1 - s.q)) + std::pow(p, h.u) * std::log(1 - s.q) -
                          std::log(2 * sigma2 / s.rho1) - s.rho1 / sigma2 * 0.8 - 2 * std::log(h.a2 - h.a1);
  CHECK(log_prior_col(s, p, h, sigma2) == doctest::Approx(expected));
}

TEST_CASE("log prior outside the hyperprior support") {
  Hyperparameters h = hyper_for(3);
  ColumnState s;
  s.delta = {0, 0};
  s.theta = Vector::Zero(2);
  s.rho1 = h.a1 / 2;
  CHECK(log_prior_col(s, 3, h, 1.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("log target requires a consistent state and is additive") {
  const DataMatrix d(testutil::random_data(25, 3, 4));
  Hyperparameters h = hyper_for(3);
  ColumnState s;
  s.delta = {1, 0};
  s.theta = Vector::Zero(2);
  CHECK_THROWS_AS(log_target_col(s, 0, d, h), InvalidArgument);

  s.delta = {0, 0};
  CHECK(log_target_col(s, 1, d, h) ==
        doctest::Approx(log_quasi_likelihood_col(1, s.theta, d, 1.0) + log_prior_col(s, 3, h, 1.0)));
}

TEST_CASE("log target agrees with the oracle integrand and stays finite") {
  const DataMatrix d = testutil::tiny_instance(21);
  Hyperparameters h = hyper_for(3);
  h.sigma2 << 0.8, 1.1, 0.9;
  Rng rng(77);
  for (int t = 0; t < 300; ++t) {
    ColumnState s;
    s.delta = {static_cast<std::uint8_t>(draw_uniform(rng) < 0.5), static_cast<std::uint8_t>(draw_uniform(rng) < 0.5)};
    s.theta = Vector::Zero(2);
    for (Index k = 0; k < 2; ++k) {
      if (s.delta[k]) s.theta[k] = 2.0 * draw_normal(rng);
    }
    s.q = 0.01 + 0.98 * draw_uniform(rng);
    s.rho1 = h.a1 + (h.a2 - h.a1) * draw_uniform(rng);
    s.rho2 = h.a1 + (h.a2 - h.a1) * draw_uniform(rng);
    const Index j = t % 3;
    const double v = log_target_col(s, j, d, h);
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(oracle_log_integrand(j, d, h, s)).epsilon(1e-10));
  }
}

TEST_CASE("default hyperprior bound") {
  const Matrix x = testutil::random_data(40, 5, 8);
  const DataMatrix d(x);
  Vector s2(5);
  s2 << 1, 2, 0.5, 1, 1;
  const double kappa = x.colwise().squaredNorm().maxCoeff() / 40.0;
  CHECK(resolve_a2(d, s2) == doctest::Approx(4 * std::sqrt(kappa * 40 * std::log(5.0)) * 2));
}

TEST_CASE("special functions") {
  using namespace special;
  CHECK(log_erfcx(0.0) == doctest::Approx(0.0));
  CHECK(log_erfcx(1.0) == doctest::Approx(std::log(std::exp(1.0) * std::erfc(1.0))));
  CHECK(log_erfcx(-2.0) == doctest::Approx(std::log(std::exp(4.0) * std::erfc(-2.0))));
  // erfcx(x) ~ 1 / (x sqrt(pi)) for large x.
  CHECK(log_erfcx(1e6) == doctest::Approx(-std::log(1e6 * std::sqrt(std::numbers::pi))).epsilon(1e-9));
  CHECK(log_add_exp(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)));
  boost::math::quadrature::exp_sinh<double> integrator;
  const double a = 0.7;
  const double c = -1.2;
  const double z = integrator.integrate([&](double t) { return std::exp(-a * t * t - c * t); }, 0.0,
                                        std::numeric_limits<double>::infinity());
  const double m = integrator.integrate([&](double t) { return t * std::exp(-a * t * t - c * t); }, 0.0,
                                        std::numeric_limits<double>::infinity());
  CHECK(log_half_gauss_laplace(a, c) == doctest::Approx(std::log(z)).epsilon(1e-10));
  CHECK(half_gauss_laplace_mean(a, c) == doctest::Approx(m / z).epsilon(1e-10));
}
