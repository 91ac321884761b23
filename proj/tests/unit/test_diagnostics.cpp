#include "helpers.hpp"
#include "qbgraph/diagnostics.hpp"
#include "qbgraph/errors.hpp"
#include "qbgraph/simulate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace qbgraph;

namespace {

// Extreme s-sparse Rayleigh quotients by enumerating every support of size s.
std::pair<double, double> brute_sparse(const Matrix& m, Index s) {
  const Index p = m.rows();
  s = std::min(s, p);
  double lo = 1e300;
  double hi = -1e300;
  std::vector<bool> pick(static_cast<std::size_t>(p), false);
  std::fill(pick.begin(), pick.begin() + s, true);
  do {
    std::vector<Index> idx;
    for (Index i = 0; i < p; ++i) {
      if (pick[static_cast<std::size_t>(i)]) idx.push_back(i);
    }
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(m(idx, idx)).eigenvalues();
    lo = std::min(lo, ev[0]);
    hi = std::max(hi, ev[ev.size() - 1]);
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return {lo, hi};
}

std::vector<double> normal_trace(Rng& rng, int len) {
  std::vector<double> t(static_cast<std::size_t>(len));
  for (double& v : t) v = draw_normal(rng);
  return t;
}

}  // namespace

TEST_CASE("Geweke statistic") {
  Rng rng(1);
  int below = 0;
  for (int r = 0; r < 200; ++r) {
    const auto t = normal_trace(rng, 10000);
    below += std::abs(geweke_z(t)) < 3.0;
  }
  CHECK(below >= 198);

  auto shifted = normal_trace(rng, 10000);
  for (std::size_t i = 5000; i < shifted.size(); ++i) shifted[i] += 5.0;
  CHECK(std::abs(geweke_z(shifted)) > 5.0);

  const std::vector<double> flat(500, 2.0);
  CHECK_THROWS_AS(geweke_z(flat), DegenerateTrace);
  const std::vector<double> tiny(50, 1.0);
  CHECK_THROWS_AS(geweke_z(tiny), InvalidArgument);
}

TEST_CASE("spectral variance of white noise and of an AR(1) series") {
  Rng rng(2);
  const auto white = normal_trace(rng, 200000);
  CHECK(spectral_variance0(white) == doctest::Approx(1.0).epsilon(0.05));
  std::vector<double> ar(200000);
  double x = 0;
  for (double& v : ar) {
    x = 0.5 * x + draw_normal(rng);
    v = x;
  }
  // Long-run variance of an AR(1) with unit innovations: 1 / (1 - phi)^2.
  CHECK(spectral_variance0(ar) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("metrics") {
  const Matrix truth_m = gen_setting_c(12, 3).entries();
  const PrecisionMatrix truth(truth_m);
  const Metrics perfect = metrics(truth, truth);
  CHECK(perfect.rel_error == 0.0);
  CHECK(perfect.sensitivity == 1.0);
  CHECK(perfect.precision == 1.0);

  const Metrics diag = metrics(PrecisionMatrix(Matrix(truth_m.diagonal().asDiagonal())), truth);
  CHECK(diag.sensitivity == 0.0);
  CHECK_FALSE(diag.precision.has_value());

  Matrix t = Matrix::Identity(3, 3);
  t(0, 1) = t(1, 0) = 0.3;
  Matrix e = t;
  e(0, 2) = e(2, 0) = 0.2;
  const Metrics hand = metrics(PrecisionMatrix(e), PrecisionMatrix(t));
  CHECK(hand.sensitivity == 1.0);
  CHECK(hand.precision == 0.5);
  CHECK(hand.rel_error == doctest::Approx(std::sqrt(0.08) / std::sqrt(3 + 0.18)));

  Matrix flipped = t;
  flipped(0, 1) = flipped(1, 0) = -0.3;
  const Metrics wrong_sign = metrics(PrecisionMatrix(flipped), PrecisionMatrix(t));
  CHECK(wrong_sign.sensitivity == 0.0);
  CHECK(wrong_sign.precision == 0.0);

  CHECK_FALSE(metrics(PrecisionMatrix(Matrix::Identity(3, 3)), PrecisionMatrix(Matrix::Identity(3, 3)))
                  .sensitivity.has_value());
}

TEST_CASE("metrics are invariant under node relabeling") {
  Rng rng(3);
  for (int r = 0; r < 20; ++r) {
    const Matrix truth = gen_setting_c(15, r).entries();
    Matrix est = truth;
    for (Index i = 0; i < 15; ++i) {
      for (Index j = i + 1; j < 15; ++j) {
        if (draw_uniform(rng) < 0.1) est(i, j) = est(j, i) = draw_normal(rng);
      }
    }
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(15);
    perm.setIdentity();
    for (Index k = 14; k > 0; --k) std::swap(perm.indices()[k], perm.indices()[draw_index(rng, k + 1)]);
    const Matrix pt = perm * truth * perm.transpose();
    const Matrix pe = perm * est * perm.transpose();
    const Metrics a = metrics(PrecisionMatrix(est), PrecisionMatrix(truth));
    const Metrics b = metrics(PrecisionMatrix(pe), PrecisionMatrix(pt));
    CHECK(a.rel_error == doctest::Approx(b.rel_error).epsilon(1e-14));
    CHECK(a.sensitivity == b.sensitivity);
    CHECK(a.precision == b.precision);
    CHECK(*a.sensitivity >= 0.0);
    CHECK(*a.sensitivity <= 1.0);
  }
}

TEST_CASE("sparse eigenvalue bounds") {
  CHECK(sparse_eigen_bounds(Matrix::Identity(5, 5), 3) == std::pair<double, double>{1.0, 1.0});
  Rng rng(4);
  for (int r = 0; r < 30; ++r) {
    const Index p = 2 + draw_index(rng, 7);
    const Matrix m = testutil::random_spd(p, rng);
    const auto [lo1, hi1] = sparse_eigen_bounds(m, 1);
    CHECK(lo1 == m.diagonal().minCoeff());
    CHECK(hi1 == m.diagonal().maxCoeff());
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues();
    const auto [lop, hip] = sparse_eigen_bounds(m, p);
    CHECK(lop == doctest::Approx(ev[0]).epsilon(1e-12));
    CHECK(hip == doctest::Approx(ev[p - 1]).epsilon(1e-12));
    double prev_lo = lo1;
    double prev_hi = hi1;
    for (Index s = 2; s <= p; ++s) {
      const auto [lo, hi] = sparse_eigen_bounds(m, s);
      const auto [blo, bhi] = brute_sparse(m, s);
      CHECK(lo == doctest::Approx(blo).epsilon(1e-12));
      CHECK(hi == doctest::Approx(bhi).epsilon(1e-12));
      CHECK(lo <= prev_lo + 1e-12);
      CHECK(hi >= prev_hi - 1e-12);
      prev_lo = lo;
      prev_hi = hi;
    }
  }
  CHECK_THROWS_AS(sparse_eigen_bounds(Matrix::Identity(40, 40), 20, 1e6), BudgetExceeded);
}

TEST_CASE("restricted eigenvalue") {
  const RestrictedEigen id = restricted_eigen(Matrix::Identity(3, 3), 1);
  CHECK(id.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(id.exact);
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 1, 4;
  const RestrictedEigen re = restricted_eigen(d, 1);
  CHECK(re.value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(re.exact);
  CHECK(std::isinf(restricted_eigen(d, 0).value));

  Rng rng(5);
  for (int r = 0; r < 20; ++r) {
    const Index p = 2 + draw_index(rng, 7);
    const Matrix m = testutil::random_spd(p, rng);
    const Index s = 1 + draw_index(rng, p);
    const RestrictedEigen v = restricted_eigen(m, s, 5, r);
    CHECK(v.value <= sparse_eigen_bounds(m, s).first + 1e-12);
    CHECK(v.exact == (p <= 3 || s >= p));
  }
}

TEST_CASE("theory formulas at special points") {
  CHECK(rho_theory(1.0, 1.0, 100.0, 1.0) == doctest::Approx(std::sqrt(5400.0)).epsilon(1e-12));
  CHECK(zeta_j(0, 1.0, 1.0, 2.0, 0.5, 3.0, std::log(50.0), 0.5) == 8.0);
}

TEST_CASE("theory report agrees with a direct evaluation") {
  const PrecisionMatrix truth = gen_setting_c(10, 7);
  const Matrix& th = truth.entries();
  const Vector sigma2 = th.diagonal().cwiseInverse();
  const Index n = 250;
  const double u = 1.5;
  const TheoryReport r = theory_quantities(truth, sigma2, n, u);
  const TheoryReport again = theory_quantities(truth, sigma2, n, u);
  REQUIRE(r.zeta.has_value());
  REQUIRE(r.kappa_underline.has_value());
  CHECK(*r.zeta == *again.zeta);
  CHECK(*r.kappa_underline == *again.kappa_underline);
  CHECK(*r.epsilon == *again.epsilon);

  const double c3 = u;
  const double c4 = u - 1;
  const double p = 10.0;
  const double lp = std::log(p);
  std::vector<Index> deg(10, 0);
  for (Index j = 0; j < 10; ++j) {
    for (Index k = 0; k < 10; ++k) deg[j] += (k != j && th(k, j) != 0.0);
  }
  const Index s_star = *std::max_element(deg.begin(), deg.end());
  CHECK(r.s_star == s_star);
  const double kt1 = brute_sparse(th, 1).second;
  const double kt_star = brute_sparse(th, s_star).second;
  const double ku = *r.kappa_underline;
  CHECK(ku > 0.0);
  CHECK(ku <= brute_sparse(th, s_star).first + 1e-12);

  double s_bar = 0;
  double scale_max = 0;
  for (Index j = 0; j < 10; ++j) {
    const double scale = sigma2[j] * th(j, j);
    scale_max = std::max(scale_max, scale);
    const double sj = static_cast<double>(deg[j]);
    const double bracket = std::log(4 * std::numbers::e * p) / lp + 6912 / scale * kt1 / ku +
                           scale / (24 * lp * lp) * kt_star / kt1;
    const double zeta = 4 / c4 + sj + 2 / c4 * bracket * sj;
    CHECK((*r.zeta)[j] == doctest::Approx(zeta).epsilon(1e-12));
    CHECK(r.rho[j] == doctest::Approx(std::sqrt(54 * kt1 / th(j, j) * n * lp)).epsilon(1e-12));
    s_bar = std::max(s_bar, deg[j] > 0 ? sj + zeta : 1.0);
  }
  const auto s_bar_int = static_cast<Index>(std::ceil(s_bar));
  CHECK(*r.s_bar == s_bar_int);
  const double eps = 12 * std::sqrt(6.0) * std::sqrt(kt1) / brute_sparse(th, s_bar_int).first *
                     std::sqrt(static_cast<double>(s_bar_int) * lp / n);
  CHECK(*r.epsilon == doctest::Approx(eps).epsilon(1e-10));
  CHECK(r.M0 == doctest::Approx(std::max(96.0, (4 + c4 * (2 + c3) / 2) * scale_max)));
  CHECK(r.kappa_lower.at(1) == th.diagonal().minCoeff());
  CHECK(r.kappa_upper.at(1) == th.diagonal().maxCoeff());
  CHECK(std::isfinite(*r.epsilon));
  CHECK(r.flags.at("sample_size_thm1").find("heuristic") == 0);
}

TEST_CASE("theory report degrades to a partial report over budget") {
  const PrecisionMatrix truth = gen_setting_c(60, 1);
  const Vector sigma2 = truth.entries().diagonal().cwiseInverse();
  CHECK_THROWS_AS(theory_quantities(truth, sigma2, 250, 1.5, false, 10.0), BudgetExceeded);
  const TheoryReport r = theory_quantities(truth, sigma2, 250, 1.5, true, 10.0);
  CHECK(r.flags.count("partial") == 1);
  CHECK_FALSE(r.zeta.has_value());
  CHECK(r.rho.size() == 60);
}
