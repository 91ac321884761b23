#include "qbgraph/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace qbgraph::special {
namespace {

constexpr double kAsymptoticSwitch = 8.0;

// sum_{k>=0} (-1)^k (2k-1)!! / (2x^2)^k, so that erfcx(x) = series / (x sqrt(pi)).
// Only used for x >= kAsymptoticSwitch where the terms fall below 1e-17 well
// before the series starts to diverge.
double erfcx_asymptotic_series(double x) {
  const double inv = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    term *= -(2.0 * k - 1.0) * inv;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

double log_erfcx(double x) {
  if (std::isnan(x)) return x;
  if (x < kAsymptoticSwitch) return x * x + std::log(std::erfc(x));
  return -std::log(x) - 0.5 * std::log(std::numbers::pi) + std::log(erfcx_asymptotic_series(x));
}

double log_half_gauss_laplace(double a, double c) {
  const double sa = std::sqrt(a);
  return std::log(0.5 * std::sqrt(std::numbers::pi / a)) + log_erfcx(c / (2.0 * sa));
}

double half_gauss_laplace_mean(double a, double c) {
  const double sa = std::sqrt(a);
  const double x = c / (2.0 * sa);
  const double spi = std::sqrt(std::numbers::pi);
  if (x >= kAsymptoticSwitch) {
    // 1 - x sqrt(pi) erfcx(x) = 1 - series(x); evaluate the tail directly to
    // avoid cancellation.
    const double inv = 1.0 / (2.0 * x * x);
    double term = 1.0;
    double tail = 0.0;
    for (int k = 1; k < 60; ++k) {
      term *= -(2.0 * k - 1.0) * inv;
      tail -= term;
      if (std::abs(term) < 1e-18 * std::abs(tail)) break;
    }
    const double erfcx = erfcx_asymptotic_series(x) / (x * spi);
    return tail / (sa * spi * erfcx);
  }
  return (std::exp(-log_erfcx(x)) - x * spi) / (sa * spi);
}

double log_add_exp(double x, double y) {
  if (x == -std::numeric_limits<double>::infinity()) return y;
  if (y == -std::numeric_limits<double>::infinity()) return x;
  const double m = std::max(x, y);
  return m + std::log1p(std::exp(-std::abs(x - y)));
}

}  // namespace qbgraph::special
