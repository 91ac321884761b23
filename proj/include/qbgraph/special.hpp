#pragma once

namespace qbgraph::special {

/// log(erfcx(x)) with erfcx(x) = exp(x^2) erfc(x); accurate for all finite x.
double log_erfcx(double x);

/// log of the integral over [0, inf) of exp(-a t^2 - c t), a > 0.
double log_half_gauss_laplace(double a, double c);

/// Mean of t under the density on [0, inf) proportional to exp(-a t^2 - c t).
double half_gauss_laplace_mean(double a, double c);

/// Numerically stable log(exp(x) + exp(y)).
double log_add_exp(double x, double y);

}  // namespace qbgraph::special
