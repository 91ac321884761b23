#pragma once

#include "qbgraph/types.hpp"

namespace qbgraph {

/// -||x_j - x^(j) theta||^2 / (2 sigma2_j), the column-j Gaussian
/// quasi-log-likelihood up to its normalizing constant.
double log_quasi_likelihood_col(Index j, const Vector& theta, const DataMatrix& data,
                                double sigma2_j);

/// log C_alpha(lambda1, lambda2): the log normalizer of the elastic-net density
/// exp(-alpha lambda1 |z| - (1 - alpha) lambda2 z^2 / 2).
///
/// For alpha < 1 this is 0.5 log(2 pi / ((1-alpha) lambda2)) +
/// log erfcx(alpha lambda1 / sqrt(2 (1-alpha) lambda2)); for alpha = 1 it is
/// log(2 / lambda1). Evaluated in log space so very large penalties do not
/// underflow.
double elastic_net_log_normalizer(double alpha, double lambda1, double lambda2);

/// Log prior of a column state: Bernoulli(q) inclusions with the Beta(1, p^u)
/// kernel on q, elastic-net slab on the active coefficients, and the uniform
/// U(a1, a2) hyperprior on rho1 and rho2. Returns -inf when a rho lies outside
/// [a1, a2].
double log_prior_col(const ColumnState& state, Index p, const Hyperparameters& hyper,
                     double sigma2_j);

/// Unnormalized log quasi-posterior of column j:
/// log_quasi_likelihood_col + log_prior_col.
double log_target_col(const ColumnState& state, Index j, const DataMatrix& data,
                      const Hyperparameters& hyper);

/// Default upper bound of the rho hyperprior:
/// 4 sqrt(kappa n log p) max_j sigma2_j with kappa = max_j ||x_j||^2 / n.
double resolve_a2(const DataMatrix& data, const Vector& sigma2);

}  // namespace qbgraph
