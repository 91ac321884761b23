#include "qbgraph/core_model.hpp"

#include "qbgraph/errors.hpp"
#include "qbgraph/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace qbgraph {

double log_quasi_likelihood_col(Index j, const Vector& theta, const DataMatrix& data,
                                double sigma2_j) {
  if (j < 0 || j >= data.p()) throw InvalidArgument("column index out of range");
  if (theta.size() != data.p() - 1) {
    throw InvalidArgument("theta has length " + std::to_string(theta.size()) + ", expected " +
                          std::to_string(data.p() - 1));
  }
  if (!(sigma2_j > 0.0)) throw InvalidArgument("sigma2_j must be positive");
  if (!theta.allFinite()) throw InvalidArgument("theta must be finite");

  const Matrix& x = data.values();
  Vector resid = x.col(j);
  for (Index k = 0; k < theta.size(); ++k) {
    if (theta[k] != 0.0) resid.noalias() -= theta[k] * x.col(neighbor_node(j, k));
  }
  return -resid.squaredNorm() / (2.0 * sigma2_j);
}

double elastic_net_log_normalizer(double alpha, double lambda1, double lambda2) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  if (!(lambda1 > 0.0)) throw InvalidArgument("lambda1 must be positive");
  if (alpha == 1.0) return std::log(2.0 / lambda1);
  if (!(lambda2 > 0.0)) throw InvalidArgument("lambda2 must be positive when alpha < 1");

  const double quad = (1.0 - alpha) * lambda2;
  return 0.5 * std::log(2.0 * std::numbers::pi / quad) +
         special::log_erfcx(alpha * lambda1 / std::sqrt(2.0 * quad));
}

double log_prior_col(const ColumnState& state, Index p, const Hyperparameters& hyper,
                     double sigma2_j) {
  const Index m = p - 1;
  if (static_cast<Index>(state.delta.size()) != m || state.theta.size() != m) {
    throw InvalidArgument("column state has the wrong dimension");
  }
  if (!state.delta_consistent()) {
    throw InvalidArgument("theta must be zero exactly where delta is zero");
  }
  if (!(state.q > 0.0 && state.q < 1.0)) throw InvalidArgument("q must lie in (0, 1)");
  if (!(sigma2_j > 0.0)) throw InvalidArgument("sigma2_j must be positive");

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (state.rho1 < hyper.a1 || state.rho1 > hyper.a2) return kNegInf;
  if (state.rho2 < hyper.a1 || state.rho2 > hyper.a2) return kNegInf;

  const double s = static_cast<double>(state.active_count());
  const double pu = std::pow(static_cast<double>(p), hyper.u);
  double lp = s * std::log(state.q / (1.0 - state.q)) +
              (static_cast<double>(m) + pu - 1.0) * std::log1p(-state.q);
  if (s > 0) {
    const double lambda1 = state.rho1 / sigma2_j;
    const double lambda2 = state.rho2 / sigma2_j;
    lp -= s * elastic_net_log_normalizer(hyper.alpha, lambda1, lambda2);
    lp -= hyper.alpha * lambda1 * state.theta.lpNorm<1>();
    lp -= (1.0 - hyper.alpha) * lambda2 * state.theta.squaredNorm() / 2.0;
  }
  lp -= 2.0 * std::log(hyper.a2 - hyper.a1);
  return lp;
}

double log_target_col(const ColumnState& state, Index j, const DataMatrix& data,
                      const Hyperparameters& hyper) {
  if (j < 0 || j >= data.p()) throw InvalidArgument("column index out of range");
  if (hyper.sigma2.size() != data.p()) throw InvalidArgument("sigma2 has the wrong length");
  const double sigma2_j = hyper.sigma2[j];
  const double prior = log_prior_col(state, data.p(), hyper, sigma2_j);
  return log_quasi_likelihood_col(j, state.theta, data, sigma2_j) + prior;
}

double resolve_a2(const DataMatrix& data, const Vector& sigma2) {
  if (sigma2.size() != data.p()) throw InvalidArgument("sigma2 has the wrong length");
  const double n = static_cast<double>(data.n());
  const double kappa = data.values().colwise().squaredNorm().maxCoeff() / n;
  const double log_p = std::log(static_cast<double>(data.p()));
  return 4.0 * std::sqrt(kappa * n * log_p) * sigma2.maxCoeff();
}

}  // namespace qbgraph
