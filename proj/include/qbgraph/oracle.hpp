#pragma once

#include "qbgraph/types.hpp"

#include <vector>

namespace qbgraph {

/// How the oracle treats rho1, rho2.
///
/// With `integrate_rho` the uniform hyperprior is integrated on a tensor grid
/// in log(rho): `panels` equal panels over [log a1, log a2], 8 Gauss-Legendre
/// nodes each (rho2 is skipped when alpha = 1 and rho1 when alpha = 0).
/// Otherwise rho1, rho2 are held at the given values.
struct GridSpec {
  bool integrate_rho = false;
  double rho1 = 1.0;
  double rho2 = 1.0;
  int panels = 16;
  double rel_tol = 1e-9;  // adaptive Gauss-Kronrod target per coefficient integral
  bool estimate_tolerance = true;  // re-run on half the panels to estimate grid error
};

struct OracleResult {
  Vector inclusion_prob;
  Vector theta_mean;  // unconditional posterior means
  double log_evidence = 0.0;  // log of the integral of exp(log_target_col)
  double tolerance = 0.0;     // estimated absolute error of probabilities and means

  /// Log posterior mass of each support, indexed by the bitmask sum_k delta_k 2^k.
  std::vector<double> model_log_mass;

  /// Posterior mass of log(rho1) in each grid panel (only when integrated);
  /// panel i covers [rho1_edges[i], rho1_edges[i + 1]] on the log scale.
  std::vector<double> rho1_panel_mass;
  std::vector<double> rho1_edges;
};

/// Exact posterior of column j for p - 1 <= 3: enumerates all supports,
/// integrates q analytically (Beta-binomial), the last active coefficient in
/// closed form and the others by adaptive Gauss-Kronrod quadrature on
/// [-R, R], R = 10 (max |OLS coefficient| + sigma_j).
/// Throws UnsupportedSize when p - 1 > 3.
OracleResult exact_marginals_small(Index j, const DataMatrix& data, const Hyperparameters& hyper,
                                   const GridSpec& grid = {});

/// The joint log density the oracle integrates, evaluated pointwise from the
/// raw data; agrees with log_target_col up to rounding.
double oracle_log_integrand(Index j, const DataMatrix& data, const Hyperparameters& hyper,
                            const ColumnState& state);

}  // namespace qbgraph
