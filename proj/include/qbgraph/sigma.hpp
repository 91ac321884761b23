#pragma once

#include "qbgraph/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace qbgraph {

enum class SigmaMode { Known, EmpiricalCV };

struct SigmaSpec {
  SigmaMode mode = SigmaMode::Known;
  std::optional<Vector> known_values;  // required in Known mode
  int folds = 10;
  /// Descending penalties. Empty means 50 log-spaced values from lambda_max
  /// down to 1e-3 lambda_max, computed per column.
  std::vector<double> lambda_grid;
  std::uint64_t seed = 0;

  void validate(Index p) const;
};

/// Minimizer of (1/(2n)) ||y - X b||^2 + lambda ||b||_1 by cyclic coordinate
/// descent, run until every KKT condition holds to ~1e-10.
/// Throws InvalidArgument for non-finite input, an all-zero column or a
/// negative lambda.
Vector lasso_cd(const Vector& y, const Matrix& X, double lambda);

/// Same problem given gram = X'X, xty = X'y and n. `warm` seeds the descent.
/// If `objective_trace` is given, the objective minus y'y/(2n) is appended
/// after every sweep.
Vector lasso_cd_gram(const Matrix& gram, const Vector& xty, Index n, double lambda,
                     const Vector& warm = Vector(), std::vector<double>* objective_trace = nullptr);

/// max_k |x_k' y| / n: the smallest lambda with an all-zero solution.
double lasso_lambda_max(const Vector& xty, Index n);

/// `count` log-spaced values from lambda_max down to ratio * lambda_max.
std::vector<double> lasso_lambda_grid(double lambda_max, int count = 50, double ratio = 1e-3);

/// Residual variance of the lasso regression of column j on the others, with
/// lambda chosen by K-fold cross-validation: RSS / (n - s_hat), at least 1e-8.
/// Known mode returns known_values[j]. Throws DegenerateFit if s_hat >= n.
double estimate_sigma2_cv(const DataMatrix& data, Index j, const SigmaSpec& spec);

/// sigma_j^2 for every column. In CV mode the fold Gram matrices are shared
/// across columns and columns run on `workers` threads.
Vector resolve_sigma2(const DataMatrix& data, const SigmaSpec& spec, unsigned workers = 1);

}  // namespace qbgraph
