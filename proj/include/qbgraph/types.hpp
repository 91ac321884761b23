#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace qbgraph {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric p x p matrix with a strictly positive diagonal.
///
/// Used both for the ground truth and for estimates. Positive definiteness is
/// not required (estimates need not be PD); `positive_definite()` reports it.
class PrecisionMatrix {
 public:
  PrecisionMatrix() = default;
  /// Throws InvalidArgument if the matrix is not square, not symmetric to
  /// 1e-12 relative tolerance, or has a non-positive diagonal entry.
  /// Throws NotPositiveDefinite if `require_pd` and a Cholesky factorization fails.
  explicit PrecisionMatrix(Matrix entries, bool require_pd = false);

  Index dim() const noexcept { return entries_.rows(); }
  const Matrix& entries() const noexcept { return entries_; }
  double operator()(Index i, Index j) const { return entries_(i, j); }
  bool positive_definite() const;

 private:
  Matrix entries_;
};

/// n x p observation matrix; rows are i.i.d. draws.
class DataMatrix {
 public:
  DataMatrix() = default;
  /// Requires n >= 2, p >= 2 and finite entries.
  explicit DataMatrix(Matrix values);

  Index n() const noexcept { return values_.rows(); }
  Index p() const noexcept { return values_.cols(); }
  const Matrix& values() const noexcept { return values_; }

  /// x^(j): the data with column j removed (n x (p-1)).
  Matrix without_column(Index j) const;

 private:
  Matrix values_;
};

struct Hyperparameters {
  double alpha = 0.9;   // elastic-net mixing, in [0, 1]
  double u = 1.5;       // sparsity exponent of the Beta(1, p^u) prior on q
  double a1 = 1e-5;     // support of the uniform prior on rho1, rho2
  double a2 = 0.0;      // resolved from data unless set (see resolve_a2)
  Vector sigma2;        // per-column variance proxies, length p
  double gamma = 0.2;   // Moreau-Yosida smoothing parameter, in (0, 1/4]

  /// Throws InvalidArgument if any bound is violated for a p-node problem.
  void validate(Index p) const;
};

/// Per-column sampler state for column j. Coordinates k = 0..p-2 index the
/// other nodes in increasing order (see neighbor_node).
struct ColumnState {
  std::vector<std::uint8_t> delta;
  Vector theta;
  double q = 0.5;
  double rho1 = 1.0;
  double rho2 = 1.0;

  Index active_count() const;
  /// theta[k] == 0 exactly when delta[k] == 0, finite theta.
  bool delta_consistent() const;
};

/// Global node index of coordinate k in the regression for column j.
constexpr Index neighbor_node(Index j, Index k) noexcept { return k < j ? k : k + 1; }

/// Coordinate of node i in the regression for column j (i != j).
constexpr Index coordinate_of(Index j, Index i) noexcept { return i < j ? i : i - 1; }

}  // namespace qbgraph
