#include "qbgraph/types.hpp"

#include "qbgraph/errors.hpp"

#include <cmath>
#include <string>

namespace qbgraph {

PrecisionMatrix::PrecisionMatrix(Matrix entries, bool require_pd) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
    throw InvalidArgument("precision matrix must be square and non-empty");
  }
  const Index p = entries_.rows();
  const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
  for (Index i = 0; i < p; ++i) {
    if (!(entries_(i, i) > 0.0) || !std::isfinite(entries_(i, i))) {
      throw InvalidArgument("precision matrix diagonal entry " + std::to_string(i) +
                            " is not strictly positive");
    }
    for (Index j = i + 1; j < p; ++j) {
      if (!std::isfinite(entries_(i, j)) ||
          std::abs(entries_(i, j) - entries_(j, i)) > 1e-12 * scale) {
        throw InvalidArgument("precision matrix is not symmetric at (" + std::to_string(i) +
                              "," + std::to_string(j) + ")");
      }
    }
  }
  if (require_pd && !positive_definite()) {
    throw NotPositiveDefinite("precision matrix is not positive definite");
  }
}

bool PrecisionMatrix::positive_definite() const {
  Eigen::LLT<Matrix> llt(entries_);
  return llt.info() == Eigen::Success;
}

DataMatrix::DataMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 2 || values_.cols() < 2) {
    throw InvalidArgument("data matrix needs n >= 2 and p >= 2, got " +
                          std::to_string(values_.rows()) + "x" + std::to_string(values_.cols()));
  }
  if (!values_.allFinite()) throw InvalidArgument("data matrix has non-finite entries");
}

Matrix DataMatrix::without_column(Index j) const {
  if (j < 0 || j >= p()) throw InvalidArgument("column index out of range");
  Matrix out(n(), p() - 1);
  for (Index k = 0; k < p() - 1; ++k) out.col(k) = values_.col(neighbor_node(j, k));
  return out;
}

void Hyperparameters::validate(Index p) const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  if (!(u > 1.0)) throw InvalidArgument("u must exceed 1");
  if (!(a1 > 0.0)) throw InvalidArgument("a1 must be positive");
  if (!(a2 > a1) || !std::isfinite(a2)) throw InvalidArgument("a2 must be finite and exceed a1");
  if (!(gamma > 0.0 && gamma <= 0.25)) throw InvalidArgument("gamma must lie in (0, 0.25]");
  if (sigma2.size() != p) {
    throw InvalidArgument("sigma2 has length " + std::to_string(sigma2.size()) + ", expected " +
                          std::to_string(p));
  }
  for (Index j = 0; j < p; ++j) {
    if (!(sigma2[j] > 0.0) || !std::isfinite(sigma2[j])) {
      throw InvalidArgument("sigma2[" + std::to_string(j) + "] must be positive");
    }
  }
}

Index ColumnState::active_count() const {
  Index s = 0;
  for (auto d : delta) s += d != 0;
  return s;
}

bool ColumnState::delta_consistent() const {
  if (static_cast<Index>(delta.size()) != theta.size()) return false;
  for (Index k = 0; k < theta.size(); ++k) {
    if (!std::isfinite(theta[k])) return false;
    if ((delta[k] == 0) != (theta[k] == 0.0)) return false;
  }
  return true;
}

}  // namespace qbgraph
