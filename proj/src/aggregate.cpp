#include "qbgraph/aggregate.hpp"

#include "qbgraph/errors.hpp"

#include <algorithm>

namespace qbgraph {
namespace {

void check_shapes(const std::vector<ChainSummary>& summaries, const Vector& sigma2,
                  const BitMatrix& delta_hat) {
  const Index p = static_cast<Index>(summaries.size());
  if (sigma2.size() != p || delta_hat.rows() != p || delta_hat.cols() != p) {
    throw InvalidArgument("summaries, sigma2 and structure sizes disagree");
  }
}

}  // namespace

BitMatrix symmetrize_structure(const std::vector<ChainSummary>& summaries) {
  const Index p = static_cast<Index>(summaries.size());
  for (const auto& s : summaries) {
    if (s.inclusion_freq.size() != p - 1) throw InvalidArgument("summary has the wrong dimension");
  }
  BitMatrix delta = BitMatrix::Zero(p, p);
  for (Index i = 0; i < p; ++i) {
    delta(i, i) = 1;
    for (Index j = i + 1; j < p; ++j) {
      const double i_in_j = summaries[static_cast<std::size_t>(j)].inclusion_freq[coordinate_of(j, i)];
      const double j_in_i = summaries[static_cast<std::size_t>(i)].inclusion_freq[coordinate_of(i, j)];
      if (i_in_j > 0.5 && j_in_i > 0.5) delta(i, j) = delta(j, i) = 1;
    }
  }
  return delta;
}

PrecisionMatrix point_estimate(const std::vector<ChainSummary>& summaries, const Vector& sigma2,
                               const BitMatrix& delta_hat) {
  check_shapes(summaries, sigma2, delta_hat);
  const Index p = sigma2.size();
  Matrix theta = Matrix::Zero(p, p);
  for (Index j = 0; j < p; ++j) {
    theta(j, j) = 1.0 / sigma2[j];
    for (Index i = j + 1; i < p; ++i) {
      if (!delta_hat(i, j)) continue;
      const double from_j = -summaries[static_cast<std::size_t>(j)].theta_mean[coordinate_of(j, i)] / sigma2[j];
      const double from_i = -summaries[static_cast<std::size_t>(i)].theta_mean[coordinate_of(i, j)] / sigma2[i];
      theta(i, j) = theta(j, i) = 0.5 * from_j + 0.5 * from_i;
    }
  }
  return PrecisionMatrix(std::move(theta));
}

IntervalMatrix credible_intervals(const std::vector<ChainSummary>& summaries, const Vector& sigma2,
                                  const BitMatrix& delta_hat) {
  check_shapes(summaries, sigma2, delta_hat);
  const Index p = sigma2.size();
  IntervalMatrix out{Matrix::Zero(p, p), Matrix::Zero(p, p), BitMatrix::Zero(p, p)};
  for (Index j = 0; j < p; ++j) {
    out.lower(j, j) = out.upper(j, j) = 1.0 / sigma2[j];
    for (Index i = j + 1; i < p; ++i) {
      if (!delta_hat(i, j)) continue;
      const ChainSummary& cj = summaries[static_cast<std::size_t>(j)];
      const ChainSummary& ci = summaries[static_cast<std::size_t>(i)];
      const Index kj = coordinate_of(j, i);
      const Index ki = coordinate_of(i, j);
      // Negative scaling swaps the quantile ends.
      const double lo_j = -cj.theta_q975[kj] / sigma2[j];
      const double hi_j = -cj.theta_q025[kj] / sigma2[j];
      const double lo_i = -ci.theta_q975[ki] / sigma2[i];
      const double hi_i = -ci.theta_q025[ki] / sigma2[i];
      out.lower(i, j) = out.lower(j, i) = std::min(lo_j, lo_i);
      out.upper(i, j) = out.upper(j, i) = std::max(hi_j, hi_i);
      out.disjoint(i, j) = out.disjoint(j, i) = (hi_j < lo_i || hi_i < lo_j) ? 1 : 0;
    }
  }
  return out;
}

GraphEstimate aggregate(const FitResult& fit) {
  GraphEstimate est;
  est.delta_hat = symmetrize_structure(fit.summaries);
  est.theta_hat = point_estimate(fit.summaries, fit.sigma2_used, est.delta_hat);
  est.intervals = credible_intervals(fit.summaries, fit.sigma2_used, est.delta_hat);
  return est;
}

}  // namespace qbgraph
