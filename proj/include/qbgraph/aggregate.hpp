#pragma once

#include "qbgraph/orchestrator.hpp"
#include "qbgraph/types.hpp"

#include <cstdint>
#include <vector>

namespace qbgraph {

using BitMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct IntervalMatrix {
  Matrix lower;
  Matrix upper;
  BitMatrix disjoint;  // 1 where the two per-chain intervals did not overlap
};

struct GraphEstimate {
  BitMatrix delta_hat;
  PrecisionMatrix theta_hat;
  IntervalMatrix intervals;
};

/// Unit diagonal; edge (i, j) iff chain j includes i and chain i includes j,
/// both with frequency strictly above 0.5.
BitMatrix symmetrize_structure(const std::vector<ChainSummary>& summaries);

/// Diagonal 1/sigma_j^2; for an edge, the average of -theta_bar_ij / sigma_j^2
/// and -theta_bar_ji / sigma_i^2 over the unconditional chain means; 0 off the graph.
PrecisionMatrix point_estimate(const std::vector<ChainSummary>& summaries, const Vector& sigma2,
                               const BitMatrix& delta_hat);

/// For an edge, the hull of the two per-chain 95% intervals mapped through
/// z -> -z / sigma^2; [0, 0] off the graph and 1/sigma_j^2 on the diagonal.
IntervalMatrix credible_intervals(const std::vector<ChainSummary>& summaries, const Vector& sigma2,
                                  const BitMatrix& delta_hat);

GraphEstimate aggregate(const FitResult& fit);

}  // namespace qbgraph
