#pragma once

#include "qbgraph/samplers.hpp"
#include "qbgraph/types.hpp"

#include <atomic>
#include <map>
#include <string>
#include <vector>

namespace qbgraph {

struct FitResult {
  std::vector<ChainSummary> summaries;  // summaries[j] is the chain of column j
  Vector sigma2_used;
  double a2_used = 0.0;
  double wall_time = 0.0;  // seconds
  std::map<std::string, std::string> config_echo;
};

/// Runs the p column chains on `workers` threads. Column j uses seed
/// derive_seed(config.seed, j), so the result does not depend on `workers`.
/// hyper.sigma2 must hold p positive values; hyper.a2 <= 0 means resolve_a2.
/// `progress`, if given, counts completed columns.
/// Throws ColumnFailure carrying the lowest failing column index.
FitResult fit_all(const DataMatrix& data, const Hyperparameters& hyper, const ChainConfig& config,
                  unsigned workers, std::atomic<Index>* progress = nullptr);

/// Seed of the chain for column j under `base`.
std::uint64_t column_seed(std::uint64_t base, Index j) noexcept;

/// Worker count from the QBGRAPH_WORKERS environment variable, else the
/// hardware concurrency (at least 1).
unsigned default_workers();

}  // namespace qbgraph
