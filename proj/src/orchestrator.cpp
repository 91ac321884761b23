#include "qbgraph/orchestrator.hpp"

#include "qbgraph/core_model.hpp"
#include "qbgraph/errors.hpp"
#include "qbgraph/parallel.hpp"
#include "qbgraph/rng.hpp"

#include <chrono>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

namespace qbgraph {

std::uint64_t column_seed(std::uint64_t base, Index j) noexcept {
  return derive_seed(base, static_cast<std::uint64_t>(j));
}

unsigned default_workers() {
  if (const char* env = std::getenv("QBGRAPH_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

FitResult fit_all(const DataMatrix& data, const Hyperparameters& hyper, const ChainConfig& config,
                  unsigned workers, std::atomic<Index>* progress) {
  const Index p = data.p();
  if (workers < 1) throw InvalidArgument("worker count must be positive");
  if (hyper.sigma2.size() != p) throw InvalidArgument("sigma2 must be resolved for every column");
  config.validate();
  Hyperparameters resolved = hyper;
  if (!(resolved.a2 > 0.0)) resolved.a2 = resolve_a2(data, hyper.sigma2);
  resolved.validate(p);

  const auto start = std::chrono::steady_clock::now();
  const Matrix gram = data.values().transpose() * data.values();
  FitResult result;
  result.summaries.resize(static_cast<std::size_t>(p));
  parallel_for(
      p, workers,
      [&](Index j) {
        try {
          ChainConfig column_config = config;
          column_config.seed = column_seed(config.seed, j);
          result.summaries[static_cast<std::size_t>(j)] =
              run_chain(ColumnProblem::from_gram(j, gram, resolved.sigma2[j]), resolved, column_config);
        } catch (const std::exception& e) {
          throw ColumnFailure(static_cast<std::size_t>(j), e.what());
        }
      },
      progress);

  result.sigma2_used = resolved.sigma2;
  result.a2_used = resolved.a2;
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace qbgraph
