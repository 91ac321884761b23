#pragma once

#include "qbgraph/types.hpp"

#include <cstdint>

namespace qbgraph {

enum class GeneratorKind { SettingC, HubNetwork };

struct HubLayout {
  Index modules = 5;
  Index module_size = 100;
  Index hubs_per_module = 3;
  Index hub_degree = 15;      // target; each hub draws a degree within +-2 of it
  Index max_degree = 4;       // cap for non-hub nodes
  Index nonhub_edges = 72;    // edges among non-hubs per module
  double min_partial = 0.10;  // partial-correlation magnitude range
  double max_partial = 0.67;
  double min_eigen = 0.1;     // smallest eigenvalue of the result
};

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::SettingC;
  Index p = 100;
  std::uint64_t seed = 0;
  double signal = 3.0;
  double eps = 1.0;
  HubLayout hub;
};

/// Random sparse B with 2p off-diagonal nonzeros (p symmetric pairs chosen
/// uniformly), values U(-1, 1) pushed away from zero by `signal`, then
/// theta = B + (eps - lambda_min(B)) I.
PrecisionMatrix gen_setting_c(Index p, std::uint64_t seed, double signal = 3.0, double eps = 1.0);

/// Modular hub network with unit diagonal. Within each module, hubs connect to
/// about hub_degree non-hubs and non-hubs to at most max_degree nodes; there
/// are no edges between modules. Off-diagonal entries are minus the partial
/// correlations, whose magnitudes lie in [min_partial, max_partial] and are
/// shrunk toward min_partial just enough to keep lambda_min >= min_eigen.
/// Throws InvalidArgument for an infeasible layout.
PrecisionMatrix gen_hub(const GeneratorSpec& spec);

PrecisionMatrix generate(const GeneratorSpec& spec);

/// n rows i.i.d. N(0, theta^-1): x = L^-T z with theta = L L'.
/// Throws NotPositiveDefinite if the Cholesky factorization fails.
DataMatrix sample_gaussian(const PrecisionMatrix& theta, Index n, std::uint64_t seed);

}  // namespace qbgraph
