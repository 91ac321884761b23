#pragma once

#include "qbgraph/rng.hpp"
#include "qbgraph/types.hpp"

#include <Eigen/Eigenvalues>

#include <cstdint>

namespace testutil {

using qbgraph::Index;
using qbgraph::Matrix;
using qbgraph::Vector;

// Three nodes: x1 drives x2 with coefficient 0.4, x3 carries a weak
// independent signal. Small enough for the quadrature oracle.
inline qbgraph::DataMatrix tiny_instance(std::uint64_t seed, Index n = 30) {
  qbgraph::Rng rng(seed);
  Matrix x(n, 3);
  for (Index i = 0; i < n; ++i) {
    const double a = qbgraph::draw_normal(rng);
    const double b = qbgraph::draw_normal(rng);
    x(i, 0) = a;
    x(i, 1) = 0.4 * a + qbgraph::draw_normal(rng);
    x(i, 2) = 0.2 * b + qbgraph::draw_normal(rng);
  }
  return qbgraph::DataMatrix(x);
}

inline Matrix random_spd(Index p, qbgraph::Rng& rng, double ridge = 0.1) {
  Matrix a(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) a(i, j) = qbgraph::draw_normal(rng);
  }
  Matrix m = a * a.transpose() / static_cast<double>(p);
  m.diagonal().array() += ridge;
  return 0.5 * (m + m.transpose());
}

inline Matrix random_data(Index n, Index p, std::uint64_t seed) {
  qbgraph::Rng rng(seed);
  Matrix x(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) x(i, j) = qbgraph::draw_normal(rng);
  }
  return x;
}

}  // namespace testutil
