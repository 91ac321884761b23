#pragma once

#include "qbgraph/types.hpp"

#include <cstdint>
#include <random>

namespace qbgraph {

// The engine is fully specified by the standard; draws go through Boost.Random
// distributions, whose algorithms are fixed across platforms and library
// versions (std:: distributions are implementation-defined).
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for stream `stream` (e.g. a column index) under `base`.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  return splitmix64(base ^ splitmix64(stream));
}

double draw_normal(Rng& rng);
double draw_uniform(Rng& rng);  // in [0, 1)
double draw_beta(Rng& rng, double a, double b);
Index draw_index(Rng& rng, Index n);  // uniform on {0, ..., n-1}

}  // namespace qbgraph
