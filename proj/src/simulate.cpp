#include "qbgraph/simulate.hpp"

#include "qbgraph/errors.hpp"
#include "qbgraph/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

namespace qbgraph {
namespace {

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

// Unordered pair index -> (i, j), i < j, enumerating (0,1), (0,2), ..., (1,2), ...
std::pair<Index, Index> pair_at(Index idx, Index p) {
  Index i = 0;
  Index row = p - 1;
  while (idx >= row) {
    idx -= row;
    ++i;
    --row;
  }
  return {i, i + 1 + idx};
}

struct Edge {
  Index a;
  Index b;
};

}  // namespace

PrecisionMatrix gen_setting_c(Index p, std::uint64_t seed, double signal, double eps) {
  if (p < 4) throw InvalidArgument("setting (c) needs p >= 4");
  if (!(signal >= 0.0) || !(eps > 0.0)) throw InvalidArgument("signal must be >= 0 and eps > 0");
  Rng rng(seed);
  const Index pairs = p * (p - 1) / 2;
  const Index wanted = std::min(p, pairs);

  // Partial Fisher-Yates over all unordered pairs.
  std::vector<Index> pool(static_cast<std::size_t>(pairs));
  std::iota(pool.begin(), pool.end(), Index{0});
  Matrix b = Matrix::Zero(p, p);
  for (Index e = 0; e < wanted; ++e) {
    const Index pick = e + draw_index(rng, pairs - e);
    std::swap(pool[static_cast<std::size_t>(e)], pool[static_cast<std::size_t>(pick)]);
    const auto [i, j] = pair_at(pool[static_cast<std::size_t>(e)], p);
    const double base = 2.0 * draw_uniform(rng) - 1.0;
    const double value = base < 0.0 ? base - signal : base + signal;
    b(i, j) = b(j, i) = value;
  }
  const double shift = eps - min_eigenvalue(b);
  b.diagonal().array() += shift;
  return PrecisionMatrix(std::move(b), true);
}

PrecisionMatrix gen_hub(const GeneratorSpec& spec) {
  const HubLayout& h = spec.hub;
  if (h.modules < 1 || h.module_size < 2 || spec.p != h.modules * h.module_size) {
    throw InvalidArgument("hub layout needs p = modules * module_size");
  }
  const Index nonhubs = h.module_size - h.hubs_per_module;
  if (h.hubs_per_module < 0 || nonhubs < 1 || h.max_degree < 1) {
    throw InvalidArgument("hub layout needs at least one non-hub per module");
  }
  if (h.hub_degree + 2 > nonhubs ||
      h.hubs_per_module * (h.hub_degree + 2) > nonhubs * h.max_degree) {
    throw InvalidArgument("hub degrees cannot be met under the non-hub degree cap");
  }
  if (!(0.0 < h.min_partial && h.min_partial <= h.max_partial && h.max_partial < 1.0)) {
    throw InvalidArgument("partial-correlation range must satisfy 0 < min <= max < 1");
  }
  if (!(h.min_eigen > 0.0 && h.min_eigen < 1.0)) throw InvalidArgument("min_eigen must lie in (0, 1)");

  Rng rng(spec.seed);
  std::vector<Edge> edges;
  std::vector<Index> degree(static_cast<std::size_t>(spec.p), 0);
  std::set<std::pair<Index, Index>> seen;
  auto connect = [&](Index a, Index b) {
    if (a > b) std::swap(a, b);
    if (a == b || !seen.insert({a, b}).second) return false;
    edges.push_back({a, b});
    ++degree[static_cast<std::size_t>(a)];
    ++degree[static_cast<std::size_t>(b)];
    return true;
  };

  for (Index mod = 0; mod < h.modules; ++mod) {
    std::vector<Index> nodes(static_cast<std::size_t>(h.module_size));
    std::iota(nodes.begin(), nodes.end(), mod * h.module_size);
    for (Index i = h.module_size - 1; i > 0; --i) {
      std::swap(nodes[static_cast<std::size_t>(i)],
                nodes[static_cast<std::size_t>(draw_index(rng, i + 1))]);
    }
    const std::vector<Index> hubs(nodes.begin(), nodes.begin() + h.hubs_per_module);
    const std::vector<Index> others(nodes.begin() + h.hubs_per_module, nodes.end());

    for (Index hub : hubs) {
      const Index target = h.hub_degree - 2 + draw_index(rng, 5);
      std::vector<Index> open;
      for (Index v : others) {
        if (degree[static_cast<std::size_t>(v)] < h.max_degree) open.push_back(v);
      }
      for (Index k = 0; k < target && !open.empty(); ++k) {
        const Index pick = draw_index(rng, static_cast<Index>(open.size()));
        connect(hub, open[static_cast<std::size_t>(pick)]);
        open.erase(open.begin() + pick);
      }
    }

    Index added = 0;
    for (Index attempt = 0; attempt < 200 * h.nonhub_edges && added < h.nonhub_edges; ++attempt) {
      const Index a = others[static_cast<std::size_t>(draw_index(rng, nonhubs))];
      const Index b = others[static_cast<std::size_t>(draw_index(rng, nonhubs))];
      if (degree[static_cast<std::size_t>(a)] >= h.max_degree ||
          degree[static_cast<std::size_t>(b)] >= h.max_degree) {
        continue;
      }
      if (connect(a, b)) ++added;
    }
  }

  std::vector<double> magnitude(edges.size());
  std::vector<double> sign(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    magnitude[e] = h.min_partial + (h.max_partial - h.min_partial) * draw_uniform(rng);
    sign[e] = draw_uniform(rng) < 0.5 ? -1.0 : 1.0;
  }

  // Modules are disconnected, so lambda_min is the minimum over module blocks.
  auto build = [&](double shrink) {
    Matrix theta = Matrix::Identity(spec.p, spec.p);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double r = h.min_partial + shrink * (magnitude[e] - h.min_partial);
      theta(edges[e].a, edges[e].b) = theta(edges[e].b, edges[e].a) = -sign[e] * r;
    }
    return theta;
  };
  auto lambda_min = [&](const Matrix& theta) {
    double lo = std::numeric_limits<double>::infinity();
    for (Index mod = 0; mod < h.modules; ++mod) {
      const Index base = mod * h.module_size;
      lo = std::min(lo, min_eigenvalue(theta.block(base, base, h.module_size, h.module_size)));
    }
    return lo;
  };

  Matrix theta = build(1.0);
  if (lambda_min(theta) < h.min_eigen) {
    if (lambda_min(build(0.0)) < h.min_eigen) {
      throw InvalidArgument("minimum partial correlation is too large for a positive-definite hub network");
    }
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (lambda_min(build(mid)) >= h.min_eigen ? lo : hi) = mid;
    }
    theta = build(lo);
  }
  return PrecisionMatrix(std::move(theta), true);
}

PrecisionMatrix generate(const GeneratorSpec& spec) {
  if (spec.kind == GeneratorKind::SettingC) {
    return gen_setting_c(spec.p, spec.seed, spec.signal, spec.eps);
  }
  return gen_hub(spec);
}

DataMatrix sample_gaussian(const PrecisionMatrix& theta, Index n, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("sample size must be at least 2");
  const Index p = theta.dim();
  Eigen::LLT<Matrix> llt(theta.entries());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("precision matrix is not positive definite");
  }
  Rng rng(seed);
  Matrix zt(p, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) zt(j, i) = draw_normal(rng);
  }
  // Solve L' x_i = z_i for every row at once.
  Matrix xt = llt.matrixU().solve(zt);
  return DataMatrix(xt.transpose());
}

}  // namespace qbgraph
