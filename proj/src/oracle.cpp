#include "qbgraph/oracle.hpp"

#include "qbgraph/errors.hpp"
#include "qbgraph/special.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qbgraph {
namespace {

using special::half_gauss_laplace_mean;
using special::log_add_exp;
using special::log_half_gauss_laplace;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Integral {
  double log_z = 0.0;
  Vector mean;
  double rel_err = 0.0;
};

struct Settings {
  double lambda = 0.0;  // l1 weight alpha * rho1 / sigma2
  double radius = 0.0;
  double rel_tol = 1e-9;
};

// Result of integrating out the trailing coordinates for a fixed leading one.
// At most two trailing coordinates occur (p - 1 <= 3).
struct Tail {
  double log_z = 0.0;
  double mean[2] = {0.0, 0.0};
};

// Closed form over R of exp(-a t^2 + b t - lambda |t|).
Tail integrate_last(double a, double b, double lambda, bool with_mean) {
  const double lz_pos = log_half_gauss_laplace(a, lambda - b);
  const double lz_neg = log_half_gauss_laplace(a, lambda + b);
  Tail out;
  out.log_z = log_add_exp(lz_pos, lz_neg);
  if (!with_mean) return out;
  out.mean[0] = std::exp(lz_pos - out.log_z) * half_gauss_laplace_mean(a, lambda - b) -
                std::exp(lz_neg - out.log_z) * half_gauss_laplace_mean(a, lambda + b);
  return out;
}

Integral integrate_model(const Matrix& P, const Vector& h, const Settings& cfg);

// Integrates the leading coordinate of exp(-theta'P theta / 2 + h'theta -
// lambda ||theta||_1) by adaptive Gauss-Kronrod, with `inner(t)` giving the
// integral over the remaining coordinates at theta_0 = t (means only when
// `inner(t, true)`).
template <class Inner>
Integral integrate_leading(const Matrix& P, const Vector& h, const Settings& cfg,
                           const Inner& inner) {
  const Index s = P.rows();
  auto log_integrand = [&](double t, const Tail& sub) {
    return -0.5 * P(0, 0) * t * t + h[0] * t - cfg.lambda * std::abs(t) + sub.log_z;
  };

  // Location and scale of the unpenalized Gaussian, used to place breakpoints.
  const Matrix reg = P + 1e-12 * P.diagonal().cwiseAbs().maxCoeff() * Matrix::Identity(s, s);
  const Eigen::LDLT<Matrix> ldlt(reg);
  const double center = ldlt.solve(h)[0];
  const double sd = std::sqrt(std::max(ldlt.solve(Vector::Unit(s, 0))[0], 1e-300));

  const double lo = std::max(-cfg.radius, std::min(0.0, center) - 12.0 * sd);
  const double hi = std::min(cfg.radius, std::max(0.0, center) + 12.0 * sd);
  double shift = kNegInf;
  double mode = 0.0;
  constexpr int kScan = 32;
  for (int i = 0; i <= kScan + 1; ++i) {
    const double t = i <= kScan ? lo + (hi - lo) * i / kScan : 0.0;
    const double v = log_integrand(t, inner(t, false));
    if (v > shift) {
      shift = v;
      mode = t;
    }
  }

  // The integrand is log-concave in t, so beyond the first point where it falls
  // e^-36 below the peak it only decreases; the truncated mass is negligible.
  constexpr double kDrop = 36.0;
  auto edge = [&](double direction) {
    double t = mode;
    for (int step = 1; step <= 4096; ++step) {
      t = std::clamp(mode + direction * step * sd, -cfg.radius, cfg.radius);
      if (std::abs(t) == cfg.radius || log_integrand(t, inner(t, false)) - shift < -kDrop) break;
    }
    return t;
  };
  const double t_lo = edge(-1.0);
  const double t_hi = edge(1.0);
  std::vector<double> cuts = {t_lo, t_hi, mode};
  if (t_lo < 0.0 && 0.0 < t_hi) cuts.push_back(0.0);
  for (double k : {-4.0, 4.0}) {
    const double c = mode + k * sd;
    if (t_lo < c && c < t_hi) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  constexpr unsigned kDepth = 12;
  double z = 0.0;
  double z_err = 0.0;
  Vector moments = Vector::Zero(s);
  for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    const double a = cuts[seg];
    const double b = cuts[seg + 1];
    double err = 0.0;
    z += GK::integrate(
        [&](double t) { return std::exp(log_integrand(t, inner(t, false)) - shift); }, a, b, kDepth,
        cfg.rel_tol, &err);
    z_err += err;
    moments[0] += GK::integrate(
        [&](double t) { return t * std::exp(log_integrand(t, inner(t, false)) - shift); }, a, b,
        kDepth,
        cfg.rel_tol);
    for (Index r = 1; r < s; ++r) {
      moments[r] += GK::integrate(
          [&](double t) {
            const Tail sub = inner(t, true);
            return sub.mean[r - 1] * std::exp(log_integrand(t, sub) - shift);
          },
          a, b, kDepth, cfg.rel_tol);
    }
  }
  Integral out;
  out.log_z = shift + std::log(z);
  out.mean = moments / z;
  out.rel_err = z_err / z;
  return out;
}

// log of the integral over R^s of exp(-theta'P theta / 2 + h'theta - lambda ||theta||_1)
// and the mean of theta under the normalized density. The last coordinate is
// integrated in closed form, leading coordinates by adaptive quadrature.
Integral integrate_model(const Matrix& P, const Vector& h, const Settings& cfg) {
  const Index s = P.rows();
  Integral out;
  out.mean = Vector::Zero(s);
  if (s == 0) return out;
  if (s == 1) {
    const Tail t = integrate_last(P(0, 0) / 2.0, h[0], cfg.lambda, true);
    out.log_z = t.log_z;
    out.mean[0] = t.mean[0];
    return out;
  }
  if (s == 2) {
    const double a = P(1, 1) / 2.0;
    const double cross = P(1, 0);
    const double h1 = h[1];
    return integrate_leading(P, h, cfg, [&](double t, bool with_mean) {
      return integrate_last(a, h1 - cross * t, cfg.lambda, with_mean);
    });
  }
  const Matrix p_rest = P.bottomRightCorner(s - 1, s - 1);
  const Vector p_cross = P.col(0).tail(s - 1);
  const Vector h_rest = h.tail(s - 1);
  return integrate_leading(P, h, cfg, [&](double t, bool) {
    const Integral sub = integrate_model(p_rest, h_rest - p_cross * t, cfg);
    Tail out;
    out.log_z = sub.log_z;
    for (Index r = 0; r < sub.mean.size() && r < 2; ++r) out.mean[r] = sub.mean[r];
    return out;
  });
}

struct ColumnData {
  Index m = 0;
  Index p = 0;
  double sigma2 = 1.0;
  Matrix gram;
  Vector xty;
  double yty = 0.0;
  double radius = 0.0;
};

ColumnData column_data(Index j, const DataMatrix& data, double sigma2) {
  const Matrix x = data.without_column(j);
  const Vector y = data.values().col(j);
  ColumnData c;
  c.p = data.p();
  c.m = c.p - 1;
  c.sigma2 = sigma2;
  c.gram = x.transpose() * x;
  c.xty = x.transpose() * y;
  c.yty = y.squaredNorm();
  const Vector ols = c.gram.completeOrthogonalDecomposition().solve(c.xty);
  c.radius = 10.0 * (ols.cwiseAbs().maxCoeff() + std::sqrt(sigma2));
  return c;
}

struct Node {
  double log_rho = 0.0;
  double log_weight = 0.0;  // quadrature weight times prior density (log)
  int panel = 0;
};

std::vector<Node> rho_nodes(bool integrate, double fixed, double a1, double a2, int panels) {
  const double log_density = -std::log(a2 - a1);
  if (!integrate) return {Node{std::log(fixed), log_density, 0}};
  using GL = boost::math::quadrature::gauss<double, 8>;
  const double lo = std::log(a1);
  const double width = (std::log(a2) - lo) / panels;
  std::vector<Node> nodes;
  for (int panel = 0; panel < panels; ++panel) {
    const double mid = lo + (panel + 0.5) * width;
    const double half = width / 2.0;
    for (std::size_t i = 0; i < GL::abscissa().size(); ++i) {
      const double x = GL::abscissa()[i];
      const double w = GL::weights()[i];
      for (double sign : {1.0, -1.0}) {
        if (x == 0.0 && sign < 0.0) continue;
        const double u = mid + sign * half * x;
        // Uniform prior on rho, integrated in u = log(rho): Jacobian exp(u).
        nodes.push_back({u, std::log(half * w) + u + log_density, panel});
      }
    }
  }
  return nodes;
}

OracleResult run_grid(const ColumnData& col, const Hyperparameters& hyper, const GridSpec& grid,
                      int panels) {
  const Index m = col.m;
  const double sigma2 = col.sigma2;
  const double pu = std::pow(static_cast<double>(col.p), hyper.u);
  const bool rho1_matters = hyper.alpha > 0.0;
  const bool rho2_matters = hyper.alpha < 1.0;

  // A rho that does not enter the target is integrated out exactly (its
  // uniform density integrates to one), so it contributes a single node.
  auto nodes_for = [&](bool matters, double fixed) {
    if (grid.integrate_rho && !matters) return std::vector<Node>{Node{std::log(fixed), 0.0, 0}};
    return rho_nodes(grid.integrate_rho, fixed, hyper.a1, hyper.a2, panels);
  };
  const std::vector<Node> nodes1 = nodes_for(rho1_matters, grid.rho1);
  const std::vector<Node> nodes2 = nodes_for(rho2_matters, grid.rho2);

  const auto models = static_cast<Index>(1) << m;
  std::vector<std::vector<Index>> active(static_cast<std::size_t>(models));
  std::vector<double> log_model_prior(static_cast<std::size_t>(models));
  for (Index mask = 0; mask < models; ++mask) {
    for (Index k = 0; k < m; ++k) {
      if (mask & (Index{1} << k)) active[static_cast<std::size_t>(mask)].push_back(k);
    }
    const auto s = static_cast<double>(active[static_cast<std::size_t>(mask)].size());
    // integral over q of q^s (1 - q)^(m - s + p^u - 1)
    log_model_prior[static_cast<std::size_t>(mask)] =
        std::lgamma(1.0 + s) + std::lgamma(static_cast<double>(m) - s + pu) -
        std::lgamma(1.0 + static_cast<double>(m) + pu);
  }

  struct Term {
    Index mask;
    int panel;
    double log_w;
    Vector mean;
  };
  std::vector<Term> terms;
  terms.reserve(nodes1.size() * nodes2.size() * static_cast<std::size_t>(models));
  double max_rel_err = 0.0;

  for (const Node& n1 : nodes1) {
    for (const Node& n2 : nodes2) {
      const double lambda1 = std::exp(n1.log_rho) / sigma2;
      const double lambda2 = std::exp(n2.log_rho) / sigma2;
      double log_c = 0.0;
      const double a = hyper.alpha;
      if (a == 1.0) {
        log_c = std::log(2.0 / lambda1);
      } else {
        log_c = 0.5 * std::log(2.0 * std::numbers::pi / ((1.0 - a) * lambda2)) +
                special::log_erfcx(a * lambda1 / std::sqrt(2.0 * (1.0 - a) * lambda2));
      }
      Settings cfg{a * lambda1, col.radius, grid.rel_tol};
      for (Index mask = 0; mask < models; ++mask) {
        const auto& act = active[static_cast<std::size_t>(mask)];
        const auto s = static_cast<Index>(act.size());
        Matrix P(s, s);
        Vector h(s);
        for (Index r = 0; r < s; ++r) {
          h[r] = col.xty[act[r]] / sigma2;
          for (Index c = 0; c < s; ++c) P(r, c) = col.gram(act[r], act[c]) / sigma2;
          P(r, r) += (1.0 - a) * lambda2;
        }
        const Integral in = integrate_model(P, h, cfg);
        max_rel_err = std::max(max_rel_err, in.rel_err);
        const double log_w = log_model_prior[static_cast<std::size_t>(mask)] -
                             static_cast<double>(s) * log_c + in.log_z -
                             col.yty / (2.0 * sigma2) + n1.log_weight + n2.log_weight;
        Vector mean = Vector::Zero(m);
        for (Index r = 0; r < s; ++r) mean[act[r]] = in.mean[r];
        terms.push_back({mask, n1.panel, log_w, std::move(mean)});
      }
    }
  }

  double log_total = kNegInf;
  for (const Term& t : terms) log_total = log_add_exp(log_total, t.log_w);

  OracleResult out;
  out.log_evidence = log_total;
  out.inclusion_prob = Vector::Zero(m);
  out.theta_mean = Vector::Zero(m);
  out.model_log_mass.assign(static_cast<std::size_t>(models), kNegInf);
  const bool rho1_grid = grid.integrate_rho && rho1_matters;
  if (rho1_grid) out.rho1_panel_mass.assign(static_cast<std::size_t>(panels), 0.0);
  for (const Term& t : terms) {
    const double w = std::exp(t.log_w - log_total);
    auto& mass = out.model_log_mass[static_cast<std::size_t>(t.mask)];
    mass = log_add_exp(mass, t.log_w - log_total);
    for (Index k = 0; k < m; ++k) {
      if (t.mask & (Index{1} << k)) out.inclusion_prob[k] += w;
    }
    out.theta_mean += w * t.mean;
    if (rho1_grid) out.rho1_panel_mass[static_cast<std::size_t>(t.panel)] += w;
  }
  if (rho1_grid) {
    const double lo = std::log(hyper.a1);
    const double width = (std::log(hyper.a2) - lo) / panels;
    for (int i = 0; i <= panels; ++i) out.rho1_edges.push_back(lo + i * width);
  }
  out.inclusion_prob = out.inclusion_prob.cwiseMax(0.0).cwiseMin(1.0);
  out.tolerance = max_rel_err + 1e-12;
  return out;
}

}  // namespace

OracleResult exact_marginals_small(Index j, const DataMatrix& data, const Hyperparameters& hyper,
                                   const GridSpec& grid) {
  if (data.p() - 1 > 3) {
    throw UnsupportedSize("the exact oracle supports at most 3 predictors, got " +
                          std::to_string(data.p() - 1));
  }
  if (j < 0 || j >= data.p()) throw InvalidArgument("column index out of range");
  hyper.validate(data.p());
  if (grid.panels < 1) throw InvalidArgument("grid needs at least one panel");
  if (!grid.integrate_rho) {
    for (double r : {grid.rho1, grid.rho2}) {
      if (!(r >= hyper.a1 && r <= hyper.a2)) throw InvalidArgument("fixed rho outside [a1, a2]");
    }
  }

  const ColumnData col = column_data(j, data, hyper.sigma2[j]);
  OracleResult out = run_grid(col, hyper, grid, grid.panels);
  if (grid.integrate_rho && grid.estimate_tolerance && grid.panels >= 2) {
    const OracleResult coarse = run_grid(col, hyper, grid, grid.panels / 2);
    const double diff = std::max((out.inclusion_prob - coarse.inclusion_prob).cwiseAbs().maxCoeff(),
                                 (out.theta_mean - coarse.theta_mean).cwiseAbs().maxCoeff());
    out.tolerance += diff;
  }
  return out;
}

double oracle_log_integrand(Index j, const DataMatrix& data, const Hyperparameters& hyper,
                            const ColumnState& state) {
  const Matrix& x = data.values();
  const Index n = data.n();
  const Index p = data.p();
  const Index m = p - 1;
  const double sigma2 = hyper.sigma2[j];

  double rss = 0.0;
  for (Index i = 0; i < n; ++i) {
    double r = x(i, j);
    for (Index k = 0; k < m; ++k) r -= state.theta[k] * x(i, k < j ? k : k + 1);
    rss += r * r;
  }
  if (state.rho1 < hyper.a1 || state.rho1 > hyper.a2 || state.rho2 < hyper.a1 ||
      state.rho2 > hyper.a2) {
    return kNegInf;
  }

  double s = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  for (Index k = 0; k < m; ++k) {
    s += state.delta[static_cast<std::size_t>(k)] ? 1.0 : 0.0;
    l1 += std::abs(state.theta[k]);
    l2 += state.theta[k] * state.theta[k];
  }
  const double a = hyper.alpha;
  const double lambda1 = state.rho1 / sigma2;
  const double lambda2 = state.rho2 / sigma2;
  double log_c = 0.0;
  if (a == 1.0) {
    log_c = std::log(2.0 * sigma2 / state.rho1);
  } else {
    const double arg = a * lambda1 / std::sqrt(2.0 * (1.0 - a) * lambda2);
    const double log_erfcx =
        arg < 25.0 ? arg * arg + std::log(boost::math::erfc(arg))
                   : -std::log(arg * std::sqrt(std::numbers::pi)) +
                         std::log1p(-1.0 / (2.0 * arg * arg) + 3.0 / (4.0 * std::pow(arg, 4)) -
                                    15.0 / (8.0 * std::pow(arg, 6)) + 105.0 / (16.0 * std::pow(arg, 8)));
    log_c = 0.5 * std::log(2.0 * std::numbers::pi / ((1.0 - a) * lambda2)) + log_erfcx;
  }
  const double pu = std::pow(static_cast<double>(p), hyper.u);
  return -rss / (2.0 * sigma2) + s * std::log(state.q) +
         (static_cast<double>(m) - s + pu - 1.0) * std::log(1.0 - state.q) - s * log_c -
         a * lambda1 * l1 - (1.0 - a) * lambda2 * l2 / 2.0 - 2.0 * std::log(hyper.a2 - hyper.a1);
}

}  // namespace qbgraph
