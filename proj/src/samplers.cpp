#include "qbgraph/samplers.hpp"

#include "qbgraph/core_model.hpp"
#include "qbgraph/diagnostics.hpp"
#include "qbgraph/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qbgraph {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kRwTarget = 0.44;
constexpr double kMalaTarget = 0.574;

double reflect(double x, double lo, double hi) {
  while (x < lo || x > hi) {
    if (x > hi) x = 2.0 * hi - x;
    if (x < lo) x = 2.0 * lo - x;
  }
  return x;
}

double clamp_q(double q) {
  return std::clamp(q, std::numeric_limits<double>::min(), 1.0 - 1e-16);
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 0.25)) throw InvalidArgument("gamma must lie in (0, 0.25]");
}

double adapt_gain(std::int64_t iteration) {
  return std::pow(static_cast<double>(iteration) + 1.0, -0.6);
}

}  // namespace

const char* kernel_name(KernelKind kind) noexcept {
  return kind == KernelKind::ExactRJ ? "exact" : "my";
}

void ChainConfig::validate() const {
  if (n_iterations < 1) throw InvalidArgument("n_iterations must be positive");
  if (burn_in < 0) throw InvalidArgument("burn_in must be nonnegative");
  if (burn_in >= n_iterations) throw InvalidArgument("burn_in must be below n_iterations");
  if (thin < 1) throw InvalidArgument("thin must be positive");
  if (!(rw_scale > 0.0) || !std::isfinite(rw_scale)) {
    throw InvalidArgument("rw_scale must be positive");
  }
}

ColumnProblem ColumnProblem::from_data(Index j, const DataMatrix& data, double sigma2) {
  const Matrix& x = data.values();
  Matrix full = x.transpose() * x;
  return from_gram(j, full, sigma2);
}

ColumnProblem ColumnProblem::from_gram(Index j, const Matrix& full_gram, double sigma2) {
  const Index p = full_gram.rows();
  if (full_gram.cols() != p || p < 2) throw InvalidArgument("gram matrix must be square, p >= 2");
  if (j < 0 || j >= p) throw InvalidArgument("column index out of range");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InvalidArgument("sigma2_j must be positive");

  ColumnProblem prob;
  prob.j = j;
  prob.p = p;
  prob.sigma2 = sigma2;
  const Index m = p - 1;
  prob.gram.resize(m, m);
  prob.xty.resize(m);
  for (Index k = 0; k < m; ++k) {
    const Index gk = neighbor_node(j, k);
    for (Index l = 0; l < m; ++l) prob.gram(k, l) = full_gram(gk, neighbor_node(j, l));
    prob.xty[k] = full_gram(gk, j);
    if (!(prob.gram(k, k) > 0.0)) {
      throw InvalidArgument("data column " + std::to_string(gk) + " is identically zero");
    }
  }
  prob.yty = full_gram(j, j);
  return prob;
}

double soft_threshold(double t, double lambda, double gamma) {
  const double shrink = lambda * gamma;
  if (t > shrink) return t - shrink;
  if (t < -shrink) return t + shrink;
  return 0.0;
}

double l1_envelope(double t, double lambda, double gamma) {
  const double z = soft_threshold(t, lambda, gamma);
  return lambda * std::abs(z) + (z - t) * (z - t) / (2.0 * gamma);
}

double l1_envelope_grad(double t, double lambda, double gamma) {
  return (t - soft_threshold(t, lambda, gamma)) / gamma;
}

void MoveStats::record(const std::string& move, bool accepted) {
  auto& [proposed, taken] = counts[move];
  ++proposed;
  taken += accepted ? 1 : 0;
}

std::map<std::string, double> MoveStats::rates() const {
  std::map<std::string, double> out;
  for (const auto& [move, c] : counts) {
    if (c.first > 0) out[move] = static_cast<double>(c.second) / static_cast<double>(c.first);
  }
  return out;
}

ColumnSampler::ColumnSampler(ColumnProblem problem, const Hyperparameters& hyper,
                             KernelKind kernel, double rw_scale)
    : problem_(std::move(problem)), hyper_(hyper), kernel_(kernel), rw_scale_(rw_scale) {
  const Index m = problem_.m();
  hyper_.sigma2 = Vector::Constant(problem_.p, problem_.sigma2);
  hyper_.validate(problem_.p);
  if (!(rw_scale > 0.0)) throw InvalidArgument("rw_scale must be positive");
  if (problem_.gram.rows() != m || problem_.xty.size() != m) {
    throw InvalidArgument("column problem has inconsistent dimensions");
  }

  log_pu_ = hyper_.u * std::log(static_cast<double>(problem_.p));
  base_scale_.resize(m);
  gamma_k_.resize(m);
  for (Index k = 0; k < m; ++k) {
    base_scale_[k] = std::sqrt(problem_.sigma2 / problem_.gram(k, k));
    gamma_k_[k] = hyper_.gamma * problem_.sigma2 / problem_.gram(k, k);
  }
  rw_log_factor_ = Vector::Zero(m);
  last_rw_accept_.assign(static_cast<std::size_t>(m), -1);
  order_.resize(static_cast<std::size_t>(m));
  set_state(initial_state(problem_.p, hyper_));
}

void ColumnSampler::set_state(const ColumnState& state) {
  const Index m = problem_.m();
  if (static_cast<Index>(state.delta.size()) != m || state.theta.size() != m) {
    throw InvalidArgument("column state has the wrong dimension");
  }
  if (!state.delta_consistent()) {
    throw InvalidArgument("theta must be zero exactly where delta is zero");
  }
  if (!(state.q > 0.0 && state.q < 1.0)) throw InvalidArgument("q must lie in (0, 1)");
  if (!(state.rho1 >= hyper_.a1 && state.rho1 <= hyper_.a2 && state.rho2 >= hyper_.a1 &&
        state.rho2 <= hyper_.a2)) {
    throw InvalidArgument("rho outside [a1, a2]");
  }
  state_ = state;
  refresh_normalizer();
  recompute_residuals();
}

void ColumnSampler::refresh_normalizer() {
  log_c_ = elastic_net_log_normalizer(hyper_.alpha, state_.rho1 / problem_.sigma2,
                                      state_.rho2 / problem_.sigma2);
}

void ColumnSampler::recompute_residuals() {
  g_ = problem_.xty;
  for (Index k = 0; k < problem_.m(); ++k) {
    if (state_.delta[k]) g_.noalias() -= state_.theta[k] * problem_.gram.col(k);
  }
  rss_ = std::max(0.0, problem_.yty - state_.theta.dot(problem_.xty) - state_.theta.dot(g_));
}

void ColumnSampler::move_coordinate(Index k, double new_value) {
  const double d = new_value - state_.theta[k];
  rss_ += -2.0 * d * g_[k] + d * d * problem_.gram(k, k);
  g_.noalias() -= d * problem_.gram.col(k);
  state_.theta[k] = new_value;
}

double ColumnSampler::slab_log_density(Index k, double t, double lambda1, double lambda2) const {
  const double ridge = (1.0 - hyper_.alpha) * lambda2 * t * t / 2.0;
  if (kernel_ == KernelKind::MoreauYosida) {
    return -l1_envelope(t, hyper_.alpha * lambda1, gamma_k_[k]) - ridge;
  }
  return -hyper_.alpha * lambda1 * std::abs(t) - ridge;
}

double ColumnSampler::slab_log_density(Index k, double t) const {
  return slab_log_density(k, t, state_.rho1 / problem_.sigma2, state_.rho2 / problem_.sigma2);
}

double ColumnSampler::slab_grad(Index k, double t) const {
  const double lambda1 = state_.rho1 / problem_.sigma2;
  const double lambda2 = state_.rho2 / problem_.sigma2;
  const double ridge = (1.0 - hyper_.alpha) * lambda2 * t;
  if (kernel_ == KernelKind::MoreauYosida) {
    return -l1_envelope_grad(t, hyper_.alpha * lambda1, gamma_k_[k]) - ridge;
  }
  return -hyper_.alpha * lambda1 * (t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0)) - ridge;
}

double ColumnSampler::log_rho_target(double rho1, double rho2) const {
  if (!(rho1 >= hyper_.a1 && rho1 <= hyper_.a2 && rho2 >= hyper_.a1 && rho2 <= hyper_.a2)) {
    return kNegInf;
  }
  const double lambda1 = rho1 / problem_.sigma2;
  const double lambda2 = rho2 / problem_.sigma2;
  double val = std::log(rho1) + std::log(rho2);
  const Index s = state_.active_count();
  if (s == 0) return val;
  val -= static_cast<double>(s) * elastic_net_log_normalizer(hyper_.alpha, lambda1, lambda2);
  for (Index k = 0; k < problem_.m(); ++k) {
    if (state_.delta[k]) val += slab_log_density(k, state_.theta[k], lambda1, lambda2);
  }
  return val;
}

void ColumnSampler::update_q(Rng& rng) {
  state_.q = gibbs_update_q(state_.delta, problem_.p, hyper_.u, rng);
}

bool ColumnSampler::update_rho(int which, Rng& rng) {
  const double lo = std::log(hyper_.a1);
  const double hi = std::log(hyper_.a2);
  double& rho = which == 0 ? state_.rho1 : state_.rho2;
  const double current = rho;
  const double proposal_log =
      reflect(std::log(current) + rho_step_[which] * draw_normal(rng), lo, hi);
  const double proposal = std::clamp(std::exp(proposal_log), hyper_.a1, hyper_.a2);

  const double before = log_rho_target(state_.rho1, state_.rho2);
  const double after = which == 0 ? log_rho_target(proposal, state_.rho2)
                                  : log_rho_target(state_.rho1, proposal);
  const bool accept = std::log(draw_uniform(rng)) < after - before;
  if (accept) {
    rho = proposal;
    refresh_normalizer();
  }
  last_rho_accept_[which] = accept ? 1 : 0;
  return accept;
}

bool ColumnSampler::update_rho1(Rng& rng) { return update_rho(0, rng); }
bool ColumnSampler::update_rho2(Rng& rng) { return update_rho(1, rng); }

bool ColumnSampler::flip(Index k, Rng& rng) {
  const double sigma2 = problem_.sigma2;
  const double gkk = problem_.gram(k, k);
  const double var = sigma2 / gkk;
  const double log_odds = std::log(state_.q) - std::log1p(-state_.q);
  auto log_proposal = [&](double t, double center) {
    const double z = t - center;
    return -z * z / (2.0 * var) - 0.5 * std::log(2.0 * std::numbers::pi * var);
  };

  if (!state_.delta[k]) {
    const double b = g_[k];
    const double center = b / gkk;
    const double t = center + std::sqrt(var) * draw_normal(rng);
    const double drss = -2.0 * t * b + t * t * gkk;
    const double log_a = -drss / (2.0 * sigma2) + log_odds - log_c_ + slab_log_density(k, t) -
                         log_proposal(t, center);
    const bool accept = t != 0.0 && std::log(draw_uniform(rng)) < log_a;
    if (accept) {
      move_coordinate(k, t);
      state_.delta[k] = 1;
    }
    return accept;
  }

  const double t = state_.theta[k];
  const double b = g_[k] + gkk * t;
  const double drss = 2.0 * t * g_[k] + t * t * gkk;
  const double log_a = -drss / (2.0 * sigma2) - log_odds + log_c_ - slab_log_density(k, t) +
                       log_proposal(t, b / gkk);
  const bool accept = std::log(draw_uniform(rng)) < log_a;
  if (accept) {
    move_coordinate(k, 0.0);
    state_.theta[k] = 0.0;
    state_.delta[k] = 0;
  }
  return accept;
}

std::int64_t ColumnSampler::update_theta_rw(Rng& rng, MoveStats* stats) {
  std::int64_t accepted = 0;
  const double sigma2 = problem_.sigma2;
  for (Index k = 0; k < problem_.m(); ++k) {
    if (!state_.delta[k]) {
      last_rw_accept_[static_cast<std::size_t>(k)] = -1;
      continue;
    }
    const double t = state_.theta[k];
    const double scale = rw_scale_ * base_scale_[k] * std::exp(rw_log_factor_[k]);
    const double t_new = t + scale * draw_normal(rng);
    const double d = t_new - t;
    const double drss = -2.0 * d * g_[k] + d * d * problem_.gram(k, k);
    const double log_a = -drss / (2.0 * sigma2) + slab_log_density(k, t_new) -
                         slab_log_density(k, t);
    const bool accept = t_new != 0.0 && std::log(draw_uniform(rng)) < log_a;
    if (accept) {
      move_coordinate(k, t_new);
      ++accepted;
    }
    last_rw_accept_[static_cast<std::size_t>(k)] = accept ? 1 : 0;
    if (stats) stats->record("theta_rw", accept);
  }
  return accepted;
}

bool ColumnSampler::mala_step(Rng& rng) {
  std::vector<Index> active;
  for (Index k = 0; k < problem_.m(); ++k) {
    if (state_.delta[k]) active.push_back(k);
  }
  last_mala_accept_ = -1;
  if (active.empty()) return false;

  const auto s = static_cast<Index>(active.size());
  const double sigma2 = problem_.sigma2;
  const double ridge = (1.0 - hyper_.alpha) * state_.rho2 / sigma2;
  Vector precond(s), theta(s), grad(s);
  for (Index a = 0; a < s; ++a) {
    const Index k = active[static_cast<std::size_t>(a)];
    precond[a] = 1.0 / (problem_.gram(k, k) / sigma2 + ridge);
    theta[a] = state_.theta[k];
    grad[a] = g_[k] / sigma2 + slab_grad(k, theta[a]);
  }

  const double h = mala_h_;
  Vector mean_fwd = theta + 0.5 * h * precond.cwiseProduct(grad);
  Vector proposal(s);
  for (Index a = 0; a < s; ++a) {
    proposal[a] = mean_fwd[a] + std::sqrt(h * precond[a]) * draw_normal(rng);
  }
  const Vector d = proposal - theta;

  Vector g_new = g_;
  for (Index a = 0; a < s; ++a) g_new.noalias() -= d[a] * problem_.gram.col(active[a]);
  double quad = 0.0;
  double lin = 0.0;
  for (Index a = 0; a < s; ++a) {
    lin += d[a] * g_[active[a]];
    for (Index b = 0; b < s; ++b) quad += d[a] * d[b] * problem_.gram(active[a], active[b]);
  }
  const double rss_new = rss_ - 2.0 * lin + quad;

  double log_target_old = -rss_ / (2.0 * sigma2);
  double log_target_new = -rss_new / (2.0 * sigma2);
  Vector grad_new(s);
  bool hits_zero = false;
  for (Index a = 0; a < s; ++a) {
    const Index k = active[static_cast<std::size_t>(a)];
    log_target_old += slab_log_density(k, theta[a]);
    log_target_new += slab_log_density(k, proposal[a]);
    grad_new[a] = g_new[k] / sigma2 + slab_grad(k, proposal[a]);
    hits_zero = hits_zero || proposal[a] == 0.0;
  }
  const Vector mean_bwd = proposal + 0.5 * h * precond.cwiseProduct(grad_new);
  double log_fwd = 0.0;
  double log_bwd = 0.0;
  for (Index a = 0; a < s; ++a) {
    const double zf = proposal[a] - mean_fwd[a];
    const double zb = theta[a] - mean_bwd[a];
    log_fwd -= zf * zf / (2.0 * h * precond[a]);
    log_bwd -= zb * zb / (2.0 * h * precond[a]);
  }

  const double log_a = log_target_new - log_target_old + log_bwd - log_fwd;
  const bool accept = !hits_zero && std::log(draw_uniform(rng)) < log_a;
  if (accept) {
    for (Index a = 0; a < s; ++a) state_.theta[active[static_cast<std::size_t>(a)]] = proposal[a];
    g_ = std::move(g_new);
    rss_ = std::max(0.0, rss_new);
  }
  last_mala_accept_ = accept ? 1 : 0;
  return accept;
}

void ColumnSampler::sweep(Rng& rng, MoveStats* stats) {
  update_q(rng);
  const bool r1 = update_rho1(rng);
  const bool r2 = update_rho2(rng);
  if (stats) {
    stats->record("rho1", r1);
    stats->record("rho2", r2);
  }

  const Index m = problem_.m();
  for (Index k = 0; k < m; ++k) order_[static_cast<std::size_t>(k)] = k;
  for (Index k = m - 1; k > 0; --k) {
    std::swap(order_[static_cast<std::size_t>(k)],
              order_[static_cast<std::size_t>(draw_index(rng, k + 1))]);
  }
  for (Index k : order_) {
    const bool accepted = flip(k, rng);
    if (stats) stats->record("flip", accepted);
  }

  if (kernel_ == KernelKind::ExactRJ) {
    update_theta_rw(rng, stats);
  } else {
    const bool had_active = state_.active_count() > 0;
    const bool accepted = mala_step(rng);
    if (stats && had_active) stats->record("mala", accepted);
  }
  recompute_residuals();
}

void ColumnSampler::adapt(std::int64_t iteration) {
  const double gain = adapt_gain(iteration);
  for (int which = 0; which < 2; ++which) {
    if (last_rho_accept_[which] < 0) continue;
    const double step =
        std::log(rho_step_[which]) + gain * (last_rho_accept_[which] - kRwTarget);
    rho_step_[which] = std::clamp(std::exp(step), 1e-3, 10.0);
  }
  for (Index k = 0; k < problem_.m(); ++k) {
    const int acc = last_rw_accept_[static_cast<std::size_t>(k)];
    if (acc < 0) continue;
    rw_log_factor_[k] = std::clamp(rw_log_factor_[k] + gain * (acc - kRwTarget), -10.0, 5.0);
  }
  if (last_mala_accept_ >= 0) {
    const double step = std::log(mala_h_) + gain * (last_mala_accept_ - kMalaTarget);
    mala_h_ = std::clamp(std::exp(step), 1e-8, 10.0);
  }
}

double gibbs_update_q(std::span<const std::uint8_t> delta, Index p, double u, Rng& rng) {
  const auto m = static_cast<double>(delta.size());
  double s = 0.0;
  for (auto d : delta) s += d != 0 ? 1.0 : 0.0;
  const double pu = std::pow(static_cast<double>(p), u);
  return clamp_q(draw_beta(rng, 1.0 + s, pu + m - s));
}

double rho_log_acceptance(const ColumnState& state, double rho1_new, double rho2_new,
                          const Hyperparameters& hyper, double sigma2_j, Index p) {
  if (!(rho1_new >= hyper.a1 && rho1_new <= hyper.a2 && rho2_new >= hyper.a1 &&
        rho2_new <= hyper.a2)) {
    return kNegInf;
  }
  ColumnState proposed = state;
  proposed.rho1 = rho1_new;
  proposed.rho2 = rho2_new;
  return log_prior_col(proposed, p, hyper, sigma2_j) - log_prior_col(state, p, hyper, sigma2_j) +
         std::log(rho1_new / state.rho1) + std::log(rho2_new / state.rho2);
}

ColumnState mh_update_rho(const ColumnState& state, const Hyperparameters& hyper,
                          double sigma2_j, Index p, Rng& rng, double log_step) {
  const double lo = std::log(hyper.a1);
  const double hi = std::log(hyper.a2);
  ColumnState out = state;
  for (int which = 0; which < 2; ++which) {
    const double current = which == 0 ? out.rho1 : out.rho2;
    const double proposal = std::clamp(
        std::exp(reflect(std::log(current) + log_step * draw_normal(rng), lo, hi)), hyper.a1,
        hyper.a2);
    const double log_a = which == 0
                             ? rho_log_acceptance(out, proposal, out.rho2, hyper, sigma2_j, p)
                             : rho_log_acceptance(out, out.rho1, proposal, hyper, sigma2_j, p);
    if (std::log(draw_uniform(rng)) < log_a) (which == 0 ? out.rho1 : out.rho2) = proposal;
  }
  return out;
}

namespace {

ColumnSampler sampler_for(const ColumnState& state, Index j, const DataMatrix& data,
                          const Hyperparameters& hyper, KernelKind kernel,
                          double rw_scale = 2.4) {
  if (hyper.sigma2.size() != data.p()) throw InvalidArgument("sigma2 has the wrong length");
  ColumnSampler sampler(ColumnProblem::from_data(j, data, hyper.sigma2[j]), hyper, kernel,
                        rw_scale);
  sampler.set_state(state);
  return sampler;
}

}  // namespace

ColumnState rj_update_pair(const ColumnState& state, Index k, Index j, const DataMatrix& data,
                           const Hyperparameters& hyper, Rng& rng) {
  if (k < 0 || k >= data.p() - 1) throw InvalidArgument("coordinate index out of range");
  ColumnSampler sampler = sampler_for(state, j, data, hyper, KernelKind::ExactRJ);
  sampler.flip(k, rng);
  return sampler.state();
}

ColumnState within_model_update_theta(const ColumnState& state, Index j, const DataMatrix& data,
                                      const Hyperparameters& hyper, Rng& rng, double rw_scale) {
  ColumnSampler sampler = sampler_for(state, j, data, hyper, KernelKind::ExactRJ, rw_scale);
  sampler.update_theta_rw(rng);
  return sampler.state();
}

ColumnState my_envelope_step(const ColumnState& state, Index j, const DataMatrix& data,
                             const Hyperparameters& hyper, Rng& rng) {
  check_gamma(hyper.gamma);
  ColumnSampler sampler = sampler_for(state, j, data, hyper, KernelKind::MoreauYosida);
  sampler.mala_step(rng);
  const Index m = data.p() - 1;
  std::vector<Index> order(static_cast<std::size_t>(m));
  for (Index k = 0; k < m; ++k) order[static_cast<std::size_t>(k)] = k;
  for (Index k = m - 1; k > 0; --k) {
    std::swap(order[static_cast<std::size_t>(k)],
              order[static_cast<std::size_t>(draw_index(rng, k + 1))]);
  }
  for (Index k : order) sampler.flip(k, rng);
  return sampler.state();
}

ColumnState initial_state(Index p, const Hyperparameters& hyper) {
  if (p < 2) throw InvalidArgument("p must be at least 2");
  if (!(hyper.a1 > 0.0 && hyper.a2 > hyper.a1)) {
    throw InvalidArgument("hyperprior bounds must satisfy 0 < a1 < a2");
  }
  ColumnState state;
  state.delta.assign(static_cast<std::size_t>(p - 1), 0);
  state.theta = Vector::Zero(p - 1);
  state.q = 1.0 / (1.0 + std::pow(static_cast<double>(p), hyper.u));
  state.rho1 = state.rho2 = std::sqrt(hyper.a1 * hyper.a2);
  return state;
}

double sparse_quantile(std::span<const double> sorted_nonzero, std::int64_t zeros, double prob) {
  const auto nz = static_cast<std::int64_t>(sorted_nonzero.size());
  const std::int64_t total = nz + zeros;
  if (total == 0) throw InvalidArgument("quantile of an empty sample");
  const auto negatives = static_cast<std::int64_t>(
      std::lower_bound(sorted_nonzero.begin(), sorted_nonzero.end(), 0.0) -
      sorted_nonzero.begin());
  auto at = [&](std::int64_t i) {
    if (i < negatives) return sorted_nonzero[static_cast<std::size_t>(i)];
    if (i < negatives + zeros) return 0.0;
    return sorted_nonzero[static_cast<std::size_t>(i - zeros)];
  };
  const double h = static_cast<double>(total - 1) * prob;
  const auto lo = static_cast<std::int64_t>(std::floor(h));
  if (lo >= total - 1) return at(total - 1);
  const double frac = h - static_cast<double>(lo);
  const double a = at(lo);
  const double b = at(lo + 1);
  return frac == 0.0 ? a : a + frac * (b - a);
}

ChainSummary run_chain(const ColumnProblem& problem, const Hyperparameters& hyper,
                       const ChainConfig& config) {
  config.validate();
  if (config.kernel == KernelKind::MoreauYosida) check_gamma(hyper.gamma);
  Rng rng(config.seed);
  ColumnSampler sampler(problem, hyper, config.kernel, config.rw_scale);

  const Index m = problem.m();
  std::vector<std::int64_t> included(static_cast<std::size_t>(m), 0);
  std::vector<double> sums(static_cast<std::size_t>(m), 0.0);
  std::vector<std::vector<double>> nonzero(static_cast<std::size_t>(m));
  std::vector<double> loglik;
  loglik.reserve(static_cast<std::size_t>((config.n_iterations - config.burn_in) / config.thin + 1));
  MoveStats stats;

  for (std::int64_t t = 0; t < config.n_iterations; ++t) {
    const bool burning = t < config.burn_in;
    sampler.sweep(rng, burning ? nullptr : &stats);
    if (burning) {
      if (config.adapt) sampler.adapt(t);
      continue;
    }
    if ((t - config.burn_in) % config.thin != 0) continue;
    const ColumnState& s = sampler.state();
    for (Index k = 0; k < m; ++k) {
      if (!s.delta[k]) continue;
      const auto uk = static_cast<std::size_t>(k);
      ++included[uk];
      sums[uk] += s.theta[k];
      nonzero[uk].push_back(s.theta[k]);
    }
    loglik.push_back(sampler.log_quasi_likelihood());
  }

  ChainSummary out;
  const auto retained = static_cast<std::int64_t>(loglik.size());
  const auto r = static_cast<double>(retained);
  out.retained = retained;
  out.inclusion_freq.resize(m);
  out.theta_mean.resize(m);
  out.theta_q025.resize(m);
  out.theta_median.resize(m);
  out.theta_q975.resize(m);
  for (Index k = 0; k < m; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    auto& values = nonzero[uk];
    std::sort(values.begin(), values.end());
    const std::int64_t zeros = retained - included[uk];
    out.inclusion_freq[k] = static_cast<double>(included[uk]) / r;
    out.theta_mean[k] = sums[uk] / r;
    out.theta_q025[k] = sparse_quantile(values, zeros, 0.025);
    out.theta_median[k] = sparse_quantile(values, zeros, 0.5);
    out.theta_q975[k] = sparse_quantile(values, zeros, 0.975);
  }

  double mean = 0.0;
  for (double v : loglik) mean += v;
  mean /= r;
  double var = 0.0;
  for (double v : loglik) var += (v - mean) * (v - mean);
  out.loglik_mean = mean;
  out.loglik_var = retained > 1 ? var / (r - 1.0) : 0.0;

  if (retained >= 100) {
    std::vector<double> neg(loglik.size());
    std::transform(loglik.begin(), loglik.end(), neg.begin(), [](double v) { return -v; });
    try {
      out.geweke_z = geweke_z(neg);
    } catch (const DegenerateTrace&) {
      out.geweke_z.reset();
    }
  }
  out.acceptance_rates = stats.rates();
  return out;
}

ChainSummary run_chain(Index j, const DataMatrix& data, const Hyperparameters& hyper,
                       const ChainConfig& config) {
  if (j < 0 || j >= data.p()) throw InvalidArgument("column index out of range");
  if (hyper.sigma2.size() != data.p()) throw InvalidArgument("sigma2 has the wrong length");
  return run_chain(ColumnProblem::from_data(j, data, hyper.sigma2[j]), hyper, config);
}

}  // namespace qbgraph
