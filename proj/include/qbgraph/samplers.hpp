#pragma once

#include "qbgraph/rng.hpp"
#include "qbgraph/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qbgraph {

enum class KernelKind { ExactRJ, MoreauYosida };

const char* kernel_name(KernelKind kind) noexcept;

struct ChainConfig {
  std::int64_t n_iterations = 50000;
  std::int64_t burn_in = 10000;
  std::uint64_t seed = 0;
  KernelKind kernel = KernelKind::ExactRJ;
  std::int64_t thin = 1;
  double rw_scale = 2.4;  // multiplies sigma_j / ||x_k|| for random-walk moves
  bool adapt = true;      // tune proposal scales during burn-in, frozen after

  void validate() const;
};

struct ChainSummary {
  Vector inclusion_freq;
  Vector theta_mean;  // unconditional: samples with delta_k = 0 contribute 0
  Vector theta_q025;
  Vector theta_median;
  Vector theta_q975;
  double loglik_mean = 0.0;  // quasi-log-likelihood over retained samples
  double loglik_var = 0.0;
  std::optional<double> geweke_z;  // absent for short or constant traces
  std::map<std::string, double> acceptance_rates;
  std::int64_t retained = 0;

  friend bool operator==(const ChainSummary&, const ChainSummary&) = default;
};

/// Sufficient statistics of the regression of column j on the others:
/// gram = X'X, xty = X'y, yty = y'y with X = x^(j), y = x_j.
struct ColumnProblem {
  Index j = 0;
  Index p = 0;
  double sigma2 = 1.0;
  Matrix gram;
  Vector xty;
  double yty = 0.0;

  Index m() const noexcept { return p - 1; }

  static ColumnProblem from_data(Index j, const DataMatrix& data, double sigma2);
  /// `full_gram` is x'x for the full n x p data; avoids recomputing it per column.
  static ColumnProblem from_gram(Index j, const Matrix& full_gram, double sigma2);
};

/// Soft-threshold: the proximal map of lambda*|.| at scale gamma.
double soft_threshold(double t, double lambda, double gamma);

/// Moreau-Yosida envelope of lambda*|.|: min_z lambda|z| + (z - t)^2 / (2 gamma).
double l1_envelope(double t, double lambda, double gamma);

/// Derivative of l1_envelope in t: (t - prox(t)) / gamma.
double l1_envelope_grad(double t, double lambda, double gamma);

/// Counts of proposed and accepted moves, keyed by move name.
struct MoveStats {
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> counts;
  void record(const std::string& move, bool accepted);
  std::map<std::string, double> rates() const;
};

/// Per-column MCMC kernel. Holds the state together with the residual
/// correlations g = X'(y - X theta) and the residual sum of squares so that
/// each coordinate move costs O(p).
///
/// With KernelKind::MoreauYosida the l1 part of the slab is replaced by its
/// envelope with per-coordinate smoothing gamma * sigma_j^2 / ||x_k||^2 and
/// active coefficients move by preconditioned MALA instead of random walk.
class ColumnSampler {
 public:
  ColumnSampler(ColumnProblem problem, const Hyperparameters& hyper, KernelKind kernel,
                double rw_scale = 2.4);

  /// Replace the state. Throws InvalidArgument if it violates the invariants.
  void set_state(const ColumnState& state);
  const ColumnState& state() const noexcept { return state_; }
  const ColumnProblem& problem() const noexcept { return problem_; }
  double rss() const noexcept { return rss_; }
  double log_quasi_likelihood() const noexcept { return -rss_ / (2.0 * problem_.sigma2); }

  /// Log-target (up to constants) of the kernel's own stationary distribution
  /// as a function of (rho1, rho2), including the log-scale Jacobian.
  /// Returns -inf outside [a1, a2].
  double log_rho_target(double rho1, double rho2) const;

  void update_q(Rng& rng);
  bool update_rho1(Rng& rng);
  bool update_rho2(Rng& rng);
  /// Trans-dimensional flip of delta_k.
  bool flip(Index k, Rng& rng);
  /// Componentwise random walk over the active coordinates; returns accepted count.
  std::int64_t update_theta_rw(Rng& rng, MoveStats* stats = nullptr);
  /// Preconditioned MALA on the active coordinates of the smoothed target.
  bool mala_step(Rng& rng);

  /// One full sweep: q, rho1, rho2, random-scan flips, then the within-model move.
  void sweep(Rng& rng, MoveStats* stats = nullptr);

  /// Robbins-Monro adaptation of proposal scales from the acceptances of the
  /// most recent sweep; call once per burn-in sweep.
  void adapt(std::int64_t iteration);

  double rho_step() const noexcept { return rho_step_[0]; }
  double mala_step_size() const noexcept { return mala_h_; }

 private:
  // Unnormalized log slab density of coordinate k (the C term is separate).
  double slab_log_density(Index k, double t, double lambda1, double lambda2) const;
  double slab_log_density(Index k, double t) const;
  double slab_grad(Index k, double t) const;
  void refresh_normalizer();
  void move_coordinate(Index k, double new_value);
  void recompute_residuals();
  bool update_rho(int which, Rng& rng);

  ColumnProblem problem_;
  Hyperparameters hyper_;
  KernelKind kernel_;
  double log_pu_;
  Vector base_scale_;  // sigma_j / ||x_k||
  Vector gamma_k_;     // per-coordinate envelope smoothing
  Vector rw_log_factor_;
  double rw_scale_;
  double rho_step_[2] = {1.0, 1.0};
  double mala_h_ = 0.5;

  ColumnState state_;
  Vector g_;
  double rss_ = 0.0;
  double log_c_ = 0.0;
  std::vector<Index> order_;

  // Acceptances of the latest sweep, consumed by adapt(): -1 = not attempted.
  int last_rho_accept_[2] = {-1, -1};
  int last_mala_accept_ = -1;
  std::vector<int> last_rw_accept_;
};

/// q ~ Beta(1 + |delta|, p^u + (p - 1) - |delta|).
double gibbs_update_q(std::span<const std::uint8_t> delta, Index p, double u, Rng& rng);

/// Log Metropolis ratio for moving (rho1, rho2) to the proposal on the log scale:
/// log_prior_col difference plus log(rho1'/rho1) + log(rho2'/rho2). -inf when
/// the proposal leaves [a1, a2].
double rho_log_acceptance(const ColumnState& state, double rho1_new, double rho2_new,
                          const Hyperparameters& hyper, double sigma2_j, Index p);

/// One log-scale random-walk update of rho1 then rho2, reflecting at [a1, a2].
ColumnState mh_update_rho(const ColumnState& state, const Hyperparameters& hyper,
                          double sigma2_j, Index p, Rng& rng, double log_step = 1.0);

ColumnState rj_update_pair(const ColumnState& state, Index k, Index j, const DataMatrix& data,
                           const Hyperparameters& hyper, Rng& rng);

ColumnState within_model_update_theta(const ColumnState& state, Index j, const DataMatrix& data,
                                      const Hyperparameters& hyper, Rng& rng,
                                      double rw_scale = 2.4);

/// MALA step on the envelope-smoothed target followed by a random-scan pass of
/// delta flips. Throws InvalidArgument if hyper.gamma is outside (0, 1/4].
ColumnState my_envelope_step(const ColumnState& state, Index j, const DataMatrix& data,
                             const Hyperparameters& hyper, Rng& rng);

/// Starting state: empty support, q at its prior mean, rho at the geometric
/// midpoint of [a1, a2].
ColumnState initial_state(Index p, const Hyperparameters& hyper);

ChainSummary run_chain(const ColumnProblem& problem, const Hyperparameters& hyper,
                       const ChainConfig& config);
ChainSummary run_chain(Index j, const DataMatrix& data, const Hyperparameters& hyper,
                       const ChainConfig& config);

/// Type-7 quantile of a sample made of `zeros` zero values plus `sorted_nonzero`.
double sparse_quantile(std::span<const double> sorted_nonzero, std::int64_t zeros, double prob);

}  // namespace qbgraph
