#pragma once

#include "qbgraph/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qbgraph {

/// Geweke z-score comparing the mean of the first `first` fraction of the
/// trace with the mean of the last `last` fraction. Each window's variance of
/// the mean uses a Bartlett lag-window spectral estimate at frequency zero,
/// with the AR(1) plug-in bandwidth of Andrews (1991).
///
/// Throws InvalidArgument if the trace has fewer than 100 values and
/// DegenerateTrace if both windows have zero spectral variance.
double geweke_z(std::span<const double> trace, double first = 0.1, double last = 0.5);

/// Spectral density at zero of a series (Bartlett window, automatic bandwidth),
/// i.e. the long-run variance; the variance of the mean is this over n.
double spectral_variance0(std::span<const double> series);

struct Metrics {
  double rel_error = 0.0;
  std::optional<double> sensitivity;  // undefined when the truth has no edges
  std::optional<double> precision;    // undefined when the estimate has no edges
};

/// Relative Frobenius error, and sign-aware sensitivity / precision over the
/// off-diagonal entries (each unordered pair counted once).
Metrics metrics(const PrecisionMatrix& estimate, const PrecisionMatrix& truth);

/// Minimum and maximum Rayleigh quotient of M over vectors with at most s
/// nonzero entries. Exact, by enumerating all supports of size min(s, p);
/// smaller supports cannot do better by eigenvalue interlacing.
/// Throws BudgetExceeded when C(p, s) exceeds `budget`.
std::pair<double, double> sparse_eigen_bounds(const Matrix& m, Index s,
                                              double budget = 1e6);

struct RestrictedEigen {
  double value = 0.0;
  bool exact = false;
};

/// Infimum of u'Mu / ||u||^2 over the cones
/// sum_{k not in S} |u_k| <= 7 sum_{k in S} |u_k|, |S| <= s_star.
///
/// Projected gradient with `restarts` random starts per support, seeded by the
/// minimum eigenvector of M_SS; the result is an upper bound on the infimum and
/// never exceeds the s_star-sparse lower eigenvalue. For p <= 3 a dense grid on
/// the sphere is added and the result is flagged exact. s_star == 0 gives +inf.
RestrictedEigen restricted_eigen(const Matrix& m, Index s_star, int restarts = 20,
                                 std::uint64_t seed = 0, double budget = 1e6);

/// sqrt(54 kappa_tilde(1) / theta_jj * n * log p).
double rho_theory(double kappa_tilde1, double theta_jj, double n, double log_p);

/// Sparsity bound zeta_j of the per-column posterior.
double zeta_j(Index s_star_j, double sigma2_j, double theta_jj, double kappa_tilde1,
              double kappa_underline, double kappa_tilde_sstar, double log_p, double c4);

struct TheoryReport {
  Index n = 0;
  Index p = 0;
  double u = 1.5;
  double c1 = 0.5;
  double c2 = 1.0;
  double c3 = 1.5;
  double c4 = 0.5;

  std::vector<Index> s_star_j;
  Index s_star = 0;
  std::map<Index, double> kappa_lower;  // smallest s-sparse Rayleigh quotient
  std::map<Index, double> kappa_upper;  // largest s-sparse Rayleigh quotient
  Vector rho;
  double M0 = 0.0;

  // The remaining fields need cone / sparse eigenvalues at s_star and s_bar and
  // may be missing when only a partial report was requested.
  std::optional<double> kappa_underline;
  std::optional<Vector> zeta;
  std::optional<Vector> s_bar_j;
  std::optional<Index> s_bar;
  std::optional<double> epsilon;
  std::optional<bool> sample_size_thm1;
  std::optional<bool> sample_size_thm2;
  bool p_large_enough = false;  // p^c4 >= 8 c2 max(1, 2 c2)

  std::map<std::string, std::string> flags;  // quantity -> "exact" | "heuristic" | note
};

/// Computable quantities of the contraction theory for a true precision
/// matrix. Unknown universal constants in the sample-size conditions are set
/// to 1 and flagged heuristic. Throws BudgetExceeded if an eigenvalue
/// enumeration is too large, unless `allow_partial`, in which case the
/// affected fields stay empty and the reason is recorded in `flags`.
TheoryReport theory_quantities(const PrecisionMatrix& theta_true, const Vector& sigma2, Index n,
                               double u = 1.5, bool allow_partial = false,
                               double budget = 1e6);

}  // namespace qbgraph
