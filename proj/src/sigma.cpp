#include "qbgraph/sigma.hpp"

#include "qbgraph/errors.hpp"
#include "qbgraph/parallel.hpp"
#include "qbgraph/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace qbgraph {
namespace {

constexpr int kMaxSweeps = 200000;
// KKT tolerance along the CV path, where only prediction error matters.
constexpr double kPathTol = 1e-6;

double soft(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// Coordinate descent on a Gram system; coordinate `skip` (if >= 0) is held at
// zero. beta is updated in place.
void lasso_core(const Matrix& gram, const Vector& xty, Index n, double lambda, Vector& beta,
                Index skip, double rel_tol = 1e-11, std::vector<double>* trace = nullptr) {
  const Index m = gram.rows();
  const double nl = static_cast<double>(n) * lambda;
  const double scale = std::max(1.0, xty.cwiseAbs().maxCoeff() / static_cast<double>(n));
  const double tol = rel_tol * scale;
  Vector g = xty - gram * beta;

  auto kkt_violation = [&] {
    double worst = 0.0;
    for (Index k = 0; k < m; ++k) {
      if (k == skip) continue;
      const double gk = g[k] / static_cast<double>(n);
      const double v = beta[k] == 0.0 ? std::max(0.0, std::abs(gk) - lambda)
                                      : std::abs(gk - std::copysign(lambda, beta[k]));
      worst = std::max(worst, v);
    }
    return worst;
  };

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    for (Index k = 0; k < m; ++k) {
      if (k == skip) continue;
      const double gkk = gram(k, k);
      const double updated = soft(g[k] + gkk * beta[k], nl) / gkk;
      const double d = updated - beta[k];
      if (d != 0.0) {
        g.noalias() -= gram.col(k) * d;
        beta[k] = updated;
      }
    }
    if (trace) {
      // Objective without the constant y'y / (2n).
      trace->push_back((0.5 * beta.dot(xty - g) - beta.dot(xty) + nl * beta.lpNorm<1>()) /
                       static_cast<double>(n));
    }
    if (kkt_violation() <= tol) {
      g = xty - gram * beta;
      if (kkt_violation() <= tol) return;
    }
  }
}

void check_lambda(double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw InvalidArgument("lasso penalty must be finite and non-negative");
  }
}

// Fold Gram matrices shared by every column: full x'x and the held-out part
// of each fold.
struct FoldGrams {
  Index n = 0;
  Matrix full;
  std::vector<Matrix> held_out;
  std::vector<Index> held_out_rows;

  FoldGrams(const DataMatrix& data, const SigmaSpec& spec) : n(data.n()) {
    const Matrix& x = data.values();
    full = x.transpose() * x;
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    Rng rng(spec.seed);
    for (Index i = n - 1; i > 0; --i) {
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(draw_index(rng, i + 1))]);
    }
    const int k = spec.folds;
    for (int f = 0; f < k; ++f) {
      std::vector<Index> rows;
      for (Index i = f; i < n; i += k) rows.push_back(perm[static_cast<std::size_t>(i)]);
      std::sort(rows.begin(), rows.end());
      const Matrix sub = x(rows, Eigen::all);
      held_out.push_back(sub.transpose() * sub);
      held_out_rows.push_back(static_cast<Index>(rows.size()));
    }
  }
};

double cv_column(const DataMatrix& data, Index j, const SigmaSpec& spec, const FoldGrams& grams) {
  const Index n = data.n();
  const Index p = data.p();
  Vector xty_full = grams.full.col(j);
  xty_full[j] = 0.0;
  for (Index k = 0; k < p; ++k) {
    if (k != j && grams.full(k, k) <= 0.0) {
      throw InvalidArgument("column " + std::to_string(k) + " is identically zero");
    }
  }
  const std::vector<double> grid =
      spec.lambda_grid.empty() ? lasso_lambda_grid(lasso_lambda_max(xty_full, n)) : spec.lambda_grid;

  std::vector<double> cv_error(grid.size(), 0.0);
  std::size_t usable = grid.size();
  for (std::size_t f = 0; f < grams.held_out.size(); ++f) {
    const Matrix& test = grams.held_out[f];
    const Matrix train = grams.full - test;
    const Index n_train = n - grams.held_out_rows[f];
    Vector c = train.col(j);
    c[j] = 0.0;
    Vector beta = Vector::Zero(p);
    for (std::size_t l = 0; l < grid.size(); ++l) {
      if (l >= usable) break;
      lasso_core(train, c, n_train, grid[l], beta, j, kPathTol);
      // A saturated fit interpolates the training rows; drop the rest of the path.
      if ((beta.array() != 0.0).count() >= n_train - 1) {
        usable = l;
        break;
      }
      // ||y_test - X_test beta||^2 expanded through the held-out Gram.
      double err = test(j, j);
      for (Index a = 0; a < p; ++a) {
        if (beta[a] == 0.0) continue;
        err -= 2.0 * beta[a] * test(a, j);
        for (Index b = 0; b < p; ++b) {
          if (beta[b] != 0.0) err += beta[a] * test(a, b) * beta[b];
        }
      }
      cv_error[l] += err;
    }
  }
  if (usable == 0) usable = 1;
  const std::size_t best = static_cast<std::size_t>(
      std::min_element(cv_error.begin(), cv_error.begin() + static_cast<std::ptrdiff_t>(usable)) -
      cv_error.begin());

  Vector beta = Vector::Zero(p);
  for (std::size_t l = 0; l < best; ++l) lasso_core(grams.full, xty_full, n, grid[l], beta, j, kPathTol);
  lasso_core(grams.full, xty_full, n, grid[best], beta, j);

  Index s_hat = 0;
  Vector resid = data.values().col(j);
  for (Index k = 0; k < p; ++k) {
    if (beta[k] == 0.0) continue;
    ++s_hat;
    resid.noalias() -= data.values().col(k) * beta[k];
  }
  if (s_hat >= n) {
    throw DegenerateFit("column " + std::to_string(j) + ": selected " + std::to_string(s_hat) +
                        " predictors with n = " + std::to_string(n));
  }
  return std::max(resid.squaredNorm() / static_cast<double>(n - s_hat), 1e-8);
}

}  // namespace

void SigmaSpec::validate(Index p) const {
  if (mode == SigmaMode::Known) {
    if (!known_values) throw InvalidArgument("known sigma mode requires known values");
    if (known_values->size() != p) throw InvalidArgument("known sigma values must have length p");
    for (double v : *known_values) {
      if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("known sigma values must be positive");
    }
  }
  if (folds < 2) throw InvalidArgument("cross-validation needs at least 2 folds");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] > 0.0) || !std::isfinite(lambda_grid[i]) ||
        (i > 0 && lambda_grid[i] > lambda_grid[i - 1])) {
      throw InvalidArgument("lambda grid must be positive and descending");
    }
  }
}

Vector lasso_cd(const Vector& y, const Matrix& X, double lambda) {
  check_lambda(lambda);
  if (y.size() != X.rows()) throw InvalidArgument("lasso: y and X row counts differ");
  if (!y.allFinite() || !X.allFinite()) throw InvalidArgument("lasso: non-finite input");
  return lasso_cd_gram(X.transpose() * X, X.transpose() * y, X.rows(), lambda);
}

Vector lasso_cd_gram(const Matrix& gram, const Vector& xty, Index n, double lambda, const Vector& warm,
                     std::vector<double>* objective_trace) {
  check_lambda(lambda);
  const Index m = gram.rows();
  if (gram.cols() != m || xty.size() != m || n < 1) throw InvalidArgument("lasso: inconsistent Gram system");
  if (!gram.allFinite() || !xty.allFinite()) throw InvalidArgument("lasso: non-finite input");
  for (Index k = 0; k < m; ++k) {
    if (!(gram(k, k) > 0.0)) throw InvalidArgument("lasso: design column " + std::to_string(k) + " is zero");
  }
  Vector beta = warm.size() == m ? warm : Vector::Zero(m);
  lasso_core(gram, xty, n, lambda, beta, -1, 1e-11, objective_trace);
  return beta;
}

double lasso_lambda_max(const Vector& xty, Index n) {
  return xty.size() == 0 ? 0.0 : xty.cwiseAbs().maxCoeff() / static_cast<double>(n);
}

std::vector<double> lasso_lambda_grid(double lambda_max, int count, double ratio) {
  if (count < 1 || !(ratio > 0.0 && ratio <= 1.0)) throw InvalidArgument("invalid lambda grid shape");
  if (!(lambda_max > 0.0)) lambda_max = 1e-8;
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    grid[static_cast<std::size_t>(i)] = lambda_max * std::pow(ratio, t);
  }
  return grid;
}

double estimate_sigma2_cv(const DataMatrix& data, Index j, const SigmaSpec& spec) {
  spec.validate(data.p());
  if (j < 0 || j >= data.p()) throw InvalidArgument("column index out of range");
  if (spec.mode == SigmaMode::Known) return (*spec.known_values)[j];
  if (spec.folds > data.n()) throw InvalidArgument("more folds than observations");
  const FoldGrams grams(data, spec);
  return cv_column(data, j, spec, grams);
}

Vector resolve_sigma2(const DataMatrix& data, const SigmaSpec& spec, unsigned workers) {
  spec.validate(data.p());
  if (spec.mode == SigmaMode::Known) return *spec.known_values;
  if (spec.folds > data.n()) throw InvalidArgument("more folds than observations");
  const FoldGrams grams(data, spec);
  Vector out(data.p());
  parallel_for(data.p(), workers, [&](Index j) { out[j] = cv_column(data, j, spec, grams); });
  return out;
}

}  // namespace qbgraph
