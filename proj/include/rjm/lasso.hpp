#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rjm/model.hpp"
#include "rjm/rng.hpp"
#include "rjm/types.hpp"

namespace rjm {

struct LassoFit {
  Vector coef;
  double lambda = 0.0;
  double cv_error = 0.0;  // mean held-out MSE at the chosen lambda
};

namespace detail {

// Cyclic coordinate descent on  (1/2n)||y - Xb||^2 + lambda ||b||_1  using
// precomputed Gram quantities G = X'X/n and c = X'y/n.
inline Vector lasso_cd(const Matrix& G, const Vector& c, double lambda, Vector b,
                       int max_sweeps = 1000, double tol = 1e-8) {
  const Index p = c.size();
  Vector Gb = G * b;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double gjj = G(j, j);
      if (gjj <= 0.0) {
        b(j) = 0.0;
        continue;
      }
      const double rho = c(j) - (Gb(j) - gjj * b(j));
      const double bj_old = b(j);
      double bj = rho;
      if (bj > lambda) {
        bj -= lambda;
      } else if (bj < -lambda) {
        bj += lambda;
      } else {
        bj = 0.0;
      }
      bj /= gjj;
      if (bj != bj_old) {
        Gb += (bj - bj_old) * G.col(j);
        b(j) = bj;
        max_delta = std::max(max_delta, std::abs(bj - bj_old));
      }
    }
    if (max_delta <= tol) break;
  }
  return b;
}

}  // namespace detail

// Penalty path from lambda_max (the smallest level that zeroes every
// coefficient) down three decades, log-spaced, largest first.
inline std::vector<double> lasso_lambda_path(const Matrix& X, const Vector& y, int points = 100) {
  const double n = static_cast<double>(X.rows());
  const double lmax = (X.transpose() * y).cwiseAbs().maxCoeff() / n;
  std::vector<double> path(points);
  if (lmax <= 0.0) {
    std::fill(path.begin(), path.end(), 0.0);
    return path;
  }
  const double lmin = 1e-3 * lmax;
  for (int i = 0; i < points; ++i) {
    const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    path[i] = std::exp(std::log(lmax) + f * (std::log(lmin) - std::log(lmax)));
  }
  return path;
}

inline Vector lasso_fit(const Matrix& X, const Vector& y, double lambda) {
  const double n = static_cast<double>(X.rows());
  const Matrix G = X.transpose() * X / n;
  const Vector c = X.transpose() * y / n;
  return detail::lasso_cd(G, c, lambda, Vector::Zero(X.cols()));
}

/// K-fold cross-validated lasso along a warm-started path. The fold split is
/// a seeded shuffle, so results are reproducible given the rng state.
inline LassoFit lasso_cv(const Matrix& X, const Vector& y, Rng& rng, int folds = 5,
                         int points = 100) {
  const Index n = X.rows();
  if (n < 2) {
    LassoFit out;
    out.coef = Vector::Zero(X.cols());
    return out;
  }
  folds = static_cast<int>(std::min<Index>(folds, n));

  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.uniform_index(static_cast<std::uint64_t>(i) + 1)]);
  }

  const std::vector<double> path = lasso_lambda_path(X, y, points);
  std::vector<double> cv_err(path.size(), 0.0);

  for (int f = 0; f < folds; ++f) {
    std::vector<Index> hold, keep;
    for (Index i = 0; i < n; ++i) {
      (static_cast<int>(i % folds) == f ? hold : keep).push_back(perm[i]);
    }
    Matrix Xtr(keep.size(), X.cols());
    Vector ytr(keep.size());
    for (size_t i = 0; i < keep.size(); ++i) {
      Xtr.row(i) = X.row(keep[i]);
      ytr(i) = y(keep[i]);
    }
    const double ntr = static_cast<double>(Xtr.rows());
    const Matrix G = Xtr.transpose() * Xtr / ntr;
    const Vector c = Xtr.transpose() * ytr / ntr;
    Vector b = Vector::Zero(X.cols());
    for (size_t k = 0; k < path.size(); ++k) {
      b = detail::lasso_cd(G, c, path[k], b);
      double sse = 0.0;
      for (Index i : hold) {
        const double e = y(i) - X.row(i).dot(b);
        sse += e * e;
      }
      cv_err[k] += sse / static_cast<double>(hold.size());
    }
  }

  size_t best = 0;
  for (size_t k = 1; k < path.size(); ++k) {
    if (cv_err[k] < cv_err[best]) best = k;
  }

  LassoFit out;
  out.lambda = path[best];
  out.cv_error = cv_err[best] / folds;
  out.coef = lasso_fit(X, y, out.lambda);
  return out;
}

/// Ridge-penalized logistic regression by Newton's method. Used to seed and
/// benchmark the eta block; the ridge term keeps separated data finite.
inline Vector ridge_logistic(const Matrix& X, const Vector& z, double ridge = 1e-4,
                             int max_iter = 100, double tol = 1e-8) {
  const Index n = X.rows();
  const Index p = X.cols();
  Vector eta = Vector::Zero(p);
  for (int it = 0; it < max_iter; ++it) {
    Vector pr(n), w(n);
    const Vector xe = X * eta;
    for (Index i = 0; i < n; ++i) {
      pr(i) = logistic(xe(i));
      w(i) = pr(i) * (1.0 - pr(i));
    }
    const Vector g = X.transpose() * (pr - z) / static_cast<double>(n) + ridge * eta;
    Matrix H = X.transpose() * w.asDiagonal() * X / static_cast<double>(n);
    H.diagonal().array() += ridge;
    const Vector step = H.llt().solve(g);
    eta -= step;
    if (step.lpNorm<Eigen::Infinity>() <= tol) break;
  }
  return eta;
}

}  // namespace rjm
