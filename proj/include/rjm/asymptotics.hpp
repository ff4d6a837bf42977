#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rjm/loss.hpp"
#include "rjm/types.hpp"

namespace rjm {

struct MatrixBlocks {
  Matrix beta;
  Matrix omega;
  Matrix eta;
};

namespace detail {

// Accumulates sum_i c_i x_iS x_iS' over the column subset S, in row order,
// so a restricted block is entrywise identical to the corresponding
// submatrix of the full block.
inline void rank_one_add(Matrix& M, const Matrix& X, Index i, const std::vector<Index>& cols,
                         double c) {
  if (c == 0.0) return;
  for (size_t a = 0; a < cols.size(); ++a) {
    const double xa = X(i, cols[a]);
    for (size_t b = 0; b < cols.size(); ++b) {
      M(a, b) += c * xa * X(i, cols[b]);
    }
  }
}

inline std::vector<Index> all_cols(Index p) {
  std::vector<Index> c(p);
  for (Index j = 0; j < p; ++j) c[j] = j;
  return c;
}

inline MatrixBlocks compute_J_cols(const Dataset& d, const ModelParams& th, double alpha,
                                   const std::vector<Index>& cb, const std::vector<Index>& co,
                                   const std::vector<Index>& ce) {
  const double s2 = th.sigma2;
  const double cnorm = std::pow(2.0 * kPi * s2, -alpha / 2.0);
  const double coef_reg = cnorm / (s2 * std::pow(1.0 + alpha, 1.5));
  const double coef_eta = cnorm / std::sqrt(1.0 + alpha);
  const Vector xe = d.X() * th.eta;
  MatrixBlocks J{Matrix::Zero(cb.size(), cb.size()), Matrix::Zero(co.size(), co.size()),
                 Matrix::Zero(ce.size(), ce.size())};
  for (Index i = 0; i < d.n(); ++i) {
    const double pi = logistic(xe(i));
    const double qi = 1.0 - pi;
    const double pa = std::pow(pi, 1.0 + alpha);
    const double qa = std::pow(qi, 1.0 + alpha);
    rank_one_add(J.beta, d.X(), i, cb, coef_reg * pa);
    rank_one_add(J.omega, d.X(), i, co, coef_reg * qa);
    rank_one_add(J.eta, d.X(), i, ce, coef_eta * (qi * qi * pa + pi * pi * qa));
  }
  const double n = static_cast<double>(d.n());
  J.beta /= n;
  J.omega /= n;
  J.eta /= n;
  return J;
}

inline MatrixBlocks compute_K_cols(const Dataset& d, const ModelParams& th, double alpha,
                                   const std::vector<Index>& cb, const std::vector<Index>& co,
                                   const std::vector<Index>& ce) {
  const double s2 = th.sigma2;
  const double cnorm = std::pow(2.0 * kPi * s2, -alpha / 2.0);
  const double coef_reg = cnorm * cnorm / (s2 * std::pow(1.0 + 2.0 * alpha, 1.5));
  const double coef_eta = cnorm * cnorm / std::sqrt(1.0 + 2.0 * alpha);
  const double coef_xi = cnorm / std::sqrt(1.0 + alpha);
  const Vector xe = d.X() * th.eta;
  MatrixBlocks K{Matrix::Zero(cb.size(), cb.size()), Matrix::Zero(co.size(), co.size()),
                 Matrix::Zero(ce.size(), ce.size())};
  for (Index i = 0; i < d.n(); ++i) {
    const double pi = logistic(xe(i));
    const double qi = 1.0 - pi;
    const double p2a = std::pow(pi, 1.0 + 2.0 * alpha);
    const double q2a = std::pow(qi, 1.0 + 2.0 * alpha);
    rank_one_add(K.beta, d.X(), i, cb, coef_reg * p2a);
    rank_one_add(K.omega, d.X(), i, co, coef_reg * q2a);
    // conditional second moment of the eta score minus its conditional mean
    const double second = coef_eta * (qi * qi * p2a + pi * pi * q2a);
    const double xi = coef_xi * pi * qi * (std::pow(pi, alpha) - std::pow(qi, alpha));
    rank_one_add(K.eta, d.X(), i, ce, second - xi * xi);
  }
  const double n = static_cast<double>(d.n());
  K.beta /= n;
  K.omega /= n;
  K.eta /= n;
  return K;
}

}  // namespace detail

/// Sensitivity matrix of the estimating equations, one block per coefficient
/// group, averaged over the sample and evaluated at th. Cross-group blocks
/// vanish identically and are not represented.
inline MatrixBlocks compute_J(const Dataset& d, const ModelParams& th, double alpha) {
  check_params(th, d.p());
  check_config(DPDConfig{alpha, 0.0, 0.0, 0.0});
  const auto cols = detail::all_cols(d.p());
  return detail::compute_J_cols(d, th, alpha, cols, cols, cols);
}

/// Variability matrix of the estimating equations, same layout as compute_J.
inline MatrixBlocks compute_K(const Dataset& d, const ModelParams& th, double alpha) {
  check_params(th, d.p());
  check_config(DPDConfig{alpha, 0.0, 0.0, 0.0});
  const auto cols = detail::all_cols(d.p());
  return detail::compute_K_cols(d, th, alpha, cols, cols, cols);
}

struct SandwichCov {
  MatrixBlocks J;
  MatrixBlocks K;
  Matrix cov;            // 3p x 3p block-diagonal J^{-1} K J^{-1}
  double trace_JinvK = 0.0;
};

namespace detail {

inline Matrix sandwich_block(const Matrix& J, const Matrix& K, const char* name,
                             double* trace_acc) {
  if (J.rows() == 0) return Matrix(0, 0);
  Eigen::LLT<Matrix> llt(J);
  if (llt.info() != Eigen::Success) {
    throw rank_error(std::string("sandwich_cov: J block for ") + name +
                     " is singular or not positive definite");
  }
  const Matrix JinvK = llt.solve(K);
  if (trace_acc) *trace_acc += JinvK.trace();
  Matrix cov = llt.solve(JinvK.transpose());
  cov = 0.5 * (cov + cov.transpose()).eval();
  return cov;
}

}  // namespace detail

/// Sandwich covariance J^{-1} K J^{-1} assembled blockwise. Scaled per
/// observation: divide by n (see standard_errors) for the covariance of the
/// estimates themselves. Throws rank_error naming the offending block when a
/// J block cannot be Cholesky-factored.
inline SandwichCov sandwich_cov(const MatrixBlocks& J, const MatrixBlocks& K) {
  if (J.beta.rows() != K.beta.rows() || J.omega.rows() != K.omega.rows() ||
      J.eta.rows() != K.eta.rows()) {
    throw dimension_error("sandwich_cov: J and K block sizes differ");
  }
  SandwichCov out;
  out.J = J;
  out.K = K;
  const Index p1 = J.beta.rows(), p2 = J.omega.rows(), p3 = J.eta.rows();
  out.cov = Matrix::Zero(p1 + p2 + p3, p1 + p2 + p3);
  out.cov.topLeftCorner(p1, p1) = detail::sandwich_block(J.beta, K.beta, "beta", &out.trace_JinvK);
  out.cov.block(p1, p1, p2, p2) = detail::sandwich_block(J.omega, K.omega, "omega", &out.trace_JinvK);
  out.cov.bottomRightCorner(p3, p3) = detail::sandwich_block(J.eta, K.eta, "eta", &out.trace_JinvK);
  return out;
}

/// Per-coefficient standard errors sqrt(diag(cov)/n) in (beta, omega, eta)
/// order. Diagonal entries in [-1e-10, 0) are treated as rounded zeros;
/// anything more negative indicates an inconsistent covariance and throws.
inline Vector standard_errors(const SandwichCov& sc, Index n) {
  if (n < 1) throw invalid_argument_error("standard_errors: n must be >= 1");
  Vector se(sc.cov.rows());
  for (Index j = 0; j < sc.cov.rows(); ++j) {
    double v = sc.cov(j, j);
    if (v < -1e-10) {
      throw numerical_error("standard_errors: covariance diagonal entry " + std::to_string(j) +
                            " is " + std::to_string(v) + ", below the rounding floor");
    }
    if (v < 0.0) v = 0.0;
    se(j) = std::sqrt(v / static_cast<double>(n));
  }
  return se;
}

}  // namespace rjm
