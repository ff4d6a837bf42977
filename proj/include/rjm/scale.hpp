#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "rjm/lasso.hpp"
#include "rjm/types.hpp"

namespace rjm {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  double hi = v[m];
  if (v.size() % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + m - 1, v.begin() + m);
  return 0.5 * (v[m - 1] + hi);
}

struct VarianceEstimate {
  double sigma = 0.0;
  double sigma2 = 0.0;
  double s0 = 0.0;      // preliminary scale, 1.5 * median |r|
  Index n_safe = 0;     // residuals kept by the |r| < 2.5 s0 screen
};

/// Plug-in scale from residuals: a preliminary scale s0 = 1.5 median|r|
/// screens out residuals with |r| >= 2.5 s0, and the final scale is
/// 1.5 median|r| over the survivors. The variance is floored at 1e-12 so a
/// degenerate residual vector still yields a usable value.
inline VarianceEstimate pse_sigma(const Vector& residuals) {
  if (residuals.size() == 0) {
    throw invalid_argument_error("pse_sigma: empty residual vector");
  }
  if (!residuals.allFinite()) {
    throw invalid_argument_error("pse_sigma: residuals must be finite");
  }
  std::vector<double> a(residuals.size());
  for (Index i = 0; i < residuals.size(); ++i) a[i] = std::abs(residuals(i));
  VarianceEstimate out;
  out.s0 = 1.5 * median(a);
  std::vector<double> safe;
  safe.reserve(a.size());
  for (double v : a) {
    if (v < 2.5 * out.s0) safe.push_back(v);
  }
  out.n_safe = static_cast<Index>(safe.size());
  out.sigma = safe.empty() ? 0.0 : 1.5 * median(safe);
  out.sigma2 = std::max(out.sigma * out.sigma, 1e-12);
  return out;
}

struct PilotFit {
  Vector coef;        // pooled lasso coefficients for y on X
  Vector residuals;   // y - X coef
  double lambda = 0.0;
  VarianceEstimate scale;
};

/// Pooled preliminary fit of y on X (the binary response is ignored here) by
/// cross-validated lasso, plus the plug-in scale of its residuals. This is
/// the sigma2 the penalized fit runs with.
inline PilotFit lasso_pilot(const Dataset& d, Rng& rng, int folds = 5, int path_points = 100) {
  PilotFit out;
  const LassoFit l = lasso_cv(d.X(), d.y(), rng, folds, path_points);
  out.coef = l.coef;
  out.lambda = l.lambda;
  out.residuals = d.y() - d.X() * l.coef;
  out.scale = pse_sigma(out.residuals);
  return out;
}

enum class SigmaMethod { pse, mse };

/// Final scale refresh once coefficients are available: residuals are taken
/// against the arm each row belongs to, then reduced by pse_sigma (default)
/// or by a plain mean of squares.
inline VarianceEstimate refresh_sigma(const Dataset& d, const ModelParams& th,
                                      SigmaMethod method = SigmaMethod::pse) {
  check_params(th, d.p());
  Vector r(d.n());
  const Vector xb = d.X() * th.beta;
  const Vector xo = d.X() * th.omega;
  for (Index i = 0; i < d.n(); ++i) {
    r(i) = d.y()(i) - (d.group_one(i) ? xb(i) : xo(i));
  }
  if (method == SigmaMethod::pse) return pse_sigma(r);
  VarianceEstimate out;
  out.sigma2 = std::max(r.squaredNorm() / static_cast<double>(d.n()), 1e-12);
  out.sigma = std::sqrt(out.sigma2);
  out.s0 = out.sigma;
  out.n_safe = d.n();
  return out;
}

}  // namespace rjm
