#pragma once

#include <cmath>

#include "rjm/model.hpp"
#include "rjm/types.hpp"

namespace rjm {

namespace detail {

// exp(-alpha r^2 / (2 sigma2)), hard-zeroed once the exponent is far past
// the underflow threshold. Keeps gross outliers from producing Inf * 0 when
// their residual term is multiplied by r later on.
inline double resid_weight(double r, double alpha, double sigma2) {
  const double t = alpha * r * r / (2.0 * sigma2);
  return t > 700.0 ? 0.0 : std::exp(-t);
}

// Unnormalized sums of the three pieces of the divergence objective, exposed
// separately so linearity in the empirical measure can be checked directly.
struct LossTerms {
  double fidelity = 0.0;  // sum over all i of p_i^{1+a} + (1-p_i)^{1+a}
  double group1 = 0.0;    // sum over z=1 rows of e(r_i) p_i^a
  double group0 = 0.0;    // sum over z=0 rows of e(s_i) (1-p_i)^a
};

inline LossTerms dpd_loss_terms(const Dataset& d, const ModelParams& th, double alpha) {
  const Vector xb = d.X() * th.beta;
  const Vector xo = d.X() * th.omega;
  const Vector xe = d.X() * th.eta;
  LossTerms t;
  for (Index i = 0; i < d.n(); ++i) {
    const double pi = logistic(xe(i));
    const double qi = 1.0 - pi;
    t.fidelity += std::pow(pi, 1.0 + alpha) + std::pow(qi, 1.0 + alpha);
    if (d.group_one(i)) {
      const double r = d.y()(i) - xb(i);
      t.group1 += resid_weight(r, alpha, th.sigma2) * std::pow(pi, alpha);
    } else {
      const double s = d.y()(i) - xo(i);
      t.group0 += resid_weight(s, alpha, th.sigma2) * std::pow(qi, alpha);
    }
  }
  return t;
}

}  // namespace detail

/// Density power divergence objective for the joint model, averaged over the
/// sample. The normal-density power constant (2 pi sigma2)^{-alpha/2} common
/// to every term is dropped; sigma2 is read from th and held fixed.
inline double dpd_loss(const Dataset& d, const ModelParams& th, double alpha) {
  check_params(th, d.p());
  check_config(DPDConfig{alpha, 0.0, 0.0, 0.0});
  const auto t = detail::dpd_loss_terms(d, th, alpha);
  const double n = static_cast<double>(d.n());
  return t.fidelity / (std::sqrt(alpha + 1.0) * n) -
         (1.0 + 1.0 / alpha) * (t.group1 + t.group0) / n;
}

inline double l1_norm(const Vector& v) { return v.lpNorm<1>(); }

inline double penalized_objective(const Dataset& d, const ModelParams& th, const DPDConfig& cfg) {
  check_config(cfg);
  return dpd_loss(d, th, cfg.alpha) + cfg.lambda1 * l1_norm(th.beta) +
         cfg.lambda2 * l1_norm(th.omega) + cfg.lambda3 * l1_norm(th.eta);
}

struct LossGradient {
  Vector beta;
  Vector omega;
  Vector eta;
};

namespace detail {

// d/d(beta) of the objective. Depends on beta (through the z=1 residuals)
// and eta (through p_i) only.
inline Vector grad_beta_block(const Dataset& d, const Vector& beta, const Vector& eta,
                              double sigma2, double alpha) {
  const Vector xb = d.X() * beta;
  const Vector xe = d.X() * eta;
  Vector g = Vector::Zero(d.p());
  for (Index i = 0; i < d.n(); ++i) {
    if (!d.group_one(i)) continue;
    const double pi = logistic(xe(i));
    const double r = d.y()(i) - xb(i);
    const double c = std::pow(pi, alpha) * resid_weight(r, alpha, sigma2) * r;
    if (c != 0.0) g.noalias() += c * d.X().row(i).transpose();
  }
  g *= -(alpha + 1.0) / (static_cast<double>(d.n()) * sigma2);
  return g;
}

inline Vector grad_omega_block(const Dataset& d, const Vector& omega, const Vector& eta,
                               double sigma2, double alpha) {
  const Vector xo = d.X() * omega;
  const Vector xe = d.X() * eta;
  Vector g = Vector::Zero(d.p());
  for (Index i = 0; i < d.n(); ++i) {
    if (d.group_one(i)) continue;
    const double qi = 1.0 - logistic(xe(i));
    const double s = d.y()(i) - xo(i);
    const double c = std::pow(qi, alpha) * resid_weight(s, alpha, sigma2) * s;
    if (c != 0.0) g.noalias() += c * d.X().row(i).transpose();
  }
  g *= -(alpha + 1.0) / (static_cast<double>(d.n()) * sigma2);
  return g;
}

inline Vector grad_eta_block(const Dataset& d, const Vector& beta, const Vector& omega,
                             const Vector& eta, double sigma2, double alpha) {
  const Vector xb = d.X() * beta;
  const Vector xo = d.X() * omega;
  const Vector xe = d.X() * eta;
  Vector fid = Vector::Zero(d.p());
  Vector g1 = Vector::Zero(d.p());
  Vector g0 = Vector::Zero(d.p());
  for (Index i = 0; i < d.n(); ++i) {
    const double pi = logistic(xe(i));
    const double qi = 1.0 - pi;
    const double c_fid = pi * qi * (std::pow(pi, alpha) - std::pow(qi, alpha));
    if (c_fid != 0.0) fid.noalias() += c_fid * d.X().row(i).transpose();
    if (d.group_one(i)) {
      const double r = d.y()(i) - xb(i);
      const double c = resid_weight(r, alpha, sigma2) * std::pow(pi, alpha) * qi;
      if (c != 0.0) g1.noalias() += c * d.X().row(i).transpose();
    } else {
      const double s = d.y()(i) - xo(i);
      const double c = resid_weight(s, alpha, sigma2) * pi * std::pow(qi, alpha);
      if (c != 0.0) g0.noalias() += c * d.X().row(i).transpose();
    }
  }
  const double n = static_cast<double>(d.n());
  return std::sqrt(alpha + 1.0) / n * fid - (alpha + 1.0) / n * g1 + (alpha + 1.0) / n * g0;
}

}  // namespace detail

/// Gradient of dpd_loss with respect to (beta, omega, eta) at th. sigma2 is
/// treated as a constant.
inline LossGradient dpd_gradient(const Dataset& d, const ModelParams& th, double alpha) {
  check_params(th, d.p());
  check_config(DPDConfig{alpha, 0.0, 0.0, 0.0});
  LossGradient g;
  g.beta = detail::grad_beta_block(d, th.beta, th.eta, th.sigma2, alpha);
  g.omega = detail::grad_omega_block(d, th.omega, th.eta, th.sigma2, alpha);
  g.eta = detail::grad_eta_block(d, th.beta, th.omega, th.eta, th.sigma2, alpha);
  return g;
}

}  // namespace rjm
