#pragma once

#include <cmath>

#include "rjm/types.hpp"

namespace rjm {

inline constexpr double kPi = 3.14159265358979323846;

// Overflow-safe logistic function. Split on the sign of t so exp() only ever
// sees non-positive arguments.
inline double logistic(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

inline double logistic_prob(const Vector& x, const Vector& eta) {
  if (x.size() != eta.size()) {
    throw dimension_error("logistic_prob: x has " + std::to_string(x.size()) +
                          " entries, eta has " + std::to_string(eta.size()));
  }
  return logistic(eta.dot(x));
}

/// Joint density f(y, z | x) under the model: the z = 1 arm is
/// N(x'beta, sigma2) with weight P(z = 1 | x), the z = 0 arm is
/// N(x'omega, sigma2) with the complementary weight.
inline double joint_density(double y, double z, const Vector& x, const ModelParams& th) {
  check_params(th, x.size());
  if (z != 0.0 && z != 1.0) {
    throw invalid_argument_error("joint_density: z must be 0 or 1, got " + std::to_string(z));
  }
  const double pr = logistic_prob(x, th.eta);
  const double mean = (z == 1.0) ? th.beta.dot(x) : th.omega.dot(x);
  const double w = (z == 1.0) ? pr : 1.0 - pr;
  const double r = y - mean;
  return w * std::exp(-r * r / (2.0 * th.sigma2)) / std::sqrt(2.0 * kPi * th.sigma2);
}

/// Point prediction at a new covariate vector. z_hat = 1 exactly when
/// p_hat > 0.5 (a tie goes to 0). classify_then_regress predicts from the
/// arm named by z_hat; mixture_mean blends both arms by p_hat.
inline Prediction predict(const Vector& x, const ModelParams& th,
                          PredictionRule rule = PredictionRule::classify_then_regress) {
  check_params(th, x.size());
  Prediction out;
  out.p_hat = logistic_prob(x, th.eta);
  out.z_hat = out.p_hat > 0.5 ? 1 : 0;
  const double mean1 = th.beta.dot(x);
  const double mean0 = th.omega.dot(x);
  out.y_hat = rule == PredictionRule::classify_then_regress
                  ? (out.z_hat == 1 ? mean1 : mean0)
                  : out.p_hat * mean1 + (1.0 - out.p_hat) * mean0;
  return out;
}

}  // namespace rjm
