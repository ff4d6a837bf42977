#pragma once

// Shared dataset builders for tests.

#include <cstdint>

#include "rjm/rng.hpp"
#include "rjm/types.hpp"

namespace testsupport {

struct Instance {
  Instance(rjm::Dataset d, rjm::ModelParams th, double a)
      : data(std::move(d)), params(std::move(th)), alpha(a) {}
  rjm::Dataset data;
  rjm::ModelParams params;
  double alpha;
};

// Small random problem: n in [2, n_max], p in [1, p_max], standard normal
// covariates and responses, mixed group labels, moderate coefficients.
inline Instance random_instance(rjm::Rng& rng, int n_max = 10, int p_max = 4) {
  const rjm::Index n = 2 + static_cast<rjm::Index>(rng.uniform_index(n_max - 1));
  const rjm::Index p = 1 + static_cast<rjm::Index>(rng.uniform_index(p_max));
  rjm::Matrix X(n, p);
  for (rjm::Index i = 0; i < n; ++i) {
    for (rjm::Index j = 0; j < p; ++j) X(i, j) = rng.normal();
  }
  rjm::Vector y(n), z(n);
  for (rjm::Index i = 0; i < n; ++i) {
    y(i) = 2.0 * rng.normal();
    z(i) = rng.bernoulli(0.5);
  }
  z(0) = 1.0;  // keep both groups present
  if (n > 1) z(1) = 0.0;

  rjm::ModelParams th;
  th.beta = rjm::Vector(p);
  th.omega = rjm::Vector(p);
  th.eta = rjm::Vector(p);
  for (rjm::Index j = 0; j < p; ++j) {
    th.beta(j) = 0.8 * rng.normal();
    th.omega(j) = 0.8 * rng.normal();
    th.eta(j) = 0.6 * rng.normal();
  }
  th.sigma2 = 0.5 + 1.5 * rng.uniform();

  const double alphas[3] = {0.5, 1.0, 2.0};
  const double alpha = alphas[rng.uniform_index(3)];
  return Instance(rjm::Dataset(std::move(X), std::move(y), std::move(z)), std::move(th), alpha);
}

// Clean two-arm Gaussian data drawn from the model itself.
inline rjm::Dataset model_data(rjm::Rng& rng, rjm::Index n, const rjm::ModelParams& truth) {
  const rjm::Index p = truth.beta.size();
  rjm::Matrix X(n, p);
  for (rjm::Index i = 0; i < n; ++i) {
    for (rjm::Index j = 0; j < p; ++j) X(i, j) = rng.normal();
  }
  rjm::Vector y(n), z(n);
  const double sd = std::sqrt(truth.sigma2);
  for (rjm::Index i = 0; i < n; ++i) {
    double te = 0.0;
    for (rjm::Index j = 0; j < p; ++j) te += truth.eta(j) * X(i, j);
    z(i) = rng.bernoulli(te >= 0.0 ? 1.0 / (1.0 + std::exp(-te))
                                   : std::exp(te) / (1.0 + std::exp(te)));
    double mean = 0.0;
    for (rjm::Index j = 0; j < p; ++j) {
      mean += (z(i) == 1.0 ? truth.beta(j) : truth.omega(j)) * X(i, j);
    }
    y(i) = mean + sd * rng.normal();
  }
  return rjm::Dataset(std::move(X), std::move(y), std::move(z));
}

}  // namespace testsupport
