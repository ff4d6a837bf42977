#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>

#include "rjm/errors.hpp"

namespace rjm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Fixed-design data for the joint model: a continuous response y, a binary
/// group label z, and a common design matrix X. Validated once on
/// construction and immutable afterwards, so instances can be shared freely
/// across threads.
class Dataset {
 public:
  Dataset(Matrix X, Vector y, Vector z)
      : X_(std::move(X)), y_(std::move(y)), z_(std::move(z)) {
    if (X_.rows() < 1 || X_.cols() < 1) {
      throw invalid_argument_error("Dataset: X must have at least one row and one column");
    }
    if (y_.size() != X_.rows() || z_.size() != X_.rows()) {
      throw dimension_error("Dataset: y has " + std::to_string(y_.size()) + " entries, z has " +
                            std::to_string(z_.size()) + ", X has " + std::to_string(X_.rows()) +
                            " rows");
    }
    if (!X_.allFinite() || !y_.allFinite()) {
      throw invalid_argument_error("Dataset: X and y must be finite");
    }
    for (Index i = 0; i < z_.size(); ++i) {
      if (z_(i) != 0.0 && z_(i) != 1.0) {
        throw invalid_argument_error("Dataset: z(" + std::to_string(i) + ") = " +
                                     std::to_string(z_(i)) + ", expected 0 or 1");
      }
    }
  }

  Index n() const { return X_.rows(); }
  Index p() const { return X_.cols(); }
  const Matrix& X() const { return X_; }
  const Vector& y() const { return y_; }
  const Vector& z() const { return z_; }
  bool group_one(Index i) const { return z_(i) == 1.0; }

 private:
  Matrix X_;
  Vector y_;
  Vector z_;
};

/// Coefficients of the joint model. beta drives the regression arm used when
/// z = 1, omega the arm used when z = 0, eta the logistic model for
/// P(z = 1 | x). sigma2 is the shared residual variance of both arms.
struct ModelParams {
  Vector beta;
  Vector omega;
  Vector eta;
  double sigma2 = 1.0;
};

inline void check_params(const ModelParams& th, Index p) {
  if (th.beta.size() != p || th.omega.size() != p || th.eta.size() != p) {
    throw dimension_error("ModelParams: block sizes (" + std::to_string(th.beta.size()) + ", " +
                          std::to_string(th.omega.size()) + ", " + std::to_string(th.eta.size()) +
                          ") do not all match p = " + std::to_string(p));
  }
  if (!th.beta.allFinite() || !th.omega.allFinite() || !th.eta.allFinite()) {
    throw invalid_argument_error("ModelParams: coefficients must be finite");
  }
  if (!(th.sigma2 > 0.0) || !std::isfinite(th.sigma2)) {
    throw invalid_argument_error("ModelParams: sigma2 must be a positive finite number, got " +
                                 std::to_string(th.sigma2));
  }
}

inline ModelParams zero_params(Index p, double sigma2 = 1.0) {
  ModelParams th;
  th.beta = Vector::Zero(p);
  th.omega = Vector::Zero(p);
  th.eta = Vector::Zero(p);
  th.sigma2 = sigma2;
  return th;
}

/// Loss and penalty configuration. alpha is the divergence exponent (alpha
/// -> 0 approaches maximum likelihood; use something like 1e-3 if that limit
/// is wanted, zero itself is rejected). lambda1..3 penalize beta, omega, eta.
struct DPDConfig {
  double alpha = 1.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
};

inline void check_config(const DPDConfig& cfg) {
  if (!(cfg.alpha > 0.0) || !std::isfinite(cfg.alpha)) {
    throw invalid_argument_error("DPDConfig: alpha must be positive and finite, got " +
                                 std::to_string(cfg.alpha));
  }
  for (double l : {cfg.lambda1, cfg.lambda2, cfg.lambda3}) {
    if (l < 0.0 || !std::isfinite(l)) {
      throw invalid_argument_error("DPDConfig: penalty levels must be finite and >= 0");
    }
  }
}

enum class PredictionRule {
  classify_then_regress,  // pick the arm indicated by z_hat
  mixture_mean,           // p_hat-weighted average of both arms
};

struct Prediction {
  double p_hat = 0.0;  // P(z = 1 | x)
  int z_hat = 0;       // 1 iff p_hat > 0.5
  double y_hat = 0.0;
};

}  // namespace rjm
