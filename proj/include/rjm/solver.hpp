#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rjm/lasso.hpp"
#include "rjm/loss.hpp"
#include "rjm/types.hpp"

namespace rjm {

enum class BBVariant { v1, v2 };
enum class InitKind { zeros, lasso, custom };
enum class FitStatus { converged, max_iterations, stalled };

/// Tuning constants of the proximal-gradient solver. Defaults follow the
/// reference configuration used throughout the simulations.
struct OptimizerConfig {
  int max_iter = 2000;
  double tol = 1e-4;           // relative-change threshold, all three blocks
  double accept_slack = 1e-4;  // xi, slope of the sufficient-decrease test
  double inflate = 1.5;        // zeta, step-scalar inflation on rejection
  int window = 8;              // L, non-monotone look-back length
  double gamma_min = 1e-4;
  double gamma_max = 1e2;
  BBVariant bb = BBVariant::v1;
  // On rejection inflate all three step scalars (the verbatim rule). With
  // false, only blocks that actually moved in the rejected attempt inflate.
  bool inflate_all_blocks = true;
  InitKind init = InitKind::lasso;
  ModelParams init_params;      // consulted when init == custom
  std::uint64_t init_seed = 1;  // drives the fold split of the pilot CV
};

inline void check_optimizer(const OptimizerConfig& c) {
  if (c.max_iter < 1) throw invalid_argument_error("OptimizerConfig: max_iter must be >= 1");
  if (!(c.tol >= 0.0)) throw invalid_argument_error("OptimizerConfig: tol must be >= 0");
  if (!(c.accept_slack > 0.0)) throw invalid_argument_error("OptimizerConfig: accept_slack must be > 0");
  if (!(c.inflate > 1.0)) throw invalid_argument_error("OptimizerConfig: inflate must be > 1");
  if (c.window < 1) throw invalid_argument_error("OptimizerConfig: window must be >= 1");
  if (!(c.gamma_min > 0.0) || !(c.gamma_min < 1.0) || !(c.gamma_max > 1.0)) {
    throw invalid_argument_error("OptimizerConfig: need 0 < gamma_min < 1 < gamma_max");
  }
}

inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

/// One proximal step on a block: minimizes
///   grad'(v - th) + (gamma/2) ||v - th||^2 + lambda ||v||_1
/// over v, which is soft thresholding of the gradient step th - grad/gamma
/// at level lambda/gamma.
inline Vector prox_block_update(const Vector& th, const Vector& grad, double gamma,
                                double lambda) {
  if (th.size() != grad.size()) {
    throw dimension_error("prox_block_update: block and gradient sizes differ");
  }
  if (!(gamma > 0.0)) throw invalid_argument_error("prox_block_update: gamma must be > 0");
  if (lambda < 0.0) throw invalid_argument_error("prox_block_update: lambda must be >= 0");
  Vector out(th.size());
  const double t = lambda / gamma;
  for (Index j = 0; j < th.size(); ++j) {
    out(j) = soft_threshold(th(j) - grad(j) / gamma, t);
  }
  return out;
}

/// Spectral (Barzilai-Borwein) step scalar from one-step difference history.
/// Empty history (the first iteration) yields 1. Nonpositive or non-finite
/// raw values, including 0/0 from a block that did not move, fall back to
/// gamma_min; everything else is clamped into [gamma_min, gamma_max].
inline double bb_step(const Vector& dtheta, const Vector& dgrad, BBVariant variant,
                      double gamma_min, double gamma_max) {
  if (dtheta.size() == 0 || dgrad.size() == 0) return 1.0;
  if (dtheta.size() != dgrad.size()) {
    throw dimension_error("bb_step: difference vectors have mismatched sizes");
  }
  const double sy = dtheta.dot(dgrad);
  double raw;
  if (variant == BBVariant::v1) {
    const double ss = dtheta.squaredNorm();
    raw = sy / ss;
  } else {
    raw = dgrad.squaredNorm() / sy;
  }
  if (!std::isfinite(raw) || raw <= 0.0) return gamma_min;
  return std::clamp(raw, gamma_min, gamma_max);
}

struct IterationRecord {
  std::array<double, 3> gamma{};        // accepted step scalars (beta, omega, eta)
  std::array<double, 3> step_sqnorm{};  // squared block moves at acceptance
  double objective = 0.0;               // accepted h value
  int rejections = 0;                   // inflation rounds before acceptance
};

struct FitResult {
  ModelParams params;
  double objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  FitStatus status = FitStatus::converged;
  bool converged = false;
  std::string message;
  // objective_trace[0] is the value at the initial point; one entry is
  // appended per accepted iteration, so the acceptance inequality can be
  // re-verified after the fact together with `steps`.
  std::vector<double> objective_trace;
  std::vector<IterationRecord> steps;
};

inline const char* to_string(FitStatus s) {
  switch (s) {
    case FitStatus::converged: return "converged";
    case FitStatus::max_iterations: return "max_iterations";
    case FitStatus::stalled: return "stalled";
  }
  return "unknown";
}

namespace detail {

// Relative block change with the conventions: 0/0 counts as 0, a move away
// from an exactly zero block counts with its absolute size.
inline double relative_change(const Vector& now, const Vector& prev) {
  const double diff = (now - prev).norm();
  const double scale = now.norm();
  if (scale == 0.0) return diff == 0.0 ? 0.0 : diff;
  return diff / scale;
}

inline ModelParams resolve_init(const Dataset& d, const OptimizerConfig& opt, double sigma2) {
  switch (opt.init) {
    case InitKind::zeros:
      return zero_params(d.p(), sigma2);
    case InitKind::custom: {
      ModelParams th = opt.init_params;
      th.sigma2 = sigma2;
      check_params(th, d.p());
      return th;
    }
    case InitKind::lasso: {
      ModelParams th;
      Rng rng(opt.init_seed);
      const LassoFit pilot = lasso_cv(d.X(), d.y(), rng);
      th.beta = pilot.coef;
      th.omega = pilot.coef;
      th.eta = ridge_logistic(d.X(), d.z());
      th.sigma2 = sigma2;
      return th;
    }
  }
  throw invalid_argument_error("fit: unknown init kind");
}

}  // namespace detail

/// Penalized fit by block-coordinate proximal gradient descent with spectral
/// step scalars and a non-monotone acceptance test.
///
/// Each iteration updates beta, omega, eta in that order, evaluating every
/// block gradient at the newest values of the blocks before it. A composite
/// candidate is kept only if
///   h(candidate) <= max over the last window+1 accepted values of h
///                   - accept_slack/2 * sum_b gamma_b ||move_b||^2,
/// otherwise the step scalars are inflated and the updates recomputed. Step
/// scalars come from bb_step; inflation is capped at gamma_max, and a
/// rejection with every scalar already at the cap stops the run as stalled.
/// Convergence is declared when the largest relative block change of an
/// accepted iteration drops to tol. On a stalled or exhausted run the best
/// accepted iterate (smallest h seen, including the start) is returned with
/// converged = false.
inline FitResult fit(const Dataset& d, const DPDConfig& cfg, const OptimizerConfig& opt,
                     double sigma2) {
  check_config(cfg);
  check_optimizer(opt);
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw invalid_argument_error("fit: sigma2 must be positive and finite");
  }

  ModelParams th = detail::resolve_init(d, opt, sigma2);
  const double h0 = penalized_objective(d, th, cfg);
  if (!std::isfinite(h0)) {
    throw initialization_error("fit: objective is not finite at the initial point");
  }

  FitResult res;
  res.objective_trace.reserve(64);
  res.objective_trace.push_back(h0);

  ModelParams best = th;
  double best_h = h0;

  Vector prev_beta, prev_omega, prev_eta;    // empty until one step is accepted
  Vector prev_gb, prev_go, prev_ge;

  for (int t = 0; t < opt.max_iter; ++t) {
    // Look-back window over accepted objective values.
    const int lo = std::max(t - opt.window, 0);
    double window_max = res.objective_trace[lo];
    for (int j = lo + 1; j <= t; ++j) {
      window_max = std::max(window_max, res.objective_trace[j]);
    }

    // Block gradients are evaluated in update order, each at the newest
    // values of the blocks before it. The omega gradient carries no beta
    // dependence at all, so only the eta gradient has to be refreshed when a
    // rejection changes the beta/omega candidates.
    const Vector gb = detail::grad_beta_block(d, th.beta, th.eta, sigma2, cfg.alpha);
    const Vector go = detail::grad_omega_block(d, th.omega, th.eta, sigma2, cfg.alpha);
    double g1 = bb_step(prev_beta.size() ? Vector(th.beta - prev_beta) : Vector(),
                        prev_gb.size() ? Vector(gb - prev_gb) : Vector(), opt.bb,
                        opt.gamma_min, opt.gamma_max);
    double g2 = bb_step(prev_omega.size() ? Vector(th.omega - prev_omega) : Vector(),
                        prev_go.size() ? Vector(go - prev_go) : Vector(), opt.bb,
                        opt.gamma_min, opt.gamma_max);
    double g3 = -1.0;  // fixed by the first attempt below

    ModelParams cand = th;
    Vector ge;
    int rejections = 0;
    bool accepted = false;
    std::array<double, 3> sq{};
    double h_cand = 0.0;

    while (true) {
      cand.beta = prox_block_update(th.beta, gb, g1, cfg.lambda1);
      cand.omega = prox_block_update(th.omega, go, g2, cfg.lambda2);
      ge = detail::grad_eta_block(d, cand.beta, cand.omega, th.eta, sigma2, cfg.alpha);
      if (g3 < 0.0) {
        g3 = bb_step(prev_eta.size() ? Vector(th.eta - prev_eta) : Vector(),
                     prev_ge.size() ? Vector(ge - prev_ge) : Vector(), opt.bb,
                     opt.gamma_min, opt.gamma_max);
      }
      cand.eta = prox_block_update(th.eta, ge, g3, cfg.lambda3);

      sq = {(cand.beta - th.beta).squaredNorm(), (cand.omega - th.omega).squaredNorm(),
            (cand.eta - th.eta).squaredNorm()};
      const double decrease = 0.5 * opt.accept_slack * (g1 * sq[0] + g2 * sq[1] + g3 * sq[2]);
      h_cand = penalized_objective(d, cand, cfg);
      if (std::isfinite(h_cand) && h_cand <= window_max - decrease) {
        accepted = true;
        break;
      }
      if (g1 >= opt.gamma_max && g2 >= opt.gamma_max && g3 >= opt.gamma_max) {
        break;  // stalled: nothing left to inflate
      }
      const bool all = opt.inflate_all_blocks;
      if (all || sq[0] > 0.0) g1 = std::min(g1 * opt.inflate, opt.gamma_max);
      if (all || sq[1] > 0.0) g2 = std::min(g2 * opt.inflate, opt.gamma_max);
      if (all || sq[2] > 0.0) g3 = std::min(g3 * opt.inflate, opt.gamma_max);
      ++rejections;
    }

    if (!accepted) {
      res.params = best;
      res.objective = best_h;
      res.iterations = t;
      res.status = FitStatus::stalled;
      res.converged = false;
      res.message = "step rejected with all step scalars at gamma_max after " +
                    std::to_string(rejections) + " inflations at iteration " + std::to_string(t);
      return res;
    }

    prev_beta = th.beta;
    prev_omega = th.omega;
    prev_eta = th.eta;
    prev_gb = gb;
    prev_go = go;
    prev_ge = ge;

    const double rc = std::max({detail::relative_change(cand.beta, th.beta),
                                detail::relative_change(cand.omega, th.omega),
                                detail::relative_change(cand.eta, th.eta)});
    th = cand;
    res.objective_trace.push_back(h_cand);
    res.steps.push_back({{g1, g2, g3}, sq, h_cand, rejections});
    if (h_cand < best_h) {
      best_h = h_cand;
      best = th;
    }

    if (rc <= opt.tol) {
      res.params = th;
      res.objective = h_cand;
      res.iterations = t + 1;
      res.status = FitStatus::converged;
      res.converged = true;
      return res;
    }
  }

  res.params = best;
  res.objective = best_h;
  res.iterations = opt.max_iter;
  res.status = FitStatus::max_iterations;
  res.converged = false;
  res.message = "iteration budget exhausted before the relative-change test was met";
  return res;
}

}  // namespace rjm
