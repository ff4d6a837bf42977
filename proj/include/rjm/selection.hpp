#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rjm/asymptotics.hpp"
#include "rjm/parallel.hpp"
#include "rjm/scale.hpp"
#include "rjm/solver.hpp"
#include "rjm/types.hpp"

namespace rjm {

/// Log-spaced penalty grid, one axis per coefficient block, each descending
/// from lambda_max to lambda_min = 1e-3 lambda_max.
struct LambdaGrid {
  std::array<double, 2> range1{0.0, 0.0};  // {min, max} for lambda1
  std::array<double, 2> range2{0.0, 0.0};
  std::array<double, 2> range3{0.0, 0.0};
  int points_per_axis = 10;

  std::vector<double> axis(int which) const {
    const auto& r = which == 0 ? range1 : which == 1 ? range2 : range3;
    std::vector<double> v(points_per_axis);
    v.front() = r[1];
    for (int i = 1; i + 1 < points_per_axis; ++i) {
      const double f = static_cast<double>(i) / (points_per_axis - 1);
      v[i] = std::exp(std::log(r[1]) + f * (std::log(r[0]) - std::log(r[1])));
    }
    // endpoints are pinned exactly; the exp/log round trip can drift a ulp,
    // which matters at the all-zero end of the path
    if (points_per_axis > 1) v.back() = r[0];
    return v;
  }
};

inline void check_grid(const LambdaGrid& g) {
  if (g.points_per_axis < 1) {
    throw invalid_argument_error("LambdaGrid: points_per_axis must be >= 1");
  }
  for (const auto& r : {g.range1, g.range2, g.range3}) {
    if (!(r[0] > 0.0) || !(r[0] < r[1]) || !std::isfinite(r[1])) {
      throw invalid_argument_error("LambdaGrid: each axis needs 0 < min < max, finite");
    }
  }
}

/// Grid construction from the data itself: lambda_max per axis is the
/// largest gradient magnitude of the matching block at the all-zero
/// coefficient point, i.e. the smallest level whose very first proximal step
/// from zero is the zero vector.
inline LambdaGrid make_grid(const Dataset& d, int points_per_axis, double alpha, double sigma2) {
  const LossGradient g = dpd_gradient(d, zero_params(d.p(), sigma2), alpha);
  const std::array<double, 3> lmax{g.beta.cwiseAbs().maxCoeff(), g.omega.cwiseAbs().maxCoeff(),
                                   g.eta.cwiseAbs().maxCoeff()};
  const char* names[3] = {"lambda1", "lambda2", "lambda3"};
  for (int b = 0; b < 3; ++b) {
    if (!(lmax[b] > 0.0) || !std::isfinite(lmax[b])) {
      throw selection_error(std::string("make_grid: degenerate axis for ") + names[b] +
                            ": gradient at zero has no nonzero entry");
    }
  }
  LambdaGrid grid;
  grid.points_per_axis = points_per_axis;
  grid.range1 = {1e-3 * lmax[0], lmax[0]};
  grid.range2 = {1e-3 * lmax[1], lmax[1]};
  grid.range3 = {1e-3 * lmax[2], lmax[2]};
  check_grid(grid);
  return grid;
}

struct ActiveSets {
  std::vector<Index> beta;
  std::vector<Index> omega;
  std::vector<Index> eta;
};

inline ActiveSets active_sets(const ModelParams& th) {
  ActiveSets a;
  for (Index j = 0; j < th.beta.size(); ++j) {
    if (th.beta(j) != 0.0) a.beta.push_back(j);
  }
  for (Index j = 0; j < th.omega.size(); ++j) {
    if (th.omega(j) != 0.0) a.omega.push_back(j);
  }
  for (Index j = 0; j < th.eta.size(); ++j) {
    if (th.eta(j) != 0.0) a.eta.push_back(j);
  }
  return a;
}

namespace detail {

inline bool restricted_trace(const Matrix& Jr, const Matrix& Kr, double* acc) {
  if (Jr.rows() == 0) return true;  // empty block contributes zero
  Eigen::LLT<Matrix> llt(Jr);
  if (llt.info() != Eigen::Success) return false;
  *acc += llt.solve(Kr).trace();
  return true;
}

inline Matrix submatrix(const Matrix& M, const std::vector<Index>& idx) {
  Matrix out(idx.size(), idx.size());
  for (size_t a = 0; a < idx.size(); ++a) {
    for (size_t b = 0; b < idx.size(); ++b) {
      out(a, b) = M(idx[a], idx[b]);
    }
  }
  return out;
}

}  // namespace detail

/// Complexity part of the information criterion,
///   (1 + alpha) * sum of blockwise tr(J_S^{-1} K_S) / n,
/// where each block of J and K is restricted to the rows/columns in the
/// matching active set. Returns +infinity if a restricted J block cannot be
/// factored, recording why in *warnings when given.
inline double ric_complexity(const MatrixBlocks& J, const MatrixBlocks& K, const ActiveSets& act,
                             double alpha, Index n, std::vector<std::string>* warnings = nullptr) {
  double tr = 0.0;
  const std::array<const std::vector<Index>*, 3> sets{&act.beta, &act.omega, &act.eta};
  const std::array<const Matrix*, 3> Js{&J.beta, &J.omega, &J.eta};
  const std::array<const Matrix*, 3> Ks{&K.beta, &K.omega, &K.eta};
  const char* names[3] = {"beta", "omega", "eta"};
  for (int b = 0; b < 3; ++b) {
    const Matrix Jr = detail::submatrix(*Js[b], *sets[b]);
    const Matrix Kr = detail::submatrix(*Ks[b], *sets[b]);
    if (!detail::restricted_trace(Jr, Kr, &tr)) {
      if (warnings) {
        warnings->push_back(std::string("ric: restricted J block for ") + names[b] +
                            " is singular; criterion set to +inf");
      }
      return std::numeric_limits<double>::infinity();
    }
  }
  return (1.0 + alpha) * tr / static_cast<double>(n);
}

/// Robust information criterion of a fitted model: the unpenalized loss at
/// the estimate plus ric_complexity over the estimate's active sets.
///
/// Both terms are scored at the estimate's own residual scale, not at the
/// pilot sigma^2 the optimizer ran with: sigma^2 is re-estimated from the
/// fitted residuals, and the loss is multiplied by its full normal-density
/// constant (2 pi sigma^2)^(-alpha/2), the same factor J^{-1}K carries. The
/// pilot scale absorbs the gap between the two regression arms and can sit
/// far above the conditional noise; scored there, the complexity term is
/// suppressed by the constant and the criterion drifts to the smallest
/// penalties. Re-scoring at the fitted scale keeps both terms comparable.
inline double ric(const Dataset& d, const ModelParams& th, double alpha,
                  std::vector<std::string>* warnings = nullptr) {
  check_params(th, d.p());
  ModelParams ev = th;
  ev.sigma2 = refresh_sigma(d, th).sigma2;
  const ActiveSets act = active_sets(th);
  const auto Jr = detail::compute_J_cols(d, ev, alpha, act.beta, act.omega, act.eta);
  const auto Kr = detail::compute_K_cols(d, ev, alpha, act.beta, act.omega, act.eta);
  double tr = 0.0;
  const char* names[3] = {"beta", "omega", "eta"};
  const std::array<const Matrix*, 3> Js{&Jr.beta, &Jr.omega, &Jr.eta};
  const std::array<const Matrix*, 3> Ks{&Kr.beta, &Kr.omega, &Kr.eta};
  for (int b = 0; b < 3; ++b) {
    if (!detail::restricted_trace(*Js[b], *Ks[b], &tr)) {
      if (warnings) {
        warnings->push_back(std::string("ric: restricted J block for ") + names[b] +
                            " is singular; criterion set to +inf");
      }
      return std::numeric_limits<double>::infinity();
    }
  }
  const double scale = std::pow(2.0 * kPi * ev.sigma2, -alpha / 2.0);
  return scale * dpd_loss(d, ev, alpha) + (1.0 + alpha) * tr / static_cast<double>(d.n());
}

inline double ric(const Dataset& d, const FitResult& fr, double alpha,
                  std::vector<std::string>* warnings = nullptr) {
  return ric(d, fr.params, alpha, warnings);
}

struct FitSummary {
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  FitStatus status = FitStatus::converged;
};

struct SelectionResult {
  std::array<double, 3> best_lambdas{};
  double best_ric = std::numeric_limits<double>::infinity();
  ModelParams best_params;
  FitSummary best_fit;

  struct Entry {
    std::array<double, 3> lambdas{};
    double ric = 0.0;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    std::array<int, 3> nnz{};
  };
  std::vector<Entry> surface;  // enumeration order: lambda1, lambda2, lambda3
  std::vector<std::string> warnings;
};

struct GridSearchOptions {
  int threads = 1;
  bool warm_start = true;  // reuse the previous solution along the lambda3 axis
};

namespace detail {

struct CandidateOutcome {
  SelectionResult::Entry entry;
  ModelParams params;
  FitSummary summary;
  std::vector<std::string> warnings;
};

inline CandidateOutcome evaluate_candidate(const Dataset& d, double alpha,
                                           const std::array<double, 3>& lam,
                                           const OptimizerConfig& opt, double sigma2) {
  CandidateOutcome out;
  const DPDConfig cfg{alpha, lam[0], lam[1], lam[2]};
  const FitResult fr = fit(d, cfg, opt, sigma2);
  out.params = fr.params;
  out.summary = {fr.objective, fr.iterations, fr.converged, fr.status};
  out.entry.lambdas = lam;
  out.entry.objective = fr.objective;
  out.entry.iterations = fr.iterations;
  out.entry.converged = fr.converged;
  const ActiveSets act = active_sets(fr.params);
  out.entry.nnz = {static_cast<int>(act.beta.size()), static_cast<int>(act.omega.size()),
                   static_cast<int>(act.eta.size())};
  out.entry.ric = ric(d, fr.params, alpha, &out.warnings);
  return out;
}

// Scan for the winner: smallest criterion value; exact ties go to the
// candidate with the larger lambda1+lambda2+lambda3, then to enumeration
// order. Order-invariant by construction.
inline size_t select_best(const std::vector<SelectionResult::Entry>& surface) {
  size_t best = surface.size();
  double best_ric = std::numeric_limits<double>::infinity();
  double best_sum = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < surface.size(); ++i) {
    const double r = surface[i].ric;
    if (std::isinf(r) && r > 0) continue;
    const double sum = surface[i].lambdas[0] + surface[i].lambdas[1] + surface[i].lambdas[2];
    if (r < best_ric || (r == best_ric && sum > best_sum)) {
      best = i;
      best_ric = r;
      best_sum = sum;
    }
  }
  return best;
}

}  // namespace detail

/// Fits and scores an explicit list of penalty triples, each from the
/// configured initial point (no warm starts, so duplicate candidates yield
/// bit-identical entries), and returns the criterion minimizer.
inline SelectionResult grid_search(const Dataset& d,
                                   const std::vector<std::array<double, 3>>& candidates,
                                   double alpha, const OptimizerConfig& opt, double sigma2,
                                   const GridSearchOptions& gopt = {}) {
  if (candidates.empty()) throw selection_error("grid_search: no candidates given");
  std::vector<detail::CandidateOutcome> out(candidates.size());
  parallel_for(static_cast<int>(candidates.size()), gopt.threads, [&](int i) {
    out[i] = detail::evaluate_candidate(d, alpha, candidates[i], opt, sigma2);
  });

  SelectionResult res;
  res.surface.reserve(candidates.size());
  for (auto& o : out) {
    res.surface.push_back(o.entry);
    for (auto& w : o.warnings) res.warnings.push_back(std::move(w));
  }
  const size_t best = detail::select_best(res.surface);
  if (best == res.surface.size()) {
    throw selection_error("grid_search: criterion is +inf for every candidate");
  }
  res.best_lambdas = res.surface[best].lambdas;
  res.best_ric = res.surface[best].ric;
  res.best_params = out[best].params;
  res.best_fit = out[best].summary;
  return res;
}

/// Full grid search over a LambdaGrid. Work is parallelized over
/// (lambda1, lambda2) pairs; within a pair the lambda3 axis descends from
/// its largest value, warm-starting each fit at the previous solution.
/// Results do not depend on the thread count.
inline SelectionResult grid_search(const Dataset& d, const LambdaGrid& grid, double alpha,
                                   const OptimizerConfig& opt, double sigma2,
                                   const GridSearchOptions& gopt = {}) {
  check_grid(grid);
  const auto a1 = grid.axis(0), a2 = grid.axis(1), a3 = grid.axis(2);
  const int k = grid.points_per_axis;
  const int n_rows = k * k;
  const int n_cand = n_rows * k;

  // The shared starting point is resolved once so every row begins from the
  // same place regardless of scheduling.
  OptimizerConfig row_opt = opt;
  row_opt.init_params = detail::resolve_init(d, opt, sigma2);
  row_opt.init = InitKind::custom;

  std::vector<detail::CandidateOutcome> out(n_cand);
  parallel_for(n_rows, gopt.threads, [&](int row) {
    const int i1 = row / k, i2 = row % k;
    OptimizerConfig local = row_opt;
    for (int i3 = 0; i3 < k; ++i3) {
      const std::array<double, 3> lam{a1[i1], a2[i2], a3[i3]};
      const int idx = row * k + i3;
      out[idx] = detail::evaluate_candidate(d, alpha, lam, local, sigma2);
      if (gopt.warm_start) {
        local.init_params = out[idx].params;
        local.init = InitKind::custom;
      }
    }
  });

  SelectionResult res;
  res.surface.reserve(n_cand);
  for (auto& o : out) {
    res.surface.push_back(o.entry);
    for (auto& w : o.warnings) res.warnings.push_back(std::move(w));
  }
  const size_t best = detail::select_best(res.surface);
  if (best == res.surface.size()) {
    throw selection_error("grid_search: criterion is +inf for every candidate");
  }
  res.best_lambdas = res.surface[best].lambdas;
  res.best_ric = res.surface[best].ric;
  res.best_params = out[best].params;
  res.best_fit = out[best].summary;
  return res;
}

}  // namespace rjm
