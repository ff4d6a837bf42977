#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "rjm/model.hpp"
#include "rjm/rng.hpp"
#include "rjm/scale.hpp"
#include "rjm/selection.hpp"
#include "rjm/solver.hpp"
#include "rjm/types.hpp"

namespace rjm {

/// Synthetic-data configuration. dense8 is the low-dimensional design:
/// p = 8 with constant truths (beta* = 3, omega* = 5, eta* = 5 throughout).
/// sparse50 is the p = 50 design where each block gets an independently
/// drawn support of round(sparsity * p) coordinates, active values
/// beta ~ N(3,1), omega ~ N(-5,1), eta ~ U(2,5). Covariates are standard
/// normal; noise is mean-zero Laplace with standard deviation noise_sd.
struct Scenario {
  enum class Design { dense8, sparse50 };
  Design design = Design::dense8;
  int p = 8;
  int n_train = 700;
  int n_test = 300;
  double sparsity = 1.0;
  double noise_sd = 1.0;

  static Scenario dense8() { return Scenario{}; }

  static Scenario sparse50(double sparsity) {
    if (!(sparsity > 0.0) || sparsity > 1.0) {
      throw invalid_argument_error("Scenario: sparsity must be in (0, 1]");
    }
    Scenario s;
    s.design = Design::sparse50;
    s.p = 50;
    s.sparsity = sparsity;
    return s;
  }
};

struct SimTruth {
  Vector beta;
  Vector omega;
  Vector eta;
};

struct SimData {
  SimData(Dataset tr, Dataset te, SimTruth t)
      : train(std::move(tr)), test(std::move(te)), truth(std::move(t)) {}
  Dataset train;
  Dataset test;
  SimTruth truth;
};

namespace detail {

inline std::vector<Index> sample_support(Rng& rng, Index p, Index k) {
  std::vector<Index> idx(p);
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    const Index j = i + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(p - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline Dataset draw_split(Rng& rng, const SimTruth& truth, Index n, Index p, double noise_sd) {
  Matrix X(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) X(i, j) = rng.normal();
  }
  const double b = noise_sd / std::sqrt(2.0);  // Laplace scale for this sd
  Vector y(n), z(n);
  for (Index i = 0; i < n; ++i) {
    const double pr = logistic(truth.eta.dot(X.row(i)));
    z(i) = rng.bernoulli(pr);
    const double mean = z(i) == 1.0 ? truth.beta.dot(X.row(i)) : truth.omega.dot(X.row(i));
    y(i) = mean + rng.laplace(b);
  }
  return Dataset(std::move(X), std::move(y), std::move(z));
}

}  // namespace detail

/// Draws one train/test pair. The draw order (truth, then the training
/// split, then the test split) is fixed and part of the seed contract.
inline SimData generate(const Scenario& sc, std::uint64_t seed) {
  Rng rng(seed);
  const Index p = sc.p;
  SimTruth truth;
  if (sc.design == Scenario::Design::dense8) {
    truth.beta = Vector::Constant(p, 3.0);
    truth.omega = Vector::Constant(p, 5.0);
    truth.eta = Vector::Constant(p, 5.0);
  } else {
    const Index k = static_cast<Index>(std::lround(sc.sparsity * static_cast<double>(p)));
    truth.beta = Vector::Zero(p);
    truth.omega = Vector::Zero(p);
    truth.eta = Vector::Zero(p);
    const auto sb = detail::sample_support(rng, p, k);
    const auto so = detail::sample_support(rng, p, k);
    const auto se = detail::sample_support(rng, p, k);
    for (Index j : sb) truth.beta(j) = 3.0 + rng.normal();
    for (Index j : so) truth.omega(j) = -5.0 + rng.normal();
    for (Index j : se) truth.eta(j) = 2.0 + 3.0 * rng.uniform();
  }
  Dataset train = detail::draw_split(rng, truth, sc.n_train, p, sc.noise_sd);
  Dataset test = detail::draw_split(rng, truth, sc.n_test, p, sc.noise_sd);
  return SimData(std::move(train), std::move(test), std::move(truth));
}

/// Which parts of a training row get corrupted, and how many rows. With
/// joint = true (the default) one row subset is drawn and every enabled
/// target is corrupted on it; otherwise each target draws its own subset.
struct ContaminationScheme {
  bool on_x = false;
  bool on_y = false;
  bool on_z = false;
  double rate = 0.0;
  bool joint = true;

  std::string code() const {
    std::string s;
    if (on_x) s += 'x';
    if (on_y) s += 'y';
    if (on_z) s += 'z';
    return s.empty() ? "none" : s;
  }

  static ContaminationScheme parse(const std::string& code, double rate) {
    if (!(rate >= 0.0) || rate > 1.0) {
      throw invalid_argument_error("ContaminationScheme: rate must be in [0, 1]");
    }
    ContaminationScheme s;
    s.rate = rate;
    if (code == "none") return s;
    for (char c : code) {
      if (c == 'x' && !s.on_x) {
        s.on_x = true;
      } else if (c == 'y' && !s.on_y) {
        s.on_y = true;
      } else if (c == 'z' && !s.on_z) {
        s.on_z = true;
      } else {
        throw invalid_argument_error("ContaminationScheme: bad code '" + code +
                                     "', expected none or a subset of xyz");
      }
    }
    return s;
  }

  // The seven non-trivial target combinations, in reporting order.
  static std::vector<std::string> all_codes() {
    return {"x", "y", "z", "xy", "xz", "yz", "xyz"};
  }
};

struct ContaminationResult {
  ContaminationResult(Dataset data_, std::vector<Index> rows_)
      : data(std::move(data_)), rows(std::move(rows_)) {}
  Dataset data;
  std::vector<Index> rows;  // union of corrupted row indices, sorted
};

/// Corrupts floor(rate * n) training rows. X rows are redrawn from a
/// multivariate normal centered at the column means + 5 with 1.2x the sample
/// covariance (moments taken from the clean data); y entries are redrawn
/// from N(20, 1); z entries are flipped. A zero row count returns the data
/// unchanged with an empty row list.
inline ContaminationResult contaminate(const Dataset& d, const ContaminationScheme& sc,
                                       std::uint64_t seed) {
  const Index n = d.n();
  const Index m = static_cast<Index>(std::floor(sc.rate * static_cast<double>(n)));
  const bool any_target = sc.on_x || sc.on_y || sc.on_z;
  if (m == 0 || !any_target) {
    return ContaminationResult(d, {});
  }

  Rng rng(seed);
  Matrix X = d.X();
  Vector y = d.y();
  Vector z = d.z();

  // Draw the row subsets first so the redraw noise does not shift them.
  std::vector<Index> rows_x, rows_y, rows_z;
  if (sc.joint) {
    const auto rows = detail::sample_support(rng, n, m);
    if (sc.on_x) rows_x = rows;
    if (sc.on_y) rows_y = rows;
    if (sc.on_z) rows_z = rows;
  } else {
    if (sc.on_x) rows_x = detail::sample_support(rng, n, m);
    if (sc.on_y) rows_y = detail::sample_support(rng, n, m);
    if (sc.on_z) rows_z = detail::sample_support(rng, n, m);
  }

  if (sc.on_x) {
    const Vector mu = d.X().colwise().mean();
    const Matrix centered = d.X().rowwise() - mu.transpose();
    Matrix cov = 1.2 * (centered.transpose() * centered) / static_cast<double>(n - 1);
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
      cov.diagonal().array() += 1e-10;
      llt.compute(cov);
      if (llt.info() != Eigen::Success) {
        throw numerical_error("contaminate: covariate covariance is not factorable");
      }
    }
    const Matrix L = llt.matrixL();
    const Vector shift = mu.array() + 5.0;
    for (Index i : rows_x) {
      Vector g(d.p());
      for (Index j = 0; j < d.p(); ++j) g(j) = rng.normal();
      X.row(i) = (shift + L * g).transpose();
    }
  }
  for (Index i : rows_y) y(i) = 20.0 + rng.normal();
  for (Index i : rows_z) z(i) = 1.0 - z(i);

  std::vector<Index> all = rows_x;
  all.insert(all.end(), rows_y.begin(), rows_y.end());
  all.insert(all.end(), rows_z.begin(), rows_z.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return ContaminationResult(Dataset(std::move(X), std::move(y), std::move(z)), std::move(all));
}

/// Test-set performance of a fitted parameter vector. rmspe follows the
/// reporting convention used throughout this project: the average of
/// sqrt((y - y_hat)^2), i.e. the mean absolute prediction error. rmse is the
/// conventional root mean squared error, kept alongside it. me is the share
/// of misclassified z. The false positive/negative rates are empty (not
/// zero) when the test split lacks the conditioning class.
struct EvalMetrics {
  double rmspe = 0.0;
  double rmse = 0.0;
  double me = 0.0;
  double l2_beta = 0.0;
  double l2_omega = 0.0;
  double l2_eta = 0.0;
  std::optional<double> fp_rate;  // P(z_hat = 1 | z = 0)
  std::optional<double> fn_rate;  // P(z_hat = 0 | z = 1)
};

inline EvalMetrics evaluate(const Dataset& test, const ModelParams& th, const SimTruth& truth,
                            PredictionRule rule = PredictionRule::classify_then_regress) {
  check_params(th, test.p());
  EvalMetrics m;
  double abs_sum = 0.0, sq_sum = 0.0;
  Index mis = 0, n0 = 0, n1 = 0, fp = 0, fn = 0;
  for (Index i = 0; i < test.n(); ++i) {
    const Prediction pr = predict(test.X().row(i).transpose(), th, rule);
    const double e = test.y()(i) - pr.y_hat;
    abs_sum += std::abs(e);
    sq_sum += e * e;
    const int zi = test.group_one(i) ? 1 : 0;
    if (pr.z_hat != zi) ++mis;
    if (zi == 0) {
      ++n0;
      if (pr.z_hat == 1) ++fp;
    } else {
      ++n1;
      if (pr.z_hat == 0) ++fn;
    }
  }
  const double n = static_cast<double>(test.n());
  m.rmspe = abs_sum / n;
  m.rmse = std::sqrt(sq_sum / n);
  m.me = static_cast<double>(mis) / n;
  m.l2_beta = (th.beta - truth.beta).norm();
  m.l2_omega = (th.omega - truth.omega).norm();
  m.l2_eta = (th.eta - truth.eta).norm();
  if (n0 > 0) m.fp_rate = static_cast<double>(fp) / static_cast<double>(n0);
  if (n1 > 0) m.fn_rate = static_cast<double>(fn) / static_cast<double>(n1);
  return m;
}

enum class Method { dpd, lasso };

inline const char* to_string(Method m) { return m == Method::dpd ? "dpd" : "lasso"; }

/// End-to-end settings for one replication pipeline.
struct PipelineOptions {
  double alpha = 1.0;
  OptimizerConfig opt;
  int grid_points = 10;
  PredictionRule rule = PredictionRule::classify_then_regress;
  int threads = 1;
  int cv_folds = 5;
  int path_points = 100;
  SigmaMethod refresh = SigmaMethod::pse;
};

struct ReplicationRow {
  int rep = 0;
  Method method = Method::dpd;
  std::string contamination = "none";
  double rate = 0.0;
  bool failed = false;
  std::string error;
  bool converged = false;
  std::array<double, 3> lambdas{};
  double sigma2_hat = 0.0;
  EvalMetrics metrics;
};

struct MetricTable {
  std::vector<ReplicationRow> rows;
};

struct FittedPipeline {
  ModelParams params;
  std::array<double, 3> lambdas{};
  bool converged = false;
  double sigma2_hat = 0.0;
};

/// One full modeling pass on a (possibly contaminated) training set: pooled
/// lasso pilot for the scale and the starting point, a criterion-driven grid
/// search for the penalties, then a final scale refresh at the chosen fit.
inline FittedPipeline fit_pipeline(const Dataset& train, const PipelineOptions& po,
                                   std::uint64_t seed) {
  Rng pilot_rng(seed);
  const PilotFit pilot = lasso_pilot(train, pilot_rng, po.cv_folds, po.path_points);

  OptimizerConfig opt = po.opt;
  opt.init = InitKind::custom;
  opt.init_params.beta = pilot.coef;
  opt.init_params.omega = pilot.coef;
  opt.init_params.eta = ridge_logistic(train.X(), train.z());
  opt.init_params.sigma2 = pilot.scale.sigma2;

  const LambdaGrid grid = make_grid(train, po.grid_points, po.alpha, pilot.scale.sigma2);
  GridSearchOptions gopt;
  gopt.threads = po.threads;
  const SelectionResult sel =
      grid_search(train, grid, po.alpha, opt, pilot.scale.sigma2, gopt);

  FittedPipeline out;
  out.params = sel.best_params;
  out.lambdas = sel.best_lambdas;
  out.converged = sel.best_fit.converged;
  out.sigma2_hat = refresh_sigma(train, sel.best_params, po.refresh).sigma2;
  out.params.sigma2 = out.sigma2_hat;
  return out;
}

/// The non-robust reference pipeline: cross-validated lasso for a single
/// regression vector used as both arms, ridge logistic for the class model.
inline FittedPipeline fit_lasso_baseline(const Dataset& train, const PipelineOptions& po,
                                         std::uint64_t seed) {
  Rng rng(seed);
  const LassoFit l = lasso_cv(train.X(), train.y(), rng, po.cv_folds, po.path_points);
  FittedPipeline out;
  out.params.beta = l.coef;
  out.params.omega = l.coef;
  out.params.eta = ridge_logistic(train.X(), train.z());
  out.params.sigma2 = pse_sigma(train.y() - train.X() * l.coef).sigma2;
  out.sigma2_hat = out.params.sigma2;
  out.lambdas = {l.lambda, l.lambda, 0.0};
  out.converged = true;
  return out;
}

/// Runs B independent replications of generate -> contaminate -> fit ->
/// evaluate for one method. Each replication consumes its own substream of
/// the master seed, and both methods see identical data for a given
/// (master_seed, rep), so methods can be compared pairwise. A replication
/// that throws is recorded as a failed row rather than aborting the study.
inline MetricTable run_replications(const Scenario& sc, const ContaminationScheme& scheme,
                                    Method method, int B, const PipelineOptions& po,
                                    std::uint64_t master_seed) {
  if (B < 1) throw invalid_argument_error("run_replications: B must be >= 1");
  MetricTable table;
  table.rows.resize(B);
  parallel_for(B, po.threads, [&](int r) {
    ReplicationRow row;
    row.rep = r;
    row.method = method;
    row.contamination = scheme.code();
    row.rate = scheme.rate;
    const std::uint64_t rep_base = substream_seed(master_seed, static_cast<std::uint64_t>(r));
    try {
      const SimData sim = generate(sc, substream_seed(rep_base, 0));
      const ContaminationResult cont = contaminate(sim.train, scheme, substream_seed(rep_base, 1));
      PipelineOptions local = po;
      local.threads = 1;  // replications are already parallel
      const std::uint64_t pilot_seed = substream_seed(rep_base, 2);
      const FittedPipeline fp = method == Method::dpd
                                    ? fit_pipeline(cont.data, local, pilot_seed)
                                    : fit_lasso_baseline(cont.data, local, pilot_seed);
      row.metrics = evaluate(sim.test, fp.params, sim.truth, po.rule);
      row.converged = fp.converged;
      row.lambdas = fp.lambdas;
      row.sigma2_hat = fp.sigma2_hat;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    table.rows[r] = std::move(row);
  });
  return table;
}

/// Median and quartiles (linear interpolation between order statistics).
struct StatSummary {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  int n = 0;
};

inline StatSummary summarize(std::vector<double> v) {
  StatSummary s;
  s.n = static_cast<int>(v.size());
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  const auto quantile = [&](double q) {
    const double h = q * (static_cast<double>(v.size()) - 1.0);
    const size_t lo = static_cast<size_t>(std::floor(h));
    const size_t hi = static_cast<size_t>(std::ceil(h));
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  s.q25 = quantile(0.25);
  s.median = quantile(0.5);
  s.q75 = quantile(0.75);
  return s;
}

}  // namespace rjm
