#include <cmath>
#include <limits>

#include <catch2/catch_amalgamated.hpp>

#include "rjm/selection.hpp"
#include "support/data.hpp"

using rjm::Matrix;
using rjm::Vector;

namespace {

rjm::Dataset selection_data(std::uint64_t seed, rjm::Index n = 60, rjm::Index p = 3) {
  rjm::Rng rng(seed);
  rjm::ModelParams truth;
  truth.beta = Vector::Zero(p);
  truth.omega = Vector::Zero(p);
  truth.eta = Vector::Zero(p);
  truth.beta(0) = 2.0;
  truth.omega(0) = -1.5;
  truth.eta(0) = 1.0;
  if (p > 1) truth.eta(1) = -1.0;
  truth.sigma2 = 1.0;
  return testsupport::model_data(rng, n, truth);
}

}  // namespace

TEST_CASE("grid construction matches the gradient at the zero fit") {
  const auto d = selection_data(50);
  const auto g = rjm::dpd_gradient(d, rjm::zero_params(d.p(), 1.0), 1.0);
  const auto grid = rjm::make_grid(d, 10, 1.0, 1.0);

  CHECK(grid.range1[1] == g.beta.cwiseAbs().maxCoeff());
  CHECK(grid.range2[1] == g.omega.cwiseAbs().maxCoeff());
  CHECK(grid.range3[1] == g.eta.cwiseAbs().maxCoeff());
  CHECK(grid.range1[0] == 1e-3 * grid.range1[1]);

  const auto a1 = grid.axis(0);
  REQUIRE(a1.size() == 10);
  CHECK(a1.front() == grid.range1[1]);
  CHECK(a1.back() == grid.range1[0]);
  for (size_t i = 1; i < a1.size(); ++i) CHECK(a1[i] < a1[i - 1]);
  // log spacing: constant ratio between consecutive points
  const double ratio = a1[1] / a1[0];
  for (size_t i = 2; i < a1.size(); ++i) {
    CHECK(a1[i] / a1[i - 1] == Catch::Approx(ratio).epsilon(1e-9));
  }

  CHECK(rjm::make_grid(d, 1, 1.0, 1.0).axis(2).front() == grid.range3[1]);
  CHECK_THROWS_AS(rjm::make_grid(d, 0, 1.0, 1.0), rjm::invalid_argument_error);
}

TEST_CASE("a single-group sample has no usable omega axis") {
  rjm::Rng rng(51);
  const rjm::Index n = 20, p = 2;
  Matrix X(n, p);
  Vector y(n), z(n);
  for (rjm::Index i = 0; i < n; ++i) {
    X(i, 0) = rng.normal();
    X(i, 1) = rng.normal();
    y(i) = rng.normal();
    z(i) = 1.0;
  }
  const rjm::Dataset d(X, y, z);
  try {
    rjm::make_grid(d, 5, 1.0, 1.0);
    FAIL("expected selection_error");
  } catch (const rjm::selection_error& e) {
    CHECK(std::string(e.what()).find("lambda2") != std::string::npos);
  }
}

TEST_CASE("active sets pick out the exact nonzeros") {
  rjm::ModelParams th = rjm::zero_params(4, 1.0);
  th.beta(1) = 0.5;
  th.beta(3) = -2.0;
  th.eta(0) = 1e-300;  // tiny but nonzero counts
  const auto a = rjm::active_sets(th);
  CHECK(a.beta == std::vector<rjm::Index>{1, 3});
  CHECK(a.omega.empty());
  CHECK(a.eta == std::vector<rjm::Index>{0});
}

TEST_CASE("forcing K = J turns the complexity term into a dimension count") {
  const auto d = selection_data(52, 80, 4);
  rjm::ModelParams th = rjm::zero_params(4, 1.0);
  th.beta(0) = 1.0;
  th.beta(2) = -0.5;
  th.omega(1) = 0.25;
  th.eta(0) = 0.4;
  th.eta(3) = -0.4;
  const auto J = rjm::compute_J(d, th, 1.0);
  const auto act = rjm::active_sets(th);
  const double c = rjm::ric_complexity(J, J, act, 1.0, d.n());
  // active dimensions: 2 + 1 + 2 = 5, times (1 + alpha) / n
  CHECK(c == Catch::Approx(2.0 * 5.0 / 80.0).epsilon(1e-10));

  // the all-zero model has zero complexity
  const double c0 = rjm::ric_complexity(J, J, rjm::active_sets(rjm::zero_params(4, 1.0)), 1.0,
                                        d.n());
  CHECK(c0 == 0.0);
}

TEST_CASE("criterion equals rescaled loss plus complexity and goes infinite when J cannot factor") {
  const auto d = selection_data(53);
  rjm::ModelParams th = rjm::zero_params(d.p(), 1.0);
  th.beta(0) = 1.0;
  th.eta(0) = 0.5;
  std::vector<std::string> warn;
  const double r = rjm::ric(d, th, 1.0, &warn);
  // the criterion re-scores the fit at the residual scale of the estimate
  // itself, with the loss carrying its full normal-density constant
  rjm::ModelParams ev = th;
  ev.sigma2 = rjm::refresh_sigma(d, th).sigma2;
  const auto J = rjm::compute_J(d, ev, 1.0);
  const auto K = rjm::compute_K(d, ev, 1.0);
  const double scale = std::pow(2.0 * rjm::kPi * ev.sigma2, -0.5);
  const double expect = scale * rjm::dpd_loss(d, ev, 1.0) +
                        rjm::ric_complexity(J, K, rjm::active_sets(th), 1.0, d.n());
  CHECK(r == Catch::Approx(expect).epsilon(1e-12));
  CHECK(warn.empty());

  // duplicated columns make the restricted block exactly rank-deficient
  Matrix X2(d.n(), 2);
  X2.col(0) = d.X().col(0);
  X2.col(1) = d.X().col(0);
  const rjm::Dataset dup(X2, d.y(), d.z());
  rjm::ModelParams both = rjm::zero_params(2, 1.0);
  both.beta << 0.5, 0.5;
  const double rinf = rjm::ric(dup, both, 1.0, &warn);
  CHECK(std::isinf(rinf));
  REQUIRE_FALSE(warn.empty());
  CHECK(warn.front().find("beta") != std::string::npos);
}

TEST_CASE("explicit candidate lists: winner, ties, duplicates, failure") {
  const auto d = selection_data(54);
  rjm::OptimizerConfig opt;
  opt.init = rjm::InitKind::zeros;

  const auto g = rjm::dpd_gradient(d, rjm::zero_params(d.p(), 1.0), 1.0);
  const double m1 = g.beta.cwiseAbs().maxCoeff();
  const double m2 = g.omega.cwiseAbs().maxCoeff();
  const double m3 = g.eta.cwiseAbs().maxCoeff();

  SECTION("one candidate is returned as the winner") {
    const auto res = rjm::grid_search(d, {{0.05, 0.05, 0.05}}, 1.0, opt, 1.0);
    CHECK(res.surface.size() == 1);
    CHECK(res.best_lambdas == std::array<double, 3>{0.05, 0.05, 0.05});
    CHECK(std::isfinite(res.best_ric));
  }

  SECTION("ties between zero fits resolve to the heavier penalty") {
    const std::vector<std::array<double, 3>> cands{{2 * m1, 2 * m2, 2 * m3},
                                                   {3 * m1, 3 * m2, 3 * m3},
                                                   {2.5 * m1, 2.5 * m2, 2.5 * m3}};
    const auto res = rjm::grid_search(d, cands, 1.0, opt, 1.0);
    REQUIRE(res.surface.size() == 3);
    CHECK(res.surface[0].ric == res.surface[1].ric);
    CHECK(res.best_lambdas == cands[1]);
    CHECK(res.best_params.beta.isZero(0.0));
    CHECK(res.surface[0].nnz == std::array<int, 3>{0, 0, 0});
  }

  SECTION("duplicate candidates produce bit-identical entries") {
    const std::vector<std::array<double, 3>> cands{{0.08, 0.08, 0.08}, {0.08, 0.08, 0.08}};
    const auto res = rjm::grid_search(d, cands, 1.0, opt, 1.0);
    REQUIRE(res.surface.size() == 2);
    CHECK(res.surface[0].ric == res.surface[1].ric);
    CHECK(res.surface[0].objective == res.surface[1].objective);
    CHECK(res.surface[0].iterations == res.surface[1].iterations);
  }

  SECTION("an empty list is an error") {
    CHECK_THROWS_AS(rjm::grid_search(d, std::vector<std::array<double, 3>>{}, 1.0, opt, 1.0),
                    rjm::selection_error);
  }

  SECTION("a criterion that is infinite everywhere is an error") {
    Matrix X2(d.n(), 2);
    X2.col(0) = d.X().col(0);
    X2.col(1) = d.X().col(0);
    const rjm::Dataset dup(X2, d.y(), d.z());
    // no penalty: both duplicate columns stay active in every candidate
    std::vector<std::string> dummy;
    CHECK_THROWS_AS(rjm::grid_search(dup, {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}, 1.0, opt, 1.0),
                    rjm::selection_error);
  }
}

TEST_CASE("full grid search is thread-count invariant and beats the extremes") {
  const auto d = selection_data(55, 80, 3);
  rjm::OptimizerConfig opt;
  opt.init = rjm::InitKind::zeros;
  const auto grid = rjm::make_grid(d, 3, 1.0, 1.0);

  rjm::GridSearchOptions g1, g3;
  g1.threads = 1;
  g3.threads = 3;
  const auto r1 = rjm::grid_search(d, grid, 1.0, opt, 1.0, g1);
  const auto r3 = rjm::grid_search(d, grid, 1.0, opt, 1.0, g3);

  REQUIRE(r1.surface.size() == 27);
  REQUIRE(r3.surface.size() == 27);
  for (size_t i = 0; i < r1.surface.size(); ++i) {
    CHECK(r1.surface[i].lambdas == r3.surface[i].lambdas);
    CHECK(r1.surface[i].ric == r3.surface[i].ric);
    CHECK(r1.surface[i].objective == r3.surface[i].objective);
  }
  CHECK(r1.best_lambdas == r3.best_lambdas);
  CHECK((r1.best_params.beta.array() == r3.best_params.beta.array()).all());

  // the chosen point does at least as well as every scored candidate
  for (const auto& e : r1.surface) CHECK(r1.best_ric <= e.ric);
  // and the winner keeps the true signal alive
  CHECK(r1.best_params.beta(0) != 0.0);
}

TEST_CASE("warm starts change the path but not the scored grid layout") {
  const auto d = selection_data(56, 50, 2);
  rjm::OptimizerConfig opt;
  opt.init = rjm::InitKind::zeros;
  const auto grid = rjm::make_grid(d, 3, 1.0, 1.0);
  rjm::GridSearchOptions warm, cold;
  warm.warm_start = true;
  cold.warm_start = false;
  const auto rw = rjm::grid_search(d, grid, 1.0, opt, 1.0, warm);
  const auto rc = rjm::grid_search(d, grid, 1.0, opt, 1.0, cold);
  REQUIRE(rw.surface.size() == rc.surface.size());
  for (size_t i = 0; i < rw.surface.size(); ++i) {
    CHECK(rw.surface[i].lambdas == rc.surface[i].lambdas);
    // the objective is nonconvex, so continuation and cold restarts may land
    // on different stationary points; warm starts must not do worse than
    // restarting from the shared init, candidate by candidate
    CHECK(rw.surface[i].objective <= rc.surface[i].objective + 1e-6);
    CHECK(std::isfinite(rw.surface[i].objective));
  }
}
