#include <atomic>
#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "rjm/parallel.hpp"
#include "rjm/scale.hpp"
#include "support/quadrature.hpp"

TEST_CASE("adaptive Simpson oracle integrates known functions") {
  const double pi = 3.14159265358979323846;
  CHECK(testsupport::integrate([](double x) { return std::sin(x); }, 0.0, pi) ==
        Catch::Approx(2.0).epsilon(1e-10));
  CHECK(testsupport::integrate([](double x) { return x * x; }, -1.0, 2.0) ==
        Catch::Approx(3.0).epsilon(1e-10));
  // standard normal mass over +-10
  const double mass = testsupport::integrate(
      [&](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi); }, -10.0, 10.0);
  CHECK(mass == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("composite Simpson grid matches the adaptive result") {
  double acc = 0.0;
  testsupport::simpson_grid(0.0, 2.0, 400, [&](double x, double w) { acc += w * std::exp(-x); });
  CHECK(acc == Catch::Approx(1.0 - std::exp(-2.0)).epsilon(1e-10));
}

TEST_CASE("median uses the average-of-middles convention") {
  CHECK(rjm::median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(rjm::median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(rjm::median({7.0}) == 7.0);
  CHECK(rjm::median({}) == 0.0);
}

TEST_CASE("parallel_for covers every index exactly once") {
  std::vector<std::atomic<int>> hits(97);
  rjm::parallel_for(97, 4, [&](int i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) CHECK(h.load() == 1);
}

TEST_CASE("parallel_for rethrows a task exception") {
  CHECK_THROWS_AS(rjm::parallel_for(8, 3,
                                    [](int i) {
                                      if (i == 5) throw rjm::numerical_error("boom");
                                    }),
                  rjm::numerical_error);
}

TEST_CASE("parallel_for result does not depend on thread count") {
  std::vector<double> a(40), b(40);
  rjm::parallel_for(40, 1, [&](int i) { a[i] = std::sqrt(i + 1.0); });
  rjm::parallel_for(40, 7, [&](int i) { b[i] = std::sqrt(i + 1.0); });
  CHECK(a == b);
}
