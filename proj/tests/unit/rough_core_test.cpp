#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/rough_core.hpp"

using namespace roughflow;

namespace {

// Brute force over every subset of interior points.
double brute_p_variation(const std::vector<double>& x, std::size_t dim, double p) {
  const std::size_t n = x.size() / dim;
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (1ull << (n - 2)); ++mask) {
    std::size_t prev = 0;
    double sum = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      if (k < n - 1 && !(mask >> (k - 1) & 1)) continue;
      double s = 0.0;
      for (std::size_t c = 0; c < dim; ++c) s += std::pow(x[k * dim + c] - x[prev * dim + c], 2);
      sum += std::pow(std::sqrt(s), p);
      prev = k;
    }
    best = std::max(best, sum);
  }
  return std::pow(best, 1.0 / p);
}

}  // namespace

TEST_SUITE("rough_core") {
  TEST_CASE("time grid construction and slicing") {
    const auto g = TimeGrid::uniform(0.0, 2.0, 8);
    CHECK(g.size() == 9);
    CHECK(g.back() == doctest::Approx(2.0));
    CHECK(g.slice(2, 5).size() == 4);
    CHECK(g.coarsen(4).size() == 3);
    CHECK(g.index_of(1.0) == 4);
    CHECK_THROWS_AS(TimeGrid({0.0, 0.0}), Error);
    CHECK_THROWS_AS(g.coarsen(3), Error);
  }

  TEST_CASE("zigzag p-variation") {
    const auto grid = TimeGrid::uniform(0.0, 1.0, 3);
    const std::vector<double> zigzag = {0.0, 1.0, 0.0, 1.0};
    const auto g = increments_of_path(grid, zigzag, 1);
    CHECK(p_variation(g, 2.0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
    CHECK(p_variation(g, 1.0) == doctest::Approx(3.0));
  }

  TEST_CASE("p-variation matches brute force over partitions") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t n = 3 + trial % 9, dim = 1 + trial % 2;
      const double p = 1.0 + 0.25 * (trial % 8);
      const auto x = testing::random_samples(rng, n * dim);
      const auto grid = TimeGrid::uniform(0.0, 1.0, n - 1);
      const double dp = p_variation(PathIncrements(grid, x, dim), p);
      CHECK(dp == doctest::Approx(brute_p_variation(x, dim, p)).epsilon(1e-12));
      CHECK(dp == doctest::Approx(p_variation(increments_of_path(grid, x, dim), p)).epsilon(1e-14));
    }
  }

  TEST_CASE("p-variation is monotone in p and in the window") {
    std::mt19937_64 rng(5);
    const auto x = testing::random_samples(rng, 40);
    const auto grid = TimeGrid::uniform(0.0, 1.0, 39);
    const PathIncrements g(grid, x, 1);
    double prev = std::numeric_limits<double>::infinity();
    for (double p : {1.0, 1.5, 2.0, 3.0, 5.0}) {
      const double v = p_variation(g, p);
      CHECK(v <= prev * (1 + 1e-14));
      prev = v;
    }
    CHECK(p_variation(g, 2.0, {5, 20}) <= p_variation(g, 2.0, {0, 39}) + 1e-14);
  }

  TEST_CASE("controls from p-variation are superadditive") {
    std::mt19937_64 rng(9);
    const auto x = testing::random_samples(rng, 2 * 30);
    const auto grid = TimeGrid::uniform(0.0, 1.0, 29);
    const auto w = control_from_variation(PathIncrements(grid, x, 2), 2.5);
    const auto report = check_superadditive(w);
    CHECK(report.superadditive);
    CHECK(w(3, 3) == 0.0);
  }

  TEST_CASE("a non-superadditive function is detected") {
    const auto grid = TimeGrid::uniform(0.0, 1.0, 4);
    const auto w = Control::tabulate(grid, [&](std::size_t i, std::size_t j) { return std::sqrt(grid[j] - grid[i]); });
    const auto report = check_superadditive(w);
    CHECK_FALSE(report.superadditive);
    CHECK(report.worst_violation > 0.0);
  }

  TEST_CASE("sewing an additive germ returns the germ") {
    const auto grid = TimeGrid::uniform(0.0, 1.0, 64);
    const auto germ = TwoParamFunction::tabulate(grid, 1, [&](std::size_t i, std::size_t j, std::span<double> out) {
      out[0] = std::sin(grid[j]) - std::sin(grid[i]);
    });
    const auto r = sew(germ, 2.0);
    CHECK(r.additive);
    CHECK(r.coherent);
    CHECK(r.integral.value(0, 64)[0] == doctest::Approx(std::sin(1.0)).epsilon(1e-14));
  }

  TEST_CASE("sewing a Riemann germ recovers the integral") {
    // germ(s, t) = f(s) (t - s) for f = cos: defect is O(|t - s|^2).
    const auto grid = TimeGrid::uniform(0.0, 1.0, 1024);
    const auto germ = TwoParamFunction::lazy(grid, 1, [&](std::size_t i, std::size_t j, std::span<double> out) {
      out[0] = std::cos(grid[i]) * (grid[j] - grid[i]);
    });
    const auto r = sew(germ, 2.0);
    CHECK_FALSE(r.additive);
    CHECK(r.coherent);
    CHECK(r.coherence_exponent == doctest::Approx(2.0).epsilon(0.05));
    CHECK(r.integral.value(0, 1024)[0] == doctest::Approx(std::sin(1.0)).epsilon(1e-3));
  }

  TEST_CASE("loglog slope") {
    const std::vector<double> x = {1, 2, 4, 8}, y = {3, 12, 48, 192};
    CHECK(fit_loglog_slope(x, y) == doctest::Approx(2.0));
    const std::vector<double> one = {1.0}, zero = {0.0};
    CHECK(std::isnan(fit_loglog_slope(one, one)));
  }

  TEST_CASE("two-parameter functions reject bad windows") {
    const auto grid = TimeGrid::uniform(0.0, 1.0, 4);
    const auto g = increments_of_path(grid, std::vector<double>{0, 1, 2, 3, 4}, 1);
    CHECK(g.value(1, 3)[0] == 2.0);
    CHECK_THROWS_AS(g.value(3, 1), Error);
    CHECK_THROWS_AS(g.value(0, 9), Error);
  }
}
