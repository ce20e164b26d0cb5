#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/euler2d.hpp"

using namespace roughflow;
using testing::kPi;

namespace {

ParticleEnsemble random_ensemble(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ParticleEnsemble e;
  e.positions = testing::random_samples(rng, 2 * n, 0.5);
  std::uniform_real_distribution<double> g(-1.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) e.circulations.push_back(g(rng));
  return e;
}

}  // namespace

TEST_SUITE("euler2d") {
  TEST_CASE("kernel values") {
    double ux, uy;
    Kernel::exact()(1.0, 0.0, ux, uy);
    CHECK(ux == doctest::Approx(0.0));
    CHECK(uy == doctest::Approx(1.0 / (2 * kPi)));
    CHECK_THROWS_AS(Kernel::exact()(0.0, 0.0, ux, uy), SingularityError);
    Kernel::blob(0.5)(0.0, 0.0, ux, uy);
    CHECK(ux == 0.0);
    CHECK(uy == 0.0);
    Kernel::blob(1.0)(0.0, 1.0, ux, uy);
    CHECK(ux == doctest::Approx(-1.0 / (4 * kPi)));
  }

  TEST_CASE("custom kernels") {
    const auto k = Kernel::custom("scaled", [](double zx, double zy, double& ux, double& uy) {
      ux = -2 * zy;
      uy = 2 * zx;
    }, OsgoodModulus::linear(2.0), false);
    double ux, uy;
    k(0.0, 0.0, ux, uy);
    CHECK(ux == 0.0);
    CHECK(k.kind() == KernelKind::Custom);
  }

  TEST_CASE("velocity of a single vortex is the kernel") {
    const ParticleEnsemble e{{0.0, 0.0}, {2.0}, "one"};
    const std::vector<double> q = {0.0, 0.5};
    const auto u = induced_velocity(e, q, Kernel::exact());
    CHECK(u[0] == doctest::Approx(-2.0 / (2 * kPi * 0.5)));
    CHECK(u[1] == doctest::Approx(0.0));
  }

  TEST_CASE("total impulse velocity vanishes for odd kernels") {
    // sum_i gamma_i u(X_i) = sum_{i != j} gamma_i gamma_j K(X_i - X_j) = 0.
    const auto e = random_ensemble(50, 3);
    const auto u = particle_velocities(e, Kernel::blob(0.05));
    double sx = 0.0, sy = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      sx += e.circulations[i] * u[2 * i];
      sy += e.circulations[i] * u[2 * i + 1];
      scale += std::abs(e.circulations[i] * u[2 * i]);
    }
    CHECK(std::abs(sx) < 1e-13 * scale);
    CHECK(std::abs(sy) < 1e-13 * scale);
  }

  TEST_CASE("velocities are independent of the thread count") {
    const auto e = random_ensemble(97, 5);
    const auto a = particle_velocities(e, Kernel::blob(0.1), 1);
    const auto b = particle_velocities(e, Kernel::blob(0.1), 4);
    CHECK(a == b);
  }

  TEST_CASE("discretization keeps the circulation") {
    const auto omega = GridField::sample(20, 20, -1, -1, 0.1, 0.1, [](double x, double y) { return std::exp(-4 * (x * x + y * y)); });
    const auto e = discretize_vorticity(omega);
    CHECK(e.size() == 400);
    CHECK(e.total_circulation() == doctest::Approx(integral(omega)).epsilon(1e-13));
    CHECK(discretize_vorticity(omega, 0.5).size() < 400);
  }

  TEST_CASE("reconstruction integrates to the circulation") {
    const ParticleEnsemble e{{0.1, -0.2, -0.3, 0.2}, {1.0, 0.5}, "two"};
    const GridField layout(200, 200, -5, -5, 0.05, 0.05);
    const auto w = reconstruct_vorticity(e, layout, 0.2);
    // The blob has algebraic tails: the mass outside radius R is delta^2 / (R^2 + delta^2).
    CHECK(integral(w) == doctest::Approx(1.5).epsilon(0.01));
  }

  TEST_CASE("RK4 pair returns after one closed-form period") {
    const double d = 0.5, gamma = 1.0, period = 2 * kPi * kPi * d * d / gamma;
    const std::vector<double> x = {-d / 2, 0.0, d / 2, 0.0}, g = {gamma, gamma};
    const auto back = point_vortex_rk4(x, g, Kernel::exact(), period, 4000);
    for (std::size_t i = 0; i < 4; ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-8).scale(1.0));
    const auto half = point_vortex_rk4(x, g, Kernel::exact(), period / 2, 2000);
    CHECK(half[0] == doctest::Approx(d / 2).epsilon(1e-8));
  }

  TEST_CASE("circulations never change during a run") {
    const auto e = random_ensemble(30, 8);
    const RoughPath rp = testing::brownian(2, 50, 2);
    EulerConfig cfg;
    cfg.kernel = Kernel::blob(0.1);
    cfg.output_indices = {0, 25, 50};
    const auto run = simulate(e, VectorFieldSet::shear2d(0.4, 1.0), rp, cfg);
    CHECK(run.circulations == e.circulations);
    for (const auto& s : run.series) CHECK(s.total_circulation == run.series.front().total_circulation);
    CHECK(run.positions.size() == 3);
    CHECK_THROWS_AS(simulate(e, VectorFieldSet::linear(2, {{1, 0, 0, 1}, {1, 0, 0, 1}}), rp, cfg), Error);
  }

  TEST_CASE("interpolated lift at factor one is the canonical lift") {
    const auto grid = TimeGrid::dyadic(5);
    std::mt19937_64 rng(2);
    const auto v = testing::random_samples(rng, 2 * grid.size());
    const auto a = interpolated_lift(grid, v, 2, 1), b = canonical_lift(grid, v, 2);
    CHECK(rough_distance(a, b, 2.5) < 1e-14);
    const auto c = interpolated_lift(grid, v, 2, 8);
    // The interpolant agrees with the samples at the coarse nodes.
    CHECK(c.point(16)[0] == doctest::Approx(v[32]));
    CHECK(c.point(4)[1] == doctest::Approx(0.5 * (v[1] + v[17])));
  }

  TEST_CASE("kernel probe on a smooth field") {
    const auto f = GridField::sample(64, 64, -2, -2, 1.0 / 16, 1.0 / 16, [](double x, double y) { return std::exp(-8 * (x * x + y * y)); });
    const auto r = kernel_assumption_probe(Kernel::blob(0.05), f, 1.0);
    CHECK(r.field_norm > 0.0);
    CHECK(r.sup_ratio > 0.0);
    CHECK(r.sup_ratio < 1.0);
    CHECK(std::isfinite(r.modulus_ratio));
    CHECK(r.gradient_l1 > 0.0);
  }
}
