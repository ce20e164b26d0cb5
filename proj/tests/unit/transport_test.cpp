#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/transport.hpp"

using namespace roughflow;

namespace {

GridField gaussian(std::size_t n, double w, double cx, double cy, double s) {
  const double h = 2.0 * w / double(n);
  return GridField::sample(n, n, -w, -w, h, h, [&](double x, double y) {
    return std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * s * s)) / (2 * testing::kPi * s * s);
  });
}

RoughPath still_path(std::size_t steps, std::size_t dim = 1) {
  return canonical_lift(TimeGrid::uniform(0.0, 1.0, steps), std::vector<double>((steps + 1) * dim, 0.0), dim);
}

}  // namespace

TEST_SUITE("grid_field") {
  TEST_CASE("interpolation reproduces cell values and linear functions") {
    const auto f = GridField::sample(10, 8, -1.0, -2.0, 0.2, 0.5, [](double x, double y) { return 2 * x - 3 * y + 1; });
    for (auto order : {Interpolation::Bilinear, Interpolation::Bicubic}) {
      CHECK(f.interpolate(f.cell_x(3), f.cell_y(4), order) == f(3, 4));
      CHECK(f.interpolate(0.13, -0.71, order) == doctest::Approx(2 * 0.13 + 3 * 0.71 + 1).epsilon(1e-12));
    }
    // Clamped outside the lattice.
    CHECK(f.interpolate(50.0, f.cell_y(2)) == f(9, 2));
  }

  TEST_CASE("norms, pairing and boundary mass") {
    const GridField one = GridField::sample(4, 4, 0, 0, 0.5, 0.5, [](double, double) { return 1.0; });
    CHECK(integral(one) == doctest::Approx(4.0));
    CHECK(norms(one).l2 == doctest::Approx(2.0));
    CHECK(norms(one).linf == 1.0);
    CHECK(pairing(one, one) == doctest::Approx(4.0));
    CHECK(boundary_mass(one) == doctest::Approx(12 * 0.25));
    CHECK(l2_distance(one, one) == 0.0);
    CHECK_THROWS_AS(pairing(one, GridField(3, 4, 0, 0, 0.5, 0.5)), Error);
  }

  TEST_CASE("binary round trip") {
    const auto f = gaussian(12, 1.0, 0.1, 0.0, 0.3);
    const auto stem = (std::filesystem::temp_directory_path() / "roughflow-field-test").string();
    f.write(stem);
    const auto g = GridField::read(stem);
    CHECK(g.same_layout(f));
    CHECK(std::equal(f.values().begin(), f.values().end(), g.values().begin()));
    std::filesystem::remove(stem + ".bin");
    std::filesystem::remove(stem + ".json");
    CHECK_THROWS_AS(GridField::read(stem), IoError);
  }
}

TEST_SUITE("transport") {
  TEST_CASE("no drift and no noise leaves fields unchanged") {
    const auto rho = gaussian(32, 2.0, 0.3, -0.2, 0.3);
    const std::vector<std::size_t> outs = {0, 5, 10};
    const auto seq = solve_rce_lagrangian(rho, DriftField::zero(2), VectorFieldSet::zero(2, 1), still_path(10), outs);
    for (const auto& f : seq.fields) CHECK(std::equal(f.values().begin(), f.values().end(), rho.values().begin()));
  }

  TEST_CASE("constant noise translates by the path increment") {
    // xi = (h, 0) and Z_T = 3: an exact shift by three cells.
    const std::size_t n = 24;
    const double w = 2.0, h = 2 * w / double(n);
    const auto f0 = gaussian(n, w, -0.5, 0.0, 0.3);
    const auto xi = VectorFieldSet::constant(2, 1, {h, 0.0});
    const auto grid = TimeGrid::uniform(0.0, 1.0, 6);
    std::vector<double> z;
    for (std::size_t i = 0; i <= 6; ++i) z.push_back(0.5 * double(i) + 0.3 * std::sin(double(i)) * (i < 6));
    z.back() = 3.0;
    const RoughPath rp = canonical_lift(grid, z, 1);
    const std::vector<std::size_t> outs = {6};
    const auto f = solve_rte_lagrangian(f0, DriftField::zero(2), xi, rp, outs).fields[0];
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 3; i < n; ++i) CHECK(f(i, j) == doctest::Approx(f0(i - 3, j)).epsilon(1e-12));
    // beta(f) transported equals beta applied to the transported field.
    CHECK(renormalization_check(f0, [](double v) { return v * v; }, DriftField::zero(2), xi, rp, outs) < 1e-12);
  }

  TEST_CASE("compressible drift conserves mass through the Jacobian weight") {
    // The characteristic foot is first order in time; 400 steps keep its error near 6e-4.
    const auto rho = gaussian(96, 3.0, 0.0, 0.0, 0.25);
    const auto seq = solve_rce_lagrangian(rho, DriftField::scaled_identity(2, 0.5), VectorFieldSet::zero(2, 1),
                                          still_path(400), std::vector<std::size_t>{0, 200, 400});
    const auto mass = mass_conservation_check(seq);
    CHECK(mass.mass.max_relative_drift < 1e-3);
    CHECK_FALSE(mass.warning);
    // The density spreads: its peak drops by e^{-c d t} = e^{-1}.
    CHECK(norms(seq.fields.back()).linf == doctest::Approx(norms(rho).linf * std::exp(-1.0)).epsilon(0.05));
  }

  TEST_CASE("duality and stability for a divergence-free flow") {
    const auto rho1 = gaussian(96, 2.0, 0.3, 0.0, 0.25), rho2 = gaussian(96, 2.0, 0.3, 0.2, 0.25);
    const BumpFunction bump({0.0, 0.0}, 1.2, {0.3, 0.0});
    const GridField f0 = GridField::sample(96, 96, -2, -2, 4.0 / 96, 4.0 / 96, [&](double x, double y) {
      const double p[2] = {x, y};
      return bump.value(p);
    });
    const auto xi = VectorFieldSet::shear2d(0.3, 1.0);
    const auto b = DriftField::rotation(1.0);
    const RoughPath rp = testing::brownian(2, 200, 3);
    const std::vector<std::size_t> outs = {0, 100, 200};
    const GridField dens[] = {rho1, rho2};
    const auto batch = solve_lagrangian(dens, {&f0, 1}, b, xi, rp, outs);
    CHECK(duality_check(batch.densities[0], batch.scalars[0]).max_relative_drift < 0.02);
    CHECK(stability_check(rho1, rho2, batch.densities[0], batch.densities[1]).ratio < 1.02);
    CHECK_THROWS_AS(solve_lagrangian(dens, {&f0, 1}, b, VectorFieldSet::linear(2, {{1, 0, 0, 0}, {1, 0, 0, 0}}), rp, outs),
                    Error);
  }

  TEST_CASE("threads do not change the transported field") {
    const auto rho = gaussian(40, 2.0, 0.3, 0.0, 0.3);
    const auto xi = VectorFieldSet::shear2d(0.3, 1.0);
    const RoughPath rp = testing::brownian(2, 40, 1);
    const std::vector<std::size_t> outs = {40};
    TransportOptions one, many;
    many.threads = 3;
    const auto a = solve_rce_lagrangian(rho, DriftField::rotation(1.0), xi, rp, outs, one).fields[0];
    const auto c = solve_rce_lagrangian(rho, DriftField::rotation(1.0), xi, rp, outs, many).fields[0];
    CHECK(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
  }

  TEST_CASE("bump function derivatives") {
    const TestFunctionSet tests = {BumpFunction({0.1, -0.2}, 0.8, {0.5, 1.0}), BumpFunction({0.0, 0.0}, 2.0)};
    std::mt19937_64 rng(8);
    const auto probes = testing::random_samples(rng, 200, 0.4);
    CHECK(test_function_gradient_error(tests, probes) < 1e-6);
    // Hessian against differences of the gradient.
    const auto& phi = tests[0];
    std::vector<double> x = {0.3, 0.1}, hess(4), gp(2), gm(2);
    phi.hessian(x, hess);
    for (std::size_t c = 0; c < 2; ++c) {
      auto xp = x, xm = x;
      xp[c] += 1e-6;
      xm[c] -= 1e-6;
      phi.gradient(xp, gp);
      phi.gradient(xm, gm);
      for (std::size_t a = 0; a < 2; ++a) CHECK(hess[a * 2 + c] == doctest::Approx((gp[a] - gm[a]) / 2e-6).epsilon(1e-5));
    }
    const double far[2] = {5.0, 5.0};
    CHECK(phi.value(far) == 0.0);
  }

  TEST_CASE("the unbounded rough driver satisfies Chen's relation") {
    const auto xi = VectorFieldSet::shear2d(0.7, 1.5);
    const RoughPath rp = testing::brownian(2, 64, 2);
    const DriverPair driver(xi, rp);
    const BumpFunction phi({0.0, 0.1}, 1.5, {0.2, 0.0});
    const std::vector<double> x = {0.3, -0.4};
    CHECK(driver_chen_defect(driver, phi, x, 3, 20, 50) < 1e-13);
    CHECK(driver_chen_defect(driver, phi, x, 0, 0, 64) < 1e-13);
  }

  TEST_CASE("remainder diagnostic separates solutions from frozen densities") {
    const auto xi = VectorFieldSet::shear2d(0.6, 1.0);
    const auto b = DriftField::rotation(0.5);
    const std::size_t steps = 1024;
    const auto grid = TimeGrid::uniform(0.0, 1.0, steps);
    std::vector<double> z;
    for (std::size_t i = 0; i <= steps; ++i) {
      z.push_back(std::sin(3.0 * grid[i]));
      z.push_back(grid[i] * grid[i]);
    }
    const RoughPath rp = canonical_lift(grid, z, 2);
    const auto [seeds, weights] = particles_from_density(gaussian(16, 1.0, 0.1, 0.0, 0.3));
    const TestFunctionSet tests = {BumpFunction({0.0, 0.0}, 1.0, {0.3, -0.2}), BumpFunction({0.3, 0.2}, 0.7)};
    const auto good = rpde_remainder_diagnostic({solve_flow(seeds, b, xi, rp), weights}, b, DriverPair(xi, rp), tests);
    const auto frozen = rpde_remainder_diagnostic({frozen_flow(seeds, 2, grid), weights}, b, DriverPair(xi, rp), tests);
    CHECK_FALSE(good.flagged);
    for (double k : good.exponents) CHECK(k > 1.1);
    CHECK(frozen.flagged);
  }
}
