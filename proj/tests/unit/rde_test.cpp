#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/rde.hpp"

using namespace roughflow;

TEST_SUITE("vector_fields") {
  TEST_CASE("builtin noise fields pass validation") {
    std::mt19937_64 rng(2);
    const auto probes = testing::random_samples(rng, 40);
    for (const auto& xi : {VectorFieldSet::shear2d(0.7, 2.0), VectorFieldSet::constant(2, 3, {1, 0, 2, 0, 1, -1}),
                           VectorFieldSet::linear(2, {{0, -1, 1, 0}, {1, 0, 0, -1}})}) {
      const auto r = validate_vector_fields(xi, probes);
      CHECK(r.max_jacobian_error < 1e-6);
      CHECK(r.max_divergence < 1e-10);
      CHECK(xi.divergence_free());
    }
    CHECK_FALSE(VectorFieldSet::linear(2, {{1, 0, 0, 1}}).divergence_free());
  }

  TEST_CASE("a false divergence-free flag is rejected") {
    const VectorFieldSet bad("expanding", 2, 1,
                             [](std::size_t, std::span<const double> x, std::span<double> out) {
                               out[0] = x[0];
                               out[1] = x[1];
                             },
                             {}, {}, true);
    const std::vector<double> probes = {0.1, 0.2, -0.3, 0.5};
    CHECK_THROWS_AS(validate_vector_fields(bad, probes), ParameterError);
  }

  TEST_CASE("second-order map of a linear field") {
    // xi(y) = A y: D xi . xi = A^2 y.
    const auto xi = VectorFieldSet::linear(2, {{0, -1, 1, 0}});
    const std::vector<double> y = {1.0, 2.0}, zz = {0.5};
    std::vector<double> out(2), scratch(8);
    xi.second_order(y, zz, out, scratch);
    CHECK(out[0] == doctest::Approx(-0.5));
    CHECK(out[1] == doctest::Approx(-1.0));
  }

  TEST_CASE("drifts satisfy their stated bounds") {
    std::mt19937_64 rng(4);
    const auto probes = testing::random_samples(rng, 60, 0.4);
    CHECK(validate_drift(DriftField::rotation(1.5), probes).max_modulus_ratio <= 1.0 + 1e-12);
    CHECK(validate_drift(DriftField::linear(2, {1, 2, 0, -1}), probes).max_modulus_ratio <= 1.0 + 1e-12);
    const auto ll = DriftField::log_lipschitz_1d();
    const auto r = validate_drift(ll, std::vector<double>(probes.begin(), probes.begin() + 30));
    CHECK(r.max_bound_ratio <= 1.0 + 1e-12);
    CHECK(r.max_modulus_ratio <= 1.0 + 1e-12);
  }

  TEST_CASE("reversed drift") {
    const DriftField b("time-dependent", 1,
                       [](double t, std::span<const double>, std::span<double> out) { out[0] = t; },
                       OsgoodModulus::linear(1.0), false);
    const auto r = b.reversed(0.0, 2.0);
    std::vector<double> x = {0.0}, out(1);
    r.eval(0.5, x, out);
    CHECK(out[0] == doctest::Approx(-1.5));
    CHECK(DriftField::scaled_identity(3, 0.5).divergence(0.0, std::vector<double>{1, 1, 1}) == doctest::Approx(1.5));
  }
}

TEST_SUITE("rde") {
  TEST_CASE("affine equation is solved exactly") {
    const auto xi = VectorFieldSet::constant(2, 2, {1.0, 0.5, -0.3, 2.0});
    const auto b = DriftField::zero(2);
    const RoughPath rp = testing::brownian(2, 300, 3);
    const std::vector<double> y0 = {0.1, 0.2};
    const auto traj = solve_rde(y0, b, xi, rp);
    const auto dz = rp.increment(0, 300);
    const auto end = traj.state(300);
    CHECK(end[0] == doctest::Approx(0.1 + dz[0] + 0.5 * dz[1]).epsilon(1e-14));
    CHECK(end[1] == doctest::Approx(0.2 - 0.3 * dz[0] + 2.0 * dz[1]).epsilon(1e-14));
  }

  TEST_CASE("scalar linear equation converges to y0 exp(Z)") {
    const auto xi = VectorFieldSet::linear(1, {{1.0}});
    const auto b = DriftField::zero(1);
    double prev = INFINITY;
    for (std::size_t steps : {32u, 64u, 128u, 256u}) {
      const auto grid = TimeGrid::uniform(0.0, 1.0, steps);
      std::vector<double> z;
      for (std::size_t i = 0; i <= steps; ++i) z.push_back(std::sin(3.0 * grid[i]));
      const auto traj = solve_rde(std::vector<double>{1.0}, b, xi, canonical_lift(grid, z, 1));
      const double err = std::abs(traj.state(steps)[0] - std::exp(std::sin(3.0)));
      CHECK(err < prev / 1.8);
      prev = err;
    }
  }

  TEST_CASE("davie_step agrees with the stepper") {
    const auto xi = VectorFieldSet::shear2d(0.5, 1.0);
    const auto b = DriftField::rotation(1.0);
    const RoughPath rp = testing::brownian(2, 10, 1);
    std::vector<double> y = {0.3, -0.2};
    const auto once = davie_step(y, b, xi, rp, 4);
    DavieStepper st(b, xi, rp);
    st.step(y, 4);
    CHECK(once == y);
    CHECK(st.last_remainder() < 1e-15);
  }

  TEST_CASE("divergence is reported with its step") {
    const auto b = DriftField::scaled_identity(1, 1e200);
    const auto xi = VectorFieldSet::zero(1, 1);
    const RoughPath rp = testing::brownian(1, 10, 1);
    try {
      solve_rde(std::vector<double>{1.0}, b, xi, rp);
      FAIL("no divergence");
    } catch (const DivergenceError& e) {
      CHECK(e.step() <= 1);
    }
  }

  TEST_CASE("flow seeds are independent and failures are isolated") {
    const auto b = DriftField::scaled_identity(1, 4000.0);
    const auto xi = VectorFieldSet::zero(1, 1);
    const RoughPath rp = testing::brownian(1, 8, 1);
    const std::vector<double> seeds = {0.0, 1.0};
    const auto flow = solve_flow(seeds, b, xi, rp);
    CHECK_FALSE(flow.failures[0]);
    CHECK(flow.failures[1]);
    CHECK(flow.position(8, 0)[0] == 0.0);
  }

  TEST_CASE("threads do not change the flow") {
    const auto xi = VectorFieldSet::shear2d(0.5, 1.0);
    const auto b = DriftField::rotation(1.0);
    const RoughPath rp = testing::brownian(2, 200, 9);
    std::mt19937_64 rng(1);
    const auto seeds = testing::random_samples(rng, 2 * 37);
    const auto a = solve_flow(seeds, b, xi, rp, {{}, 1}), c = solve_flow(seeds, b, xi, rp, {{}, 4});
    CHECK(a.positions == c.positions);
  }

  TEST_CASE("inverse flow undoes the forward flow") {
    const auto xi = VectorFieldSet::shear2d(0.5, 1.0);
    const auto b = DriftField::rotation(1.0);
    const RoughPath rp = testing::brownian(2, 2000, 5);
    const std::vector<double> seeds = {0.2, 0.1, -0.5, 0.4};
    const auto end = solve_flow(seeds, b, xi, rp, {{2000}, 1}).terminal();
    const auto back = inverse_flow(end, b, xi, rp, 2000);
    for (std::size_t i = 0; i < 4; ++i) CHECK(back[i] == doctest::Approx(seeds[i]).epsilon(1e-3).scale(1.0));
  }

  TEST_CASE("Jacobian determinant of the scaled identity drift") {
    const double c = 0.3;
    const auto b = DriftField::scaled_identity(2, c);
    const auto xi = VectorFieldSet::shear2d(0.5, 1.0);
    const RoughPath rp = testing::brownian(2, 4096, 2);
    const std::vector<double> x = {0.1, 0.2};
    auto seeds = x;
    const auto st = jacobian_stencil(x, 1e-4);
    seeds.insert(seeds.end(), st.begin(), st.end());
    const auto flow = solve_flow(seeds, b, xi, rp, {{4096}, 1});
    CHECK(jacobian_determinant(flow, 4096, x, 1e-4) == doctest::Approx(std::exp(2 * c)).epsilon(1e-3));
  }

  TEST_CASE("cocycle property of the autonomous flow") {
    const auto xi = VectorFieldSet::shear2d(0.5, 1.0);
    const auto b = DriftField::rotation(1.0);
    const RoughPath rp = testing::brownian(2, 256, 4);
    const std::vector<double> seeds = {0.2, 0.1, -0.5, 0.4, 1.0, 1.0};
    CHECK(cocycle_check(seeds, b, xi, rp, 100) < 1e-13);
  }

  TEST_CASE("flow modulus diagnostic") {
    const auto b = DriftField::rotation(1.0);
    const auto xi = VectorFieldSet::zero(2, 1);
    const RoughPath rp = canonical_lift(TimeGrid::uniform(0.0, 1.0, 100), std::vector<double>(101, 0.0), 1);
    const std::vector<double> seeds = {0, 0, 1, 0, 0, 2};
    const auto flow = solve_flow(seeds, b, xi, rp);
    // Rotations are isometries; the t = 0 record forces C >= 1.
    const auto report = flow_modulus_diagnostic(flow, b.modulus(), [](double t) { return t; });
    CHECK(report.bound_holds);
    CHECK(report.fitted_constant == doctest::Approx(1.0));
  }

  TEST_CASE("remainder of the Davie scheme decays faster than linearly") {
    const auto xi = VectorFieldSet::shear2d(0.6, 1.0);
    const auto b = DriftField::rotation(0.5);
    const RoughPath rp = testing::brownian(2, 2048, 8);
    const auto traj = solve_rde(std::vector<double>{0.4, 0.1}, b, xi, rp);
    const auto fit = fit_remainder_exponent(traj, b, xi, rp);
    CHECK(fit.exponent > 1.0);
  }
}
