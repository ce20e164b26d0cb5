// Acceptance suite. Each criterion prints one PASS/FAIL line; run a single
// criterion with `acceptance N`, or all of them without arguments.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "roughflow/euler2d.hpp"
#include "roughflow/osgood.hpp"
#include "roughflow/rde.hpp"
#include "roughflow/rough_path.hpp"
#include "roughflow/transport.hpp"
#include "cli_app.hpp"

using namespace roughflow;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

TimeGrid unit_grid(std::size_t steps) { return TimeGrid::uniform(0.0, 1.0, steps); }

RoughPath brownian(std::size_t dim, std::size_t steps, std::uint64_t seed, double horizon = 1.0) {
  NoiseSpec spec;
  spec.kind = NoiseKind::Brownian;
  spec.dimension = dim;
  spec.seed = seed;
  spec.grid = TimeGrid::uniform(0.0, horizon, steps);
  return sample_noise(spec);
}

double max_sq_norm(const RoughPath& rp) {
  double worst = 0.0;
  for (std::size_t i = 0; i < rp.size(); ++i) {
    double s = 0.0;
    for (double v : rp.point(i)) s += v * v;
    worst = std::max(worst, s);
  }
  return worst;
}

// 1. Chen's relation on canonical lifts and sampler output.
Outcome chen_relation() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> dims(1, 3), lens(2, 200);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  std::size_t checked = 0;
  auto check = [&](const RoughPath& rp) {
    worst = std::max(worst, chen_defect(rp) / (1e-12 * (1.0 + max_sq_norm(rp))));
    ++checked;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = static_cast<std::size_t>(dims(rng)), n = static_cast<std::size_t>(lens(rng));
    std::vector<double> samples(n * d);
    for (auto& v : samples) v = 3.0 * normal(rng);
    const RoughPath rp = canonical_lift(unit_grid(n - 1), samples, d);
    check(rp);
    if (trial % 10 == 0) check(rp.densified());
  }
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    check(brownian(2, 300, seed));
    check(brownian(3, 100, seed).densified());
    for (double h : {0.4, 0.5, 0.75, 1.0})
      for (std::size_t steps : {48u, 512u}) {
        NoiseSpec spec;
        spec.kind = NoiseKind::FractionalBrownian;
        spec.dimension = 2;
        spec.hurst = h;
        spec.seed = seed;
        spec.grid = unit_grid(steps);
        check(sample_noise(spec));
      }
    NoiseSpec samples;
    samples.kind = NoiseKind::Samples;
    samples.dimension = 1;
    samples.grid = unit_grid(64);
    for (std::size_t i = 0; i <= 64; ++i) samples.samples.push_back(std::sin(0.3 * static_cast<double>(i * seed)));
    check(sample_noise(samples));
  }
  return {worst <= 1.0, fmt("%zu paths, max defect / (1e-12 (1 + max|Z|^2)) = %.3g", checked, worst)};
}

// 2. Levy area of the unit circle.
Outcome circle_area() {
  const TimeGrid grid = TimeGrid::dyadic(12);
  std::vector<double> samples;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    samples.push_back(std::cos(2.0 * kPi * grid[i]));
    samples.push_back(std::sin(2.0 * kPi * grid[i]));
  }
  const RoughPath rp = canonical_lift(grid, samples, 2);
  const auto zz = rp.second_level(0, grid.size() - 1);
  const double area = 0.5 * (zz[1] - zz[2]);
  return {std::abs(area - kPi) <= 1e-3, fmt("area = %.9f, |area - pi| = %.3g", area, std::abs(area - kPi))};
}

// 3. Affine exactness: b = 0, constant xi.
Outcome affine_exactness() {
  const std::vector<double> sigma = {1.0, 0.5, -0.3, 2.0};
  const auto xi = VectorFieldSet::constant(2, 2, sigma);
  const auto b = DriftField::zero(2);
  const std::vector<double> y0 = {0.25, -0.75};
  double worst = 0.0;
  std::string per_grid;
  for (std::size_t steps : {4u, 64u, 1024u, 4096u}) {
    const RoughPath rp = brownian(2, steps, 7);
    const auto traj = solve_rde(y0, b, xi, rp);
    const auto dz = rp.increment(0, rp.size() - 1);
    double err = 0.0;
    for (std::size_t r = 0; r < 2; ++r) {
      const double exact = y0[r] + sigma[r * 2] * dz[0] + sigma[r * 2 + 1] * dz[1];
      err = std::max(err, std::abs(traj.state(rp.size() - 1)[r] - exact));
    }
    worst = std::max(worst, err);
    per_grid += fmt(" n=%zu:%.2g", steps, err);
  }
  return {worst <= 1e-14, "terminal errors" + per_grid};
}

// 4. Refinement order for xi(y) = y on a smooth driver.
Outcome refinement_order() {
  const auto xi = VectorFieldSet::linear(1, {{1.0}});
  const auto b = DriftField::zero(1);
  auto driver = [](double t) { return t + 0.5 * std::sin(2.0 * kPi * t); };
  const std::vector<double> y0 = {1.0};
  std::vector<double> errors;
  for (std::size_t steps : {32u, 64u, 128u, 256u}) {
    const TimeGrid grid = unit_grid(steps);
    std::vector<double> z;
    for (double t : grid.times()) z.push_back(driver(t));
    const RoughPath rp = canonical_lift(grid, z, 1);
    const auto traj = solve_rde(y0, b, xi, rp);
    errors.push_back(std::abs(traj.state(steps)[0] - y0[0] * std::exp(z.back() - z.front())));
  }
  bool ok = true;
  std::string detail = "errors";
  for (std::size_t k = 0; k < errors.size(); ++k) {
    detail += fmt(" %.3g", errors[k]);
    if (k > 0) {
      const double factor = errors[k - 1] / errors[k];
      detail += fmt(" (x%.2f)", factor);
      ok = ok && factor >= 1.8;
    }
  }
  return {ok, detail};
}

std::vector<double> lattice_seeds(std::size_t per_axis, double lo, double hi) {
  std::vector<double> seeds;
  for (std::size_t j = 0; j < per_axis; ++j)
    for (std::size_t i = 0; i < per_axis; ++i) {
      seeds.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(per_axis - 1));
      seeds.push_back(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(per_axis - 1));
    }
  return seeds;
}

// 5. Inverse-flow consistency.
Outcome inverse_flow_consistency() {
  const auto b = DriftField::rotation(1.0);
  const auto xi = VectorFieldSet::shear2d(0.25, 1.0);
  const RoughPath finest = brownian(2, 8000, 11);
  const auto seeds = lattice_seeds(10, -0.5, 0.5);
  std::vector<double> errors;
  for (std::size_t factor : {8u, 4u, 2u, 1u}) {
    const RoughPath rp = factor == 1 ? finest : coarsen(finest, factor);
    const std::size_t t = rp.size() - 1;
    const auto fwd = solve_flow(seeds, b, xi, rp, {{t}, 1}).terminal();
    const auto back = inverse_flow(fwd, b, xi, rp, t);
    double err = 0.0;
    for (std::size_t e = 0; e < seeds.size(); ++e) err = std::max(err, std::abs(back[e] - seeds[e]));
    errors.push_back(err);
  }
  bool ok = errors[0] <= 1e-3;
  std::string detail = "dt=1e-3..1.25e-4 errors";
  for (std::size_t k = 0; k < errors.size(); ++k) {
    detail += fmt(" %.3g", errors[k]);
    if (k > 0) ok = ok && errors[k] < errors[k - 1];
  }
  return {ok, detail};
}

// 6. Quasi-incompressibility and the compressible control.
Outcome quasi_incompressibility() {
  const auto xi = VectorFieldSet::shear2d(0.5, 1.0);
  const RoughPath rp = brownian(2, 8192, 5);
  const std::size_t t = rp.size() - 1;
  const std::vector<std::vector<double>> points = {{0.0, 0.0}, {0.4, -0.3}, {-0.7, 0.2}, {1.0, 1.0}};
  const double h = 1e-4;
  auto worst_det = [&](const DriftField& b, double target) {
    std::vector<double> seeds;
    for (const auto& p : points) {
      const auto s = jacobian_stencil(p, h);
      seeds.insert(seeds.end(), s.begin(), s.end());
    }
    const auto flow = solve_flow(seeds, b, xi, rp, {{0, t}, 1});
    double worst = 0.0;
    for (const auto& p : points) worst = std::max(worst, std::abs(jacobian_determinant(flow, t, p, h) / target - 1.0));
    return worst;
  };
  const double solenoidal = worst_det(DriftField::rotation(1.0), 1.0);
  const double c = 0.5;
  const double compressible = worst_det(DriftField::scaled_identity(2, c), std::exp(c * 2.0 * 1.0));
  return {solenoidal <= 1e-3 && compressible <= 1e-3,
          fmt("|det J - 1| = %.3g, |det J / e^{cdt} - 1| = %.3g", solenoidal, compressible)};
}

// 7. Bihari-Osgood closed forms.
Outcome bihari_closed_forms() {
  const auto lin = OsgoodModulus::linear(1.0);
  const auto ll = OsgoodModulus::log_lipschitz();
  double lin_err = 0.0, ll_err = 0.0;
  for (double a : {1e-6, 1e-3, 0.1, 0.5, 2.0, 10.0})
    for (double beta : {0.01, 0.5, 1.0, 3.0}) {
      const double exact = a * std::exp(beta);
      lin_err = std::max(lin_err, std::abs(bihari_bound(lin, a, beta) - exact) / exact);
    }
  for (double a : {1e-8, 1e-4, 1e-2, 0.1, 0.3})
    for (double beta : {0.01, 0.1, 0.5, 1.0}) {
      const double exact = std::exp(1.0 - (1.0 - std::log(a)) * std::exp(-beta));
      if (exact >= 1.0) continue;
      ll_err = std::max(ll_err, std::abs(bihari_bound(ll, a, beta) - exact) / exact);
    }
  const bool zero = bihari_bound(lin, 0.0, 2.0) == 0.0 && bihari_bound(ll, 0.0, 2.0) == 0.0;
  return {lin_err <= 1e-8 && ll_err <= 1e-6 && zero,
          fmt("linear rel err %.3g, log-Lipschitz rel err %.3g, M(0, beta) = 0: %s", lin_err, ll_err,
              zero ? "yes" : "no")};
}

// Shared 256^2 transport run for 8 and 9.
struct TransportFixture {
  GridField rho0, rho1, rho2, f0;
  LagrangianBatch batch;
  double seconds = 0.0;
};

const TransportFixture& transport_fixture() {
  static std::optional<TransportFixture> fx;
  if (fx) return *fx;
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = 256;
  const double lo = -2.0, dx = 4.0 / static_cast<double>(n);
  auto gaussian = [](double cx, double cy, double s) {
    return [=](double x, double y) {
      return std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2.0 * s * s)) / (2.0 * kPi * s * s);
    };
  };
  const BumpFunction bump({0.2, 0.1}, 1.0, {0.3, -0.2});
  TransportFixture out{GridField::sample(n, n, lo, lo, dx, dx, gaussian(0.3, 0.0, 0.25)),
                       GridField::sample(n, n, lo, lo, dx, dx, gaussian(0.0, 0.2, 0.3)),
                       GridField::sample(n, n, lo, lo, dx, dx, gaussian(0.15, 0.1, 0.2)),
                       GridField::sample(n, n, lo, lo, dx, dx,
                                         [&](double x, double y) { return bump.value(std::vector<double>{x, y}); }),
                       {},
                       0.0};
  const auto b = DriftField::rotation(1.0);
  const auto xi = VectorFieldSet::shear2d(0.3, 1.0);
  const RoughPath rp = brownian(2, 1000, 3);
  const std::vector<std::size_t> outputs = {0, 250, 500, 750, 1000};
  const GridField densities[3] = {out.rho0, out.rho1, out.rho2};
  const GridField scalars[1] = {out.f0};
  out.batch = solve_lagrangian(densities, scalars, b, xi, rp, outputs);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fx = std::move(out);
  return *fx;
}

// 8. Duality.
Outcome duality() {
  const auto& fx = transport_fixture();
  const auto report = duality_check(fx.batch.densities[0], fx.batch.scalars[0]);
  return {report.max_relative_drift <= 0.01,
          fmt("<rho_0, f_0> = %.6f, max relative drift %.3g", report.values.front(), report.max_relative_drift)};
}

// 9. L2 stability.
Outcome stability() {
  const auto& fx = transport_fixture();
  const auto report = stability_check(fx.rho1, fx.rho2, fx.batch.densities[1], fx.batch.densities[2]);
  return {report.ratio <= 1.01,
          fmt("initial %.6f, sup %.6f, ratio %.5f", report.initial_distance, report.sup_distance,
              report.ratio)};
}

// 10. Co-rotating pair period.
Outcome pair_period() {
  const double gamma = 1.0, d = 0.5;
  const double period = 2.0 * kPi * kPi * d * d / gamma;
  const std::vector<double> positions = {-d / 2.0, 0.0, d / 2.0, 0.0};
  const std::vector<double> circ = {gamma, gamma};

  // Oracle: after one closed-form period the fine RK4 solution is back at the start.
  const auto back = point_vortex_rk4(positions, circ, Kernel::exact(), period, 20000);
  double oracle_err = 0.0;
  for (std::size_t e = 0; e < 4; ++e) oracle_err = std::max(oracle_err, std::abs(back[e] - positions[e]));

  const std::size_t steps = 4200;
  const double dt = period / 4000.0;
  const RoughPath rp = canonical_lift(TimeGrid::uniform(0.0, dt * steps, steps), std::vector<double>(steps + 1, 0.0), 1);
  EulerConfig config;
  config.kernel = Kernel::blob(d / 200.0);
  const auto run = simulate({positions, circ, "pair"}, VectorFieldSet::zero(2, 1), rp, config);
  const double measured = rotation_period(run, 0, 1);
  const double rel = std::abs(measured - period) / period;
  return {rel <= 0.02 && oracle_err <= 1e-6,
          fmt("period %.5f vs %.5f (rel %.3g), RK4 return error %.2g", measured, period, rel, oracle_err)};
}

ParticleEnsemble gaussian_vortex(std::size_t nx, std::size_t ny, double spacing, double s, double gamma) {
  const double x0 = -0.5 * spacing * static_cast<double>(nx), y0 = -0.5 * spacing * static_cast<double>(ny);
  const GridField omega = GridField::sample(nx, ny, x0, y0, spacing, spacing, [&](double x, double y) {
    return gamma / (2.0 * kPi * s * s) * std::exp(-(x * x + y * y) / (2.0 * s * s));
  });
  return discretize_vorticity(omega);
}

// 11. Lp conservation for the Gaussian vortex.
Outcome lp_conservation() {
  const auto ens = gaussian_vortex(40, 50, 0.05, 0.2, 1.0);
  const std::size_t steps = 400;
  const RoughPath rp = canonical_lift(unit_grid(steps), std::vector<double>(steps + 1, 0.0), 1);
  EulerConfig config;
  config.kernel = Kernel::blob(0.1);
  config.output_indices = {0, 100, 200, 300, 400};
  config.reconstruction = GridField(128, 128, -1.6, -1.6, 3.2 / 128.0, 3.2 / 128.0);
  config.keep_positions = false;
  const auto run = simulate(ens, VectorFieldSet::zero(2, 1), rp, config);
  double l1 = 0.0, l2 = 0.0;
  bool bitwise = true;
  const auto& s0 = run.series.front();
  for (const auto& s : run.series) {
    l1 = std::max(l1, std::abs(s.norms.l1 / s0.norms.l1 - 1.0));
    l2 = std::max(l2, std::abs(s.norms.l2 / s0.norms.l2 - 1.0));
    bitwise = bitwise && s.total_circulation == s0.total_circulation;
  }
  return {ens.size() == 2000 && l1 <= 0.02 && l2 <= 0.02 && bitwise,
          fmt("N = %zu, L1 drift %.3g, L2 drift %.3g, Linf %.4f -> %.4f, circulation constant: %s", ens.size(), l1,
              l2, s0.norms.linf, run.series.back().norms.linf, bitwise ? "bitwise" : "no")};
}

// 12. Translation equivariance under constant noise.
Outcome translation_equivariance() {
  const auto ens = gaussian_vortex(8, 8, 0.1, 0.2, 1.0);
  const std::vector<double> sigma = {0.7, -0.2, 0.1, 0.5};
  const RoughPath rp = brownian(2, 1000, 17);
  EulerConfig config;
  config.kernel = Kernel::blob(0.1);
  const auto noisy = simulate(ens, VectorFieldSet::constant(2, 2, sigma), rp, config);
  const auto quiet = simulate(ens, VectorFieldSet::zero(2, 2), rp, config);
  double worst = 0.0;
  for (std::size_t r = 0; r < noisy.positions.size(); ++r) {
    const auto dz = rp.increment(0, noisy.indices[r]);
    for (std::size_t p = 0; p < ens.size(); ++p)
      for (std::size_t c = 0; c < 2; ++c) {
        const double shifted = quiet.positions[r][2 * p + c] + sigma[c * 2] * dz[0] + sigma[c * 2 + 1] * dz[1];
        worst = std::max(worst, std::abs(noisy.positions[r][2 * p + c] - shifted));
      }
  }
  return {worst <= 1e-10, fmt("max discrepancy %.3g over %zu particles, 1000 steps", worst, ens.size())};
}

// 13. Wong-Zakai convergence.
Outcome wong_zakai() {
  const auto ens = gaussian_vortex(20, 20, 0.08, 0.25, 1.0);
  NoiseSpec spec;
  spec.kind = NoiseKind::Brownian;
  spec.dimension = 2;
  spec.seed = 23;
  spec.grid = TimeGrid::dyadic(10);
  const auto values = sample_noise_values(spec);
  EulerConfig config;
  config.kernel = Kernel::blob(0.16);
  // Every grid index: at the coarse nodes all interpolants coincide, so the
  // sup over time needs the points in between.
  for (std::size_t k = 1; k <= 1024; ++k) config.output_indices.push_back(k);
  config.reconstruction = GridField(40, 40, -1.6, -1.6, 0.08, 0.08);
  config.keep_positions = false;
  const std::vector<unsigned> levels = {6, 7, 8, 9, 10};
  const auto report = wong_zakai_study(ens, VectorFieldSet::shear2d(0.3, 1.0), values, 2, 1.0, levels, config);
  std::string detail = "distances";
  bool positive = true;
  for (double v : report.distances) {
    detail += fmt(" %.3g", v);
    positive = positive && v > 0.0;
  }
  return {report.nonincreasing && positive, detail};
}

// 14. Remainder decay for solutions; frozen density flagged.
Outcome remainder_diagnostic() {
  const GridField rho = GridField::sample(24, 24, -1.2, -1.2, 0.1, 0.1, [](double x, double y) {
    return std::exp(-(x * x + y * y) / (2.0 * 0.16));
  });
  const auto [seeds, weights] = particles_from_density(rho);
  const TestFunctionSet tests = {BumpFunction({0.0, 0.0}, 1.0), BumpFunction({0.3, -0.2}, 0.8, {0.5, 0.2}),
                                 BumpFunction({-0.4, 0.3}, 0.9, {0.0, -0.6})};
  const std::size_t steps = 4096;
  std::vector<double> smooth;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    smooth.push_back(std::sin(3.0 * t));
    smooth.push_back(t * t - 0.5 * t);
  }
  struct Case {
    std::string name;
    DriftField b;
    VectorFieldSet xi;
    RoughPath rp;
  };
  const std::vector<Case> cases = {
      {"brownian+shear+rotation", DriftField::rotation(1.0), VectorFieldSet::shear2d(0.4, 1.5), brownian(2, steps, 31)},
      {"smooth+shear+rotation", DriftField::rotation(0.5), VectorFieldSet::shear2d(0.6, 1.0),
       canonical_lift(unit_grid(steps), smooth, 2)},
      {"brownian+linear", DriftField::zero(2), VectorFieldSet::linear(2, {{0.0, 1.0, -1.0, 0.0}, {0.5, 0.0, 0.0, -0.5}}),
       brownian(2, steps, 37)},
  };
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const ParticleDensity pd{solve_flow(seeds, c.b, c.xi, c.rp), weights};
    const auto report = rpde_remainder_diagnostic(pd, c.b, DriverPair(c.xi, c.rp), tests);
    double kappa = INFINITY;
    for (double k : report.exponents) kappa = std::min(kappa, k);
    detail += fmt("%s kappa=%.2f; ", c.name.c_str(), kappa);
    ok = ok && kappa > 1.0 && !report.flagged;
  }
  const auto& c = cases[1];
  const ParticleDensity frozen{frozen_flow(seeds, 2, c.rp.grid()), weights};
  const auto control = rpde_remainder_diagnostic(frozen, c.b, DriverPair(c.xi, c.rp), tests);
  double kappa = INFINITY;
  for (double k : control.exponents) kappa = std::min(kappa, k);
  detail += fmt("frozen control kappa=%.2f flagged=%s", kappa, control.flagged ? "yes" : "no");
  return {ok && control.flagged, detail};
}

// 15. Byte-identical CSVs on re-runs of every CLI scenario.
Outcome reproducibility() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / ("roughflow-repro-" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> scenarios = {
      {"lift", "--circle", "--levels", "10"},
      {"lift", "--set", "noise.kind=brownian", "--set", "noise.dimension=2", "--set", "grid.steps=256"},
      {"rde", "--set", "grid.steps=256"},
      {"flow", "--set", "grid.steps=256"},
      {"transport", "--set", "box.cells=48", "--set", "grid.steps=64"},
      {"euler", "--pair", "--gamma", "1", "--d", "0.5", "--set", "grid.steps=500"},
      {"euler", "--set", "grid.steps=48", "--set", "euler.cells=12"},
      {"study-wongzakai", "--set", "euler.cells=8", "--set", "study.levels=4,6"},
      {"study-convergence", "--set", "study.levels=5,8"},
  };
  std::size_t csvs = 0;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    std::vector<std::vector<char>> bytes[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / (std::to_string(s) + "-" + std::to_string(rep));
      std::vector<std::string> args = {"roughflow", "run"};
      args.insert(args.end(), scenarios[s].begin(), scenarios[s].end());
      args.insert(args.end(), {"--seed", "99", "--threads", "1", "--plots", "off", "--out", out.string()});
      std::ostringstream sink;
      const int code = cli::run_cli(args, sink, sink);
      if (code != 0) return {false, "scenario " + scenarios[s][0] + " exited with " + std::to_string(code) + ": " + sink.str()};
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(out))
        if (e.path().extension() == ".csv") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        bytes[rep].emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
      }
    }
    if (bytes[0].empty() || bytes[0] != bytes[1]) return {false, "scenario " + scenarios[s][0] + " differs between runs"};
    csvs += bytes[0].size();
  }
  fs::remove_all(root);
  return {true, fmt("%zu scenarios, %zu CSV files byte-identical", scenarios.size(), csvs)};
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"chen relation", 5, chen_relation},
      {"circle levy area", 1, circle_area},
      {"affine exactness", 1, affine_exactness},
      {"refinement order", 10, refinement_order},
      {"inverse flow consistency", 30, inverse_flow_consistency},
      {"quasi-incompressibility", 10, quasi_incompressibility},
      {"bihari bound", 1, bihari_closed_forms},
      {"duality", 120, duality},
      {"l2 stability", 120, stability},
      {"vortex pair period", 30, pair_period},
      {"vorticity lp conservation", 120, lp_conservation},
      {"translation equivariance", 60, translation_equivariance},
      {"wong-zakai convergence", 300, wong_zakai},
      {"remainder decay", 60, remainder_diagnostic},
      {"reproducibility", 300, reproducibility},
  };
  std::vector<std::size_t> selected;
  for (int a = 1; a < argc; ++a) selected.push_back(std::stoul(argv[a]));
  if (selected.empty())
    for (std::size_t i = 1; i <= criteria.size(); ++i) selected.push_back(i);

  int failures = 0;
  for (std::size_t id : selected) {
    if (id == 0 || id > criteria.size()) {
      std::printf("FAIL %2zu unknown criterion\n", id);
      ++failures;
      continue;
    }
    const auto& c = criteria[id - 1];
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = seconds <= c.budget_seconds;
    const bool pass = outcome.pass && in_budget;
    std::printf("%s %2zu %-26s %s [%.2f s / %.0f s budget%s]\n", pass ? "PASS" : "FAIL", id, c.name,
                outcome.detail.c_str(), seconds, c.budget_seconds, in_budget ? "" : ", over budget");
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
