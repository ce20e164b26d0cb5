#include "scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "roughflow/errors.hpp"
#include "roughflow/euler2d.hpp"
#include "roughflow/rde.hpp"
#include "roughflow/transport.hpp"

namespace roughflow::cli {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t state_dim(const json& cfg) { return cfg["drift.name"] == "log-lipschitz" ? 1 : 2; }
std::size_t noise_dim(const json& cfg) { return cfg["noise.dimension"].get<std::size_t>(); }
double num(const json& cfg, const char* key) { return cfg[key].get<double>(); }
std::size_t count(const json& cfg, const char* key) { return cfg[key].get<std::size_t>(); }

std::vector<double> numbers(const json& list) {
  std::vector<double> v;
  for (const auto& e : list) v.push_back(e.get<double>());
  return v;
}

std::vector<std::string> indexed(const std::string& stem, std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= n; ++i) names.push_back(stem + std::to_string(i));
  return names;
}

std::vector<std::size_t> iota_columns(std::size_t first, std::size_t last) {
  std::vector<std::size_t> c;
  for (std::size_t i = first; i <= last; ++i) c.push_back(i);
  return c;
}

double levy_area(const RoughPath& rp, std::size_t i, std::size_t j) {
  const auto zz = rp.second_level(i, j);
  const std::size_t m = rp.dim();
  return 0.5 * (zz[1] - zz[m]);
}

/// Gaussian vortex of total circulation gamma sampled on a centred lattice.
ParticleEnsemble gaussian_vortex(const json& cfg) {
  const std::size_t n = count(cfg, "euler.cells");
  const double h = num(cfg, "euler.spacing"), s = num(cfg, "euler.vortex_sigma"), gamma = num(cfg, "euler.gamma");
  const double x0 = -0.5 * h * static_cast<double>(n);
  const GridField omega = GridField::sample(n, n, x0, x0, h, h, [&](double x, double y) {
    return gamma / (2.0 * kPi * s * s) * std::exp(-(x * x + y * y) / (2.0 * s * s));
  });
  auto ens = discretize_vorticity(omega);
  ens.source = "gaussian vortex";
  return ens;
}

GridField box_lattice(const json& cfg, std::size_t cells) {
  const double w = num(cfg, "box.half_width");
  const double h = 2.0 * w / static_cast<double>(cells);
  return GridField(cells, cells, -w, -w, h, h);
}

EulerConfig ensemble_config(const json& cfg, unsigned threads) {
  EulerConfig ec;
  const double delta = num(cfg, "euler.delta");
  ec.kernel = Kernel::blob(delta > 0 ? delta : 2.0 * num(cfg, "euler.spacing"));
  ec.reconstruction = box_lattice(cfg, count(cfg, "euler.recon_cells"));
  ec.threads = threads;
  return ec;
}

// ---------------------------------------------------------------------------

void run_lift(const json& cfg, ResultWriter& w, json& summary) {
  if (cfg["noise.kind"] == "circle") {
    const std::size_t top = count(cfg, "grid.level");
    Table t{"levy_area", "level: dyadic refinement; area, error: square length units", {"level", "points", "levy_area", "error", "chen_defect"}};
    t.plot_columns = {3};
    t.log_y = true;
    double area = 0.0;
    for (std::size_t level = std::min<std::size_t>(2, top); level <= top; ++level) {
      const TimeGrid grid = TimeGrid::dyadic(static_cast<unsigned>(level), num(cfg, "grid.horizon"));
      const RoughPath rp = config_path(cfg, grid);
      area = levy_area(rp, 0, grid.steps());
      t.add({double(level), double(grid.size()), area, std::abs(area - kPi), chen_defect(rp)});
    }
    w.write(t);
    summary["levy_area"] = area;
    summary["levy_area_error"] = std::abs(area - kPi);
    return;
  }

  const TimeGrid grid = config_grid(cfg);
  const RoughPath rp = config_path(cfg, grid);
  const std::size_t m = rp.dim();
  Table path{"path", "t: time; z: path units; levy_area: squared path units", {"t"}};
  for (const auto& c : indexed("z", m)) path.columns.push_back(c);
  if (m >= 2) path.columns.push_back("levy_area_12");
  path.plot_columns = iota_columns(1, path.columns.size() - 1);
  for (std::size_t i : config_schedule(cfg)) {
    std::vector<double> row{grid[i]};
    for (double z : rp.point(i)) row.push_back(z);
    if (m >= 2) row.push_back(levy_area(rp, 0, i));
    path.add(std::move(row));
  }
  w.write(path);

  const double defect = chen_defect(rp);
  double pvar = std::nan("");
  if (grid.size() <= kDenseControlLimit + 1) {
    const std::vector<double> values(rp.first_level().begin(), rp.first_level().end());
    pvar = p_variation(PathIncrements(grid, values, m), rp.p_exponent());
  }
  Table s{"lift_summary", "chen_defect: squared path units; p_variation: path units", {"points", "p", "chen_defect", "p_variation"}};
  s.add({double(grid.size()), rp.p_exponent(), defect, pvar});
  w.write(s);
  summary["chen_defect"] = defect;
  summary["chen_within_tolerance"] = defect <= num(cfg, "tolerance.chen");
}

void run_rde(const json& cfg, ResultWriter& w, json& summary) {
  const TimeGrid grid = config_grid(cfg);
  const RoughPath rp = config_path(cfg, grid);
  const auto xi = config_fields(cfg);
  const auto b = config_drift(cfg);
  const auto y0 = numbers(cfg["rde.initial"]);
  const Trajectory traj = solve_rde(y0, b, xi, rp);

  Table t{"trajectory", "t: time; y: state units", {"t"}};
  for (const auto& c : indexed("y", traj.dim)) t.columns.push_back(c);
  t.plot_columns = iota_columns(1, traj.dim);
  for (std::size_t i : config_schedule(cfg)) {
    std::vector<double> row{grid[i]};
    for (double v : traj.state(i)) row.push_back(v);
    t.add(std::move(row));
  }
  w.write(t);

  const auto fit = fit_remainder_exponent(traj, b, xi, rp);
  Table r{"remainder", "window_length: time; max_remainder: state units", {"window_length", "max_remainder"}};
  r.plot_columns = {1};
  r.log_y = true;
  for (std::size_t i = 0; i < fit.window_lengths.size(); ++i) r.add({fit.window_lengths[i], fit.max_remainders[i]});
  w.write(r);
  summary["remainder_exponent"] = fit.exponent;
  const auto end = traj.state(grid.steps());
  summary["terminal"] = std::vector<double>(end.begin(), end.end());
}

void run_flow(const json& cfg, ResultWriter& w, unsigned threads, json& summary) {
  const TimeGrid grid = config_grid(cfg);
  const RoughPath rp = config_path(cfg, grid);
  const auto xi = config_fields(cfg);
  const auto b = config_drift(cfg);
  const std::size_t n = count(cfg, "flow.seeds_per_axis");
  const double extent = num(cfg, "flow.extent"), fd = num(cfg, "flow.fd_step");

  std::vector<double> base;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      base.push_back(-extent + 2.0 * extent * double(i) / double(n - 1));
      base.push_back(-extent + 2.0 * extent * double(j) / double(n - 1));
    }
  std::vector<double> seeds = base;
  for (std::size_t s = 0; s < n * n; ++s) {
    const auto st = jacobian_stencil({base.data() + 2 * s, 2}, fd);
    seeds.insert(seeds.end(), st.begin(), st.end());
  }

  const auto schedule = config_schedule(cfg);
  const FlowMap flow = solve_flow(seeds, b, xi, rp, {schedule, threads});
  for (const auto& f : flow.failures)
    if (f) throw NumericError("flow diverged: " + *f);

  Table pos{"flow", "t: time; x, y: space units", {"seed_id", "t", "x", "y"}};
  for (std::size_t s = 0; s < n * n; ++s)
    for (std::size_t r = 0; r < schedule.size(); ++r) {
      const auto p = flow.position(r, s);
      pos.add({double(s), grid[schedule[r]], p[0], p[1]});
    }
  w.write(pos);

  const std::size_t last = grid.steps();
  const std::size_t rec = flow.record_of(last);
  std::vector<double> targets;
  for (std::size_t s = 0; s < n * n; ++s) {
    const auto p = flow.position(rec, s);
    targets.insert(targets.end(), p.begin(), p.end());
  }
  const auto back = inverse_flow(targets, b, xi, rp, last, threads);

  Table checks{"flow_checks", "x0, y0: space units; inverse_error: space units; det_jacobian: dimensionless",
               {"seed_id", "x0", "y0", "inverse_error", "det_jacobian"}};
  double worst_inverse = 0.0, worst_det = 0.0;
  for (std::size_t s = 0; s < n * n; ++s) {
    const double err = std::hypot(back[2 * s] - base[2 * s], back[2 * s + 1] - base[2 * s + 1]);
    const double det = jacobian_determinant(flow, last, {base.data() + 2 * s, 2}, fd);
    worst_inverse = std::max(worst_inverse, err);
    worst_det = std::max(worst_det, std::abs(det - 1.0));
    checks.add({double(s), base[2 * s], base[2 * s + 1], err, det});
  }
  w.write(checks);

  json modulus = nullptr;
  if (schedule.size() <= 64) {
    // Base seeds only: the stencil pairs add nothing but cost.
    FlowMap coarse = flow;
    coarse.seeds.assign(base.begin(), base.end());
    coarse.failures.resize(n * n);
    coarse.positions.clear();
    for (std::size_t r = 0; r < schedule.size(); ++r)
      for (std::size_t s = 0; s < n * n; ++s) {
        const auto p = flow.position(r, s);
        coarse.positions.insert(coarse.positions.end(), p.begin(), p.end());
      }
    const auto report = flow_modulus_diagnostic(coarse, b.modulus(), [](double t) { return t; });
    modulus = {{"fitted_constant", report.fitted_constant}, {"bound_holds", report.bound_holds},
               {"violations", report.violations.size()}};
  }
  summary["max_inverse_error"] = worst_inverse;
  summary["max_det_deviation"] = worst_det;
  summary["modulus"] = modulus;
}

void run_transport(const json& cfg, ResultWriter& w, unsigned threads, json& summary) {
  const TimeGrid grid = config_grid(cfg);
  const RoughPath rp = config_path(cfg, grid);
  const auto xi = config_fields(cfg);
  const auto b = config_drift(cfg);
  const GridField layout = box_lattice(cfg, count(cfg, "box.cells"));
  const double s = num(cfg, "transport.rho_sigma");

  const auto gaussian = [&](double cx, double cy) {
    return GridField::sample(layout.nx(), layout.ny(), layout.x0(), layout.y0(), layout.dx(), layout.dy(),
                             [&](double x, double y) {
                               const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                               return std::exp(-r2 / (2.0 * s * s)) / (2.0 * kPi * s * s);
                             });
  };
  const GridField rho1 = gaussian(0.3, 0.0), rho2 = gaussian(0.3, 0.15);
  const BumpFunction bump({0.0, 0.0}, num(cfg, "transport.bump_radius"), {0.5, -0.25});
  const GridField f0 = GridField::sample(layout.nx(), layout.ny(), layout.x0(), layout.y0(), layout.dx(), layout.dy(),
                                         [&](double x, double y) {
                                           const double p[2] = {x, y};
                                           return bump.value(p);
                                         });

  TransportOptions opts;
  opts.interpolation = cfg["transport.interpolation"] == "bicubic" ? Interpolation::Bicubic : Interpolation::Bilinear;
  opts.threads = threads;
  const auto schedule = config_schedule(cfg);
  const GridField densities[] = {rho1, rho2};
  const auto batch = solve_lagrangian(densities, {&f0, 1}, b, xi, rp, schedule, opts);
  const auto& rho = batch.densities[0];
  const auto& f = batch.scalars[0];

  const auto duality = duality_check(rho, f);
  const auto mass = mass_conservation_check(rho);
  const auto stability = stability_check(rho1, rho2, rho, batch.densities[1]);

  Table t{"transport", "t: time; mass, l1: density units x area; pairing: density x scalar x area; l2_distance: L2 norm",
          {"t", "mass", "l1", "l2", "linf", "pairing", "l2_distance"}};
  t.plot_columns = {1, 5};
  for (std::size_t r = 0; r < rho.fields.size(); ++r) {
    const auto nr = norms(rho.fields[r]);
    t.add({rho.times[r], mass.mass.values[r], nr.l1, nr.l2, nr.linf, duality.values[r],
           l2_distance(rho.fields[r], batch.densities[1].fields[r])});
  }
  w.write(t);
  rho.fields.back().write((w.dir() / "density_final").string());

  summary["duality_drift"] = duality.max_relative_drift;
  summary["duality_within_tolerance"] = duality.max_relative_drift <= num(cfg, "tolerance.duality");
  summary["mass_drift"] = mass.mass.max_relative_drift;
  summary["stability_ratio"] = stability.ratio;
  if (mass.warning) summary["warning"] = *mass.warning;
}

void run_euler_pair(const json& cfg, ResultWriter& w, unsigned threads, json& summary) {
  const double gamma = num(cfg, "euler.gamma"), d = num(cfg, "euler.d");
  if (gamma <= 0) throw ParameterError("euler.gamma must be positive for the co-rotating pair");
  const double period = 2.0 * kPi * kPi * d * d / gamma;
  const std::size_t steps = count(cfg, "grid.steps");
  const TimeGrid grid = TimeGrid::uniform(0.0, num(cfg, "euler.periods") * period, steps);
  const RoughPath rp = config_path(cfg, grid);
  const auto xi = config_fields(cfg);
  const std::vector<double> positions = {-d / 2.0, 0.0, d / 2.0, 0.0}, circ = {gamma, gamma};

  EulerConfig ec;
  const double delta = num(cfg, "euler.delta") > 0 ? num(cfg, "euler.delta") : d / 200.0;
  ec.kernel = Kernel::blob(delta);
  ec.threads = threads;
  const auto run = simulate({positions, circ, "vortex pair"}, xi, rp, ec);
  const double measured = rotation_period(run, 0, 1);
  const double rel = std::abs(measured - period) / period;

  const auto back = point_vortex_rk4(positions, circ, Kernel::exact(), period, 20000);
  double oracle = 0.0;
  for (std::size_t e = 0; e < 4; ++e) oracle = std::max(oracle, std::abs(back[e] - positions[e]));

  Table p{"period", "period: time; d, delta: length; gamma: circulation", {"gamma", "d", "delta", "steps", "dt",
          "period_closed_form", "period_measured", "relative_error", "rk4_return_error"}};
  p.add({gamma, d, delta, double(steps), grid[1] - grid[0], period, measured, rel, oracle});
  w.write(p);

  Table snap{"snapshots", "t: time; x, y: length", {"t", "x1", "y1", "x2", "y2"}};
  snap.plot_columns = {1, 2, 3, 4};
  for (std::size_t i : config_schedule(cfg)) {
    const auto& x = run.positions[i];
    snap.add({run.times[i], x[0], x[1], x[2], x[3]});
  }
  w.write(snap);
  summary["period_measured"] = measured;
  summary["period_closed_form"] = period;
  summary["period_within_tolerance"] = rel <= num(cfg, "tolerance.period");
}

void run_euler(const json& cfg, ResultWriter& w, unsigned threads, json& summary) {
  if (cfg["euler.pair"].get<bool>()) return run_euler_pair(cfg, w, threads, summary);
  const TimeGrid grid = config_grid(cfg);
  const RoughPath rp = config_path(cfg, grid);
  const auto xi = config_fields(cfg);
  const auto ens = gaussian_vortex(cfg);
  EulerConfig ec = ensemble_config(cfg, threads);
  ec.output_indices = config_schedule(cfg);
  const auto run = simulate(ens, xi, rp, ec);

  Table c{"conserved", "t: time; total_circulation: circulation; l1, l2, linf: vorticity norms of the reconstruction",
          {"t", "total_circulation", "l1", "l2", "linf"}};
  c.plot_columns = {2, 3, 4};
  for (const auto& s : run.series) c.add({s.t, s.total_circulation, s.norms.l1, s.norms.l2, s.norms.linf});
  w.write(c);

  Table snap{"snapshots", "t: time; x, y: length; gamma: circulation", {"t", "particle", "x", "y", "gamma"}};
  for (std::size_t r = 0; r < run.positions.size(); ++r)
    for (std::size_t p = 0; p < ens.size(); ++p)
      snap.add({run.times[r], double(p), run.positions[r][2 * p], run.positions[r][2 * p + 1], ens.circulations[p]});
  w.write(snap);
  run.fields.back().write((w.dir() / "vorticity_final").string());

  const auto& a = run.series.front();
  double l1 = 0.0, l2 = 0.0;
  bool constant = true;
  for (const auto& s : run.series) {
    l1 = std::max(l1, std::abs(s.norms.l1 / a.norms.l1 - 1.0));
    l2 = std::max(l2, std::abs(s.norms.l2 / a.norms.l2 - 1.0));
    constant = constant && s.total_circulation == a.total_circulation;
  }
  summary["particles"] = ens.size();
  summary["l1_drift"] = l1;
  summary["l2_drift"] = l2;
  summary["circulation_constant"] = constant;
}

std::vector<unsigned> study_levels(const json& cfg) {
  std::vector<unsigned> levels;
  for (double l : numbers(cfg["study.levels"])) levels.push_back(static_cast<unsigned>(l));
  return levels;
}

void run_wong_zakai(const json& cfg, ResultWriter& w, unsigned threads, json& summary) {
  const auto levels = study_levels(cfg);
  const double horizon = num(cfg, "grid.horizon");
  const TimeGrid fine = TimeGrid::dyadic(levels.back(), horizon);
  const auto values = config_noise_values(cfg, fine);
  const auto xi = config_fields(cfg);
  const auto report =
      wong_zakai_study(gaussian_vortex(cfg), xi, values, noise_dim(cfg), horizon, levels, ensemble_config(cfg, threads));

  Table t{"wongzakai", "level: dyadic driver level; distance: sup over time of the L2 vorticity distance",
          {"level", "next_level", "distance"}};
  t.plot_columns = {2};
  t.log_y = true;
  const double slack = 1.0 + num(cfg, "tolerance.wongzakai_slack");
  bool ok = true;
  for (std::size_t i = 0; i < report.distances.size(); ++i) {
    t.add({double(report.levels[i]), double(report.levels[i + 1]), report.distances[i]});
    if (i > 0) ok = ok && report.distances[i] <= slack * report.distances[i - 1];
  }
  w.write(t);
  summary["nonincreasing"] = ok;
}

void run_convergence(const json& cfg, ResultWriter& w, json& summary) {
  const auto levels = study_levels(cfg);
  const TimeGrid fine = TimeGrid::dyadic(levels.back(), num(cfg, "grid.horizon"));
  const RoughPath rp = config_path(cfg, fine);
  const auto xi = config_fields(cfg);
  const auto b = config_drift(cfg);
  const auto y0 = numbers(cfg["rde.initial"]);
  const std::size_t m = rp.dim();

  // Closed-form terminal value for the driftless linear or constant fields.
  const auto dz = rp.increment(0, fine.steps());
  std::vector<double> exact = y0;
  const std::string fields = cfg["fields.name"];
  if (fields == "rotation") {
    double theta = 0.0;
    for (double z : dz) theta += num(cfg, "fields.amplitude") * z;
    exact = {std::cos(theta) * y0[0] - std::sin(theta) * y0[1], std::sin(theta) * y0[0] + std::cos(theta) * y0[1]};
  } else if (fields == "constant") {
    const VectorFieldSet& c = xi;
    std::vector<double> col(2);
    for (std::size_t k = 0; k < m; ++k) {
      c.eval(k, y0, col);
      exact[0] += col[0] * dz[k];
      exact[1] += col[1] * dz[k];
    }
  }

  Table t{"convergence", "level: dyadic level; dt: time; error: state units", {"level", "steps", "dt", "error"}};
  t.plot_columns = {3};
  t.log_y = true;
  std::vector<double> dts, errors;
  for (unsigned level : levels) {
    const RoughPath coarse = coarsen(rp, std::size_t{1} << (levels.back() - level));
    const auto traj = solve_rde(y0, b, xi, coarse);
    const auto end = traj.state(coarse.grid().steps());
    const double err = std::hypot(end[0] - exact[0], end[1] - exact[1]);
    const double dt = coarse.grid()[1] - coarse.grid()[0];
    t.add({double(level), double(coarse.grid().steps()), dt, err});
    dts.push_back(dt);
    errors.push_back(err);
  }
  w.write(t);
  summary["fitted_order"] = fit_loglog_slope(dts, errors);
}

}  // namespace

TimeGrid config_grid(const json& cfg) {
  return TimeGrid::uniform(0.0, num(cfg, "grid.horizon"), count(cfg, "grid.steps"));
}

std::vector<double> config_noise_values(const json& cfg, const TimeGrid& grid) {
  const std::string kind = cfg["noise.kind"];
  const std::size_t m = noise_dim(cfg);
  if (kind == "brownian" || kind == "fbm") {
    NoiseSpec spec;
    spec.kind = kind == "fbm" ? NoiseKind::FractionalBrownian : NoiseKind::Brownian;
    spec.dimension = m;
    spec.hurst = num(cfg, "noise.hurst");
    spec.seed = cfg["seed"].get<std::uint64_t>();
    spec.grid = grid;
    return sample_noise_values(spec);
  }
  std::vector<double> v;
  v.reserve(grid.size() * m);
  const double T = grid.back();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    for (std::size_t k = 0; k < m; ++k) {
      if (kind == "circle")
        v.push_back(k == 0 ? std::cos(2.0 * kPi * t / T) : std::sin(2.0 * kPi * t / T));
      else if (kind == "smooth")
        v.push_back(std::sin(3.0 * double(k + 1) * t) / double(k + 1) + 0.5 * double(k) * t * t);
      else
        v.push_back(0.0);
    }
  }
  return v;
}

RoughPath config_path(const json& cfg, const TimeGrid& grid) {
  const std::string kind = cfg["noise.kind"];
  if (kind == "brownian" || kind == "fbm") {
    NoiseSpec spec;
    spec.kind = kind == "fbm" ? NoiseKind::FractionalBrownian : NoiseKind::Brownian;
    spec.dimension = noise_dim(cfg);
    spec.hurst = num(cfg, "noise.hurst");
    spec.seed = cfg["seed"].get<std::uint64_t>();
    spec.grid = grid;
    return sample_noise(spec);
  }
  return canonical_lift(grid, config_noise_values(cfg, grid), noise_dim(cfg));
}

VectorFieldSet config_fields(const json& cfg) {
  const std::string name = cfg["fields.name"];
  const std::size_t d = state_dim(cfg), m = noise_dim(cfg);
  const double a = num(cfg, "fields.amplitude");
  if (name == "shear") return VectorFieldSet::shear2d(a, num(cfg, "fields.wavenumber"));
  if (name == "constant") {
    auto sigma = numbers(cfg["fields.sigma"]);
    if (sigma.empty()) {
      sigma.assign(d * m, 0.0);
      for (std::size_t k = 0; k < m; ++k) sigma[(k % d) * m + k] = a;
    }
    return VectorFieldSet::constant(d, m, sigma);
  }
  if (name == "rotation") {
    if (d != 2) throw ParameterError("rotation fields need a two-dimensional state");
    return VectorFieldSet::linear(2, std::vector<std::vector<double>>(m, {0.0, -a, a, 0.0}));
  }
  return VectorFieldSet::zero(d, m);
}

DriftField config_drift(const json& cfg) {
  const std::string name = cfg["drift.name"];
  if (name == "rotation") return DriftField::rotation(num(cfg, "drift.omega"));
  if (name == "scaled-identity") return DriftField::scaled_identity(2, num(cfg, "drift.c"));
  if (name == "log-lipschitz") return DriftField::log_lipschitz_1d();
  return DriftField::zero(state_dim(cfg));
}

std::vector<std::size_t> config_schedule(const json& cfg) {
  const std::size_t n = count(cfg, "grid.steps"), c = count(cfg, "output.count");
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i <= c; ++i) s.push_back(i * (n / c));
  return s;
}

void run_scenario(const json& cfg, ResultWriter& writer, unsigned threads, json& summary) {
  const std::string command = cfg["command"];
  if (command == "lift") return run_lift(cfg, writer, summary);
  if (command == "rde") return run_rde(cfg, writer, summary);
  if (command == "flow") return run_flow(cfg, writer, threads, summary);
  if (command == "transport") return run_transport(cfg, writer, threads, summary);
  if (command == "euler") return run_euler(cfg, writer, threads, summary);
  if (command == "study-wongzakai") return run_wong_zakai(cfg, writer, threads, summary);
  if (command == "study-convergence") return run_convergence(cfg, writer, summary);
  throw ParameterError("unknown command '" + command + "'");
}

}  // namespace roughflow::cli
