#include "roughflow/euler2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "roughflow/errors.hpp"
#include "roughflow/parallel.hpp"

namespace roughflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Sum over particles of gamma_j K(q - X_j), skipping index `skip`.
void velocity_at(const ParticleEnsemble& ens, const Kernel& kernel, double qx, double qy, std::size_t skip,
                 double& ux, double& uy) {
  double sx = 0.0, sy = 0.0, kx, ky;
  const std::size_t n = ens.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (j == skip) continue;
    kernel(qx - ens.positions[2 * j], qy - ens.positions[2 * j + 1], kx, ky);
    sx += ens.circulations[j] * kx;
    sy += ens.circulations[j] * ky;
  }
  ux = sx;
  uy = sy;
}

}  // namespace

Kernel Kernel::exact() {
  return Kernel(KernelKind::Exact, "biot-savart", 0.0, true, OsgoodModulus::log_lipschitz(),
                [](double zx, double zy, double& ux, double& uy) {
                  const double r2 = zx * zx + zy * zy;
                  ux = -zy / (kTwoPi * r2);
                  uy = zx / (kTwoPi * r2);
                });
}

Kernel Kernel::blob(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ParameterError("blob radius must be positive");
  const double d2 = delta * delta;
  return Kernel(KernelKind::Blob, "biot-savart-blob", delta, false, OsgoodModulus::log_lipschitz(),
                [d2](double zx, double zy, double& ux, double& uy) {
                  const double r2 = zx * zx + zy * zy + d2;
                  ux = -zy / (kTwoPi * r2);
                  uy = zx / (kTwoPi * r2);
                });
}

Kernel Kernel::custom(std::string name, Evaluator k, OsgoodModulus modulus, bool singular) {
  if (!k) throw ParameterError("custom kernel needs an evaluator");
  return Kernel(KernelKind::Custom, std::move(name), 0.0, singular, std::move(modulus), std::move(k));
}

void Kernel::operator()(double zx, double zy, double& ux, double& uy) const {
  if (singular_ && zx == 0.0 && zy == 0.0)
    throw SingularityError("kernel '" + name_ + "' evaluated at its singularity");
  k_(zx, zy, ux, uy);
}

double ParticleEnsemble::total_circulation() const {
  double s = 0.0;
  for (double g : circulations) s += g;
  return s;
}

ParticleEnsemble discretize_vorticity(const GridField& omega0, double threshold) {
  if (!(threshold >= 0.0)) throw ParameterError("threshold must be nonnegative");
  ParticleEnsemble ens;
  ens.source = "grid " + std::to_string(omega0.nx()) + "x" + std::to_string(omega0.ny());
  for (std::size_t j = 0; j < omega0.ny(); ++j)
    for (std::size_t i = 0; i < omega0.nx(); ++i) {
      const double w = omega0(i, j);
      if (!(std::abs(w) > threshold)) continue;
      ens.positions.push_back(omega0.cell_x(i));
      ens.positions.push_back(omega0.cell_y(j));
      ens.circulations.push_back(w * omega0.cell_area());
    }
  if (ens.circulations.empty()) throw ParameterError("every cell is below the vorticity threshold");
  return ens;
}

std::vector<double> induced_velocity(const ParticleEnsemble& ens, std::span<const double> queries,
                                     const Kernel& kernel, unsigned threads) {
  if (queries.size() % 2 != 0) throw DimensionError("query points must be pairs");
  std::vector<double> out(queries.size());
  const std::size_t none = std::numeric_limits<std::size_t>::max();
  parallel_chunks(queries.size() / 2, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t q = begin; q < end; ++q)
      velocity_at(ens, kernel, queries[2 * q], queries[2 * q + 1], none, out[2 * q], out[2 * q + 1]);
  });
  return out;
}

std::vector<double> particle_velocities(const ParticleEnsemble& ens, const Kernel& kernel, unsigned threads) {
  std::vector<double> out(ens.positions.size());
  parallel_chunks(ens.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t q = begin; q < end; ++q)
      velocity_at(ens, kernel, ens.positions[2 * q], ens.positions[2 * q + 1], q, out[2 * q], out[2 * q + 1]);
  });
  return out;
}

GridField reconstruct_vorticity(const ParticleEnsemble& ens, const GridField& layout, double delta,
                                unsigned threads) {
  if (!(delta > 0.0)) throw ParameterError("reconstruction radius must be positive");
  GridField out = layout.zeros_like();
  const double d2 = delta * delta;
  const double c = d2 / std::numbers::pi;
  auto values = out.values();
  parallel_chunks(layout.ny(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j)
      for (std::size_t i = 0; i < layout.nx(); ++i) {
        const double x = layout.cell_x(i), y = layout.cell_y(j);
        double s = 0.0;
        for (std::size_t p = 0; p < ens.size(); ++p) {
          const double zx = x - ens.positions[2 * p], zy = y - ens.positions[2 * p + 1];
          const double r2 = zx * zx + zy * zy + d2;
          s += ens.circulations[p] * c / (r2 * r2);
        }
        values[j * layout.nx() + i] = s;
      }
  });
  return out;
}

void step_rough_euler(ParticleEnsemble& ens, const Kernel& kernel, const VectorFieldSet& xi, const RoughPath& rp,
                      std::size_t k, unsigned threads) {
  if (!xi.divergence_free())
    throw ParameterError("rough Euler requires divergence-free noise fields, got '" + xi.name() + "'");
  if (xi.dim() != 2) throw DimensionError("rough Euler noise fields must act on R^2");
  if (k + 1 >= rp.size()) throw ParameterError("step index out of range");
  const double dt = rp.grid()[k + 1] - rp.grid()[k];
  std::vector<double> u = particle_velocities(ens, kernel, threads);
  for (double& v : u) v *= dt;
  static const DriftField frozen = DriftField::zero(2);
  parallel_chunks(ens.size(), threads, [&](std::size_t begin, std::size_t end) {
    DavieStepper stepper(frozen, xi, rp);
    for (std::size_t p = begin; p < end; ++p) {
      try {
        stepper.step_with_drift_increment({ens.positions.data() + 2 * p, 2}, {u.data() + 2 * p, 2}, k);
      } catch (const DivergenceError& e) {
        throw DivergenceError("particle " + std::to_string(p) + ": " + e.what(), k, p);
      }
    }
  });
}

EulerRun simulate(const ParticleEnsemble& initial, const VectorFieldSet& xi, const RoughPath& rp,
                  const EulerConfig& config) {
  std::vector<std::size_t> outputs = config.output_indices;
  if (outputs.empty())
    for (std::size_t i = 0; i < rp.size(); ++i) outputs.push_back(i);
  for (std::size_t r = 0; r < outputs.size(); ++r)
    if (outputs[r] >= rp.size() || (r > 0 && outputs[r] <= outputs[r - 1]))
      throw ParameterError("output indices must be increasing grid indices");
  const double delta = config.reconstruction_delta > 0.0 ? config.reconstruction_delta : config.kernel.delta();
  if (config.reconstruction && !(delta > 0.0))
    throw ParameterError("field reconstruction needs a positive blob radius");

  EulerRun run;
  run.circulations = initial.circulations;
  ParticleEnsemble ens = initial;
  auto record = [&](std::size_t idx) {
    run.indices.push_back(idx);
    run.times.push_back(rp.grid()[idx]);
    if (config.keep_positions) run.positions.push_back(ens.positions);
    ConservedSample sample{rp.grid()[idx], ens.total_circulation(), {}};
    if (config.reconstruction) {
      run.fields.push_back(reconstruct_vorticity(ens, *config.reconstruction, delta, config.threads));
      sample.norms = norms(run.fields.back());
    }
    run.series.push_back(sample);
  };
  std::size_t next = 0;
  if (outputs[next] == 0) record(outputs[next++]);
  for (std::size_t k = 0; next < outputs.size(); ++k) {
    step_rough_euler(ens, config.kernel, xi, rp, k, config.threads);
    if (outputs[next] == k + 1) record(outputs[next++]);
  }
  return run;
}

double rotation_period(const EulerRun& run, std::size_t a, std::size_t b) {
  if (run.positions.size() < 2) throw ParameterError("rotation period needs stored positions");
  auto angle = [&](std::size_t r) {
    const auto& p = run.positions[r];
    return std::atan2(p[2 * b + 1] - p[2 * a + 1], p[2 * b] - p[2 * a]);
  };
  double prev = angle(0), unwrapped = 0.0;
  for (std::size_t r = 1; r < run.positions.size(); ++r) {
    const double cur = angle(r);
    double step = cur - prev;
    step -= kTwoPi * std::round(step / kTwoPi);
    const double before = unwrapped;
    unwrapped += step;
    prev = cur;
    if (std::abs(unwrapped) >= kTwoPi) {
      const double frac = (kTwoPi - std::abs(before)) / std::abs(step);
      return run.times[r - 1] + frac * (run.times[r] - run.times[r - 1]) - run.times.front();
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> point_vortex_rk4(std::span<const double> positions, std::span<const double> circulations,
                                     const Kernel& kernel, double horizon, std::size_t steps) {
  if (positions.size() != 2 * circulations.size()) throw DimensionError("one circulation per vortex required");
  if (steps == 0) throw ParameterError("at least one step required");
  ParticleEnsemble ens{{positions.begin(), positions.end()}, {circulations.begin(), circulations.end()}, "rk4"};
  const double h = horizon / static_cast<double>(steps);
  std::vector<double> x0;
  for (std::size_t s = 0; s < steps; ++s) {
    x0 = ens.positions;
    const auto k1 = particle_velocities(ens, kernel);
    for (std::size_t e = 0; e < x0.size(); ++e) ens.positions[e] = x0[e] + 0.5 * h * k1[e];
    const auto k2 = particle_velocities(ens, kernel);
    for (std::size_t e = 0; e < x0.size(); ++e) ens.positions[e] = x0[e] + 0.5 * h * k2[e];
    const auto k3 = particle_velocities(ens, kernel);
    for (std::size_t e = 0; e < x0.size(); ++e) ens.positions[e] = x0[e] + h * k3[e];
    const auto k4 = particle_velocities(ens, kernel);
    for (std::size_t e = 0; e < x0.size(); ++e)
      ens.positions[e] = x0[e] + h / 6.0 * (k1[e] + 2.0 * k2[e] + 2.0 * k3[e] + k4[e]);
  }
  return ens.positions;
}

RoughPath interpolated_lift(const TimeGrid& grid, std::span<const double> values, std::size_t dim,
                            std::size_t factor) {
  const std::size_t n = grid.size();
  if (values.size() != n * dim) throw DimensionError("interpolated lift: sample count does not match the grid");
  if (factor == 0 || grid.steps() % factor != 0) throw ParameterError("factor must divide the number of steps");
  std::vector<double> out(values.begin(), values.end());
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t k0 = (k / factor) * factor;
    if (k0 == k) continue;
    const std::size_t k1 = k0 + factor;
    const double w = (grid[k] - grid[k0]) / (grid[k1] - grid[k0]);
    for (std::size_t c = 0; c < dim; ++c)
      out[k * dim + c] = values[k0 * dim + c] + w * (values[k1 * dim + c] - values[k0 * dim + c]);
  }
  return canonical_lift(grid, out, dim);
}

WongZakaiReport wong_zakai_study(const ParticleEnsemble& initial, const VectorFieldSet& xi,
                                 std::span<const double> fine_values, std::size_t dim, double horizon,
                                 std::span<const unsigned> levels, const EulerConfig& config) {
  if (levels.size() < 2) throw ParameterError("Wong-Zakai study needs at least two levels");
  if (!config.reconstruction) throw ParameterError("Wong-Zakai study needs a reconstruction lattice");
  for (std::size_t l = 1; l < levels.size(); ++l)
    if (levels[l] <= levels[l - 1]) throw ParameterError("levels must be increasing");
  const unsigned top = levels.back();
  if (top > 24) throw ParameterError("finest level exceeds grid capacity");
  const TimeGrid grid = TimeGrid::dyadic(top, horizon);

  WongZakaiReport report;
  report.levels.assign(levels.begin(), levels.end());
  std::vector<GridField> previous;
  for (unsigned level : levels) {
    const RoughPath rp = interpolated_lift(grid, fine_values, dim, std::size_t{1} << (top - level));
    EulerRun run = simulate(initial, xi, rp, config);
    if (!previous.empty()) {
      double sup = 0.0;
      for (std::size_t r = 0; r < run.fields.size(); ++r) sup = std::max(sup, l2_distance(run.fields[r], previous[r]));
      report.distances.push_back(sup);
    }
    previous = std::move(run.fields);
  }
  report.nonincreasing = true;
  for (std::size_t l = 1; l < report.distances.size(); ++l)
    if (report.distances[l] > 1.1 * report.distances[l - 1]) report.nonincreasing = false;
  return report;
}

KernelProbeReport kernel_assumption_probe(const Kernel& kernel, const GridField& f, double radius) {
  KernelProbeReport report;
  const FieldNorms fn = norms(f);
  report.field_norm = fn.l1 + fn.linf;
  if (report.field_norm == 0.0) return report;

  auto velocity = [&](double x, double y, double& ux, double& uy) {
    double sx = 0.0, sy = 0.0, kx, ky;
    for (std::size_t j = 0; j < f.ny(); ++j)
      for (std::size_t i = 0; i < f.nx(); ++i) {
        const double w = f(i, j);
        if (w == 0.0) continue;
        kernel(x - f.cell_x(i), y - f.cell_y(j), kx, ky);
        sx += w * kx;
        sy += w * ky;
      }
    ux = sx * f.cell_area();
    uy = sy * f.cell_area();
  };

  // Corner lattice, subsampled to at most 65 points per axis.
  const std::size_t sx = std::max<std::size_t>(1, f.nx() / 64), sy = std::max<std::size_t>(1, f.ny() / 64);
  const std::size_t cx = f.nx() / sx + 1, cy = f.ny() / sy + 1;
  const double hx = static_cast<double>(sx) * f.dx(), hy = static_cast<double>(sy) * f.dy();
  std::vector<double> u(2 * cx * cy);
  for (std::size_t j = 0; j < cy; ++j)
    for (std::size_t i = 0; i < cx; ++i) {
      double ux, uy;
      velocity(f.x0() + static_cast<double>(i) * hx, f.y0() + static_cast<double>(j) * hy, ux, uy);
      u[2 * (j * cx + i)] = ux;
      u[2 * (j * cx + i) + 1] = uy;
      report.sup_ratio = std::max(report.sup_ratio, std::hypot(ux, uy) / report.field_norm);
    }

  const double xc = f.x0() + 0.5 * static_cast<double>(f.nx()) * f.dx();
  const double yc = f.y0() + 0.5 * static_cast<double>(f.ny()) * f.dy();
  for (std::size_t j = 1; j + 1 < cy; ++j)
    for (std::size_t i = 1; i + 1 < cx; ++i) {
      const double x = f.x0() + static_cast<double>(i) * hx, y = f.y0() + static_cast<double>(j) * hy;
      if (std::hypot(x - xc, y - yc) > radius) continue;
      auto at = [&](std::size_t a, std::size_t b, int comp) { return u[2 * (b * cx + a) + comp]; };
      double g2 = 0.0;
      for (int comp = 0; comp < 2; ++comp) {
        const double ddx = (at(i + 1, j, comp) - at(i - 1, j, comp)) / (2.0 * hx);
        const double ddy = (at(i, j + 1, comp) - at(i, j - 1, comp)) / (2.0 * hy);
        g2 += ddx * ddx + ddy * ddy;
      }
      report.gradient_l1 += std::sqrt(g2) * hx * hy;
    }

  const double lx = static_cast<double>(f.nx()) * f.dx(), ly = static_cast<double>(f.ny()) * f.dy();
  const double bases[5][2] = {{0.0, 0.0}, {0.25, 0.0}, {-0.25, 0.0}, {0.0, 0.25}, {0.125, -0.125}};
  const double dirs[2][2] = {{1.0, 0.0}, {std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0}};
  const auto& h = kernel.modulus();
  for (const auto& b : bases) {
    // Snap the base to a corner so it never meets a cell centre.
    const double x = f.x0() + std::round((xc - f.x0() + b[0] * lx) / f.dx()) * f.dx();
    const double y = f.y0() + std::round((yc - f.y0() + b[1] * ly) / f.dy()) * f.dy();
    double ux0, uy0;
    velocity(x, y, ux0, uy0);
    for (const auto& dir : dirs)
      for (double s = 1e-1; s >= 0.99e-4; s /= 10.0) {
        double ux1, uy1;
        velocity(x + s * dir[0], y + s * dir[1], ux1, uy1);
        const double ratio = std::hypot(ux1 - ux0, uy1 - uy0) / (h(s) * report.field_norm);
        report.modulus_ratio = std::max(report.modulus_ratio, ratio);
      }
  }
  return report;
}

}  // namespace roughflow
