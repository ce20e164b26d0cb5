#include "roughflow/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "roughflow/errors.hpp"
#include "roughflow/parallel.hpp"

namespace roughflow {

namespace {

bool solenoidal_until(const DriftField& b, const TimeGrid& grid, std::size_t t_index) {
  if (!b.has_divergence_sup()) return false;
  for (std::size_t k = 0; k <= t_index; ++k)
    if (b.divergence_sup(grid[k]) != 0.0) return false;
  return true;
}

void check_outputs(std::span<const std::size_t> indices, const RoughPath& rp) {
  if (indices.empty()) throw ParameterError("no output indices");
  for (std::size_t r = 0; r < indices.size(); ++r)
    if (indices[r] >= rp.size() || (r > 0 && indices[r] <= indices[r - 1]))
      throw ParameterError("output indices must be increasing grid indices");
}

double max_relative_drift(std::span<const double> values) {
  const double ref = values.front();
  double worst = 0.0;
  for (double v : values) worst = std::max(worst, std::abs(v - ref));
  return ref != 0.0 ? worst / std::abs(ref) : worst;
}

}  // namespace

Characteristics backward_characteristics(const GridField& layout, const DriftField& b, const VectorFieldSet& xi,
                                         const RoughPath& rp, std::size_t t_index, unsigned threads) {
  if (b.dim() != 2 || xi.dim() != 2) throw DimensionError("grid transport is two-dimensional");
  if (t_index >= rp.size()) throw ParameterError("characteristics: time index out of range");
  const std::size_t cells = layout.size();
  const bool weighted = !solenoidal_until(b, rp.grid(), t_index);

  Characteristics ch;
  ch.t_index = t_index;
  ch.feet.resize(2 * cells);
  for (std::size_t j = 0; j < layout.ny(); ++j)
    for (std::size_t i = 0; i < layout.nx(); ++i) {
      ch.feet[2 * (j * layout.nx() + i)] = layout.cell_x(i);
      ch.feet[2 * (j * layout.nx() + i) + 1] = layout.cell_y(j);
    }
  if (weighted) ch.log_weight.assign(cells, 0.0);
  if (t_index == 0) return ch;

  const RoughPath reversed = time_reverse(restrict_path(rp, {0, t_index}));
  const double origin = rp.grid().front() + rp.grid()[t_index];
  const DriftField rb = b.reversed(rp.grid().front(), rp.grid()[t_index]);
  const TimeGrid& rg = reversed.grid();

  parallel_chunks(cells, threads, [&](std::size_t begin, std::size_t end) {
    DavieStepper stepper(rb, xi, reversed);
    for (std::size_t c = begin; c < end; ++c) {
      std::span<double> y(ch.feet.data() + 2 * c, 2);
      double acc = 0.0;
      double prev = weighted ? b.divergence(origin - rg[0], y) : 0.0;
      for (std::size_t k = 0; k + 1 < reversed.size(); ++k) {
        try {
          stepper.step(y, k);
        } catch (const DivergenceError& e) {
          throw DivergenceError(std::string("characteristic from cell ") + std::to_string(c) + ": " + e.what(),
                                e.step(), c);
        }
        if (weighted) {
          const double next = b.divergence(origin - rg[k + 1], y);
          acc += 0.5 * (prev + next) * (rg[k + 1] - rg[k]);
          prev = next;
        }
      }
      if (weighted) ch.log_weight[c] = -acc;
    }
  });
  return ch;
}

GridField pull_back(const GridField& f0, const Characteristics& ch, Interpolation order) {
  if (ch.feet.size() != 2 * f0.size()) throw DimensionError("characteristics computed for another lattice");
  GridField out = f0.zeros_like();
  auto v = out.values();
  for (std::size_t c = 0; c < v.size(); ++c) v[c] = f0.interpolate(ch.feet[2 * c], ch.feet[2 * c + 1], order);
  return out;
}

GridField push_forward_density(const GridField& rho0, const Characteristics& ch, Interpolation order) {
  GridField out = pull_back(rho0, ch, order);
  if (!ch.log_weight.empty()) {
    auto v = out.values();
    for (std::size_t c = 0; c < v.size(); ++c) v[c] *= std::exp(ch.log_weight[c]);
  }
  return out;
}

LagrangianBatch solve_lagrangian(std::span<const GridField> densities, std::span<const GridField> scalars,
                                 const DriftField& b, const VectorFieldSet& xi, const RoughPath& rp,
                                 std::span<const std::size_t> output_indices, const TransportOptions& options) {
  check_outputs(output_indices, rp);
  if (!densities.empty() && !xi.divergence_free())
    throw ParameterError("continuity solver requires divergence-free noise fields, got '" + xi.name() + "'");
  const GridField* layout = !densities.empty() ? &densities.front() : !scalars.empty() ? &scalars.front() : nullptr;
  if (!layout) throw ParameterError("nothing to transport");
  for (const auto& f : densities)
    if (!f.same_layout(*layout)) throw DimensionError("transported fields must share one lattice");
  for (const auto& f : scalars)
    if (!f.same_layout(*layout)) throw DimensionError("transported fields must share one lattice");

  LagrangianBatch batch;
  batch.densities.resize(densities.size());
  batch.scalars.resize(scalars.size());
  auto all = [&](auto&& fn) {
    for (auto& s : batch.densities) fn(s);
    for (auto& s : batch.scalars) fn(s);
  };
  for (std::size_t idx : output_indices) {
    all([&](FieldSequence& s) {
      s.indices.push_back(idx);
      s.times.push_back(rp.grid()[idx]);
    });
    if (idx == 0) {
      for (std::size_t q = 0; q < densities.size(); ++q) batch.densities[q].fields.push_back(densities[q]);
      for (std::size_t q = 0; q < scalars.size(); ++q) batch.scalars[q].fields.push_back(scalars[q]);
      continue;
    }
    const Characteristics ch = backward_characteristics(*layout, b, xi, rp, idx, options.threads);
    for (std::size_t q = 0; q < densities.size(); ++q)
      batch.densities[q].fields.push_back(push_forward_density(densities[q], ch, options.interpolation));
    for (std::size_t q = 0; q < scalars.size(); ++q)
      batch.scalars[q].fields.push_back(pull_back(scalars[q], ch, options.interpolation));
  }
  return batch;
}

FieldSequence solve_rce_lagrangian(const GridField& rho0, const DriftField& b, const VectorFieldSet& xi,
                                   const RoughPath& rp, std::span<const std::size_t> output_indices,
                                   const TransportOptions& options) {
  return std::move(solve_lagrangian({&rho0, 1}, {}, b, xi, rp, output_indices, options).densities.front());
}

FieldSequence solve_rte_lagrangian(const GridField& f0, const DriftField& b, const VectorFieldSet& xi,
                                   const RoughPath& rp, std::span<const std::size_t> output_indices,
                                   const TransportOptions& options) {
  return std::move(solve_lagrangian({}, {&f0, 1}, b, xi, rp, output_indices, options).scalars.front());
}

std::vector<std::size_t> even_output_indices(const TimeGrid& grid, std::size_t count) {
  if (count == 0) throw ParameterError("output count must be positive");
  std::vector<std::size_t> out;
  const std::size_t n = grid.steps();
  for (std::size_t k = 1; k <= count; ++k) {
    const auto idx = static_cast<std::size_t>(std::llround(static_cast<double>(k * n) / static_cast<double>(count)));
    if (out.empty() || idx > out.back()) out.push_back(idx);
  }
  return out;
}

SeriesReport duality_check(const FieldSequence& rho, const FieldSequence& f) {
  if (rho.indices != f.indices) throw DimensionError("duality check needs matching output times");
  SeriesReport r;
  for (std::size_t q = 0; q < rho.fields.size(); ++q) r.values.push_back(pairing(rho.fields[q], f.fields[q]));
  if (!r.values.empty()) r.max_relative_drift = max_relative_drift(r.values);
  return r;
}

MassReport mass_conservation_check(const FieldSequence& rho) {
  MassReport r;
  double worst_edge = 0.0, total = 0.0;
  for (const auto& field : rho.fields) {
    r.mass.values.push_back(integral(field));
    worst_edge = std::max(worst_edge, boundary_mass(field));
    total = std::max(total, norms(field).l1);
  }
  if (!r.mass.values.empty()) r.mass.max_relative_drift = max_relative_drift(r.mass.values);
  if (worst_edge > 1e-6 * total)
    r.warning = "boundary mass " + std::to_string(worst_edge) + " exceeds 1e-6 of the total " + std::to_string(total);
  return r;
}

double renormalization_check(const GridField& f0, const std::function<double(double)>& beta, const DriftField& b,
                             const VectorFieldSet& xi, const RoughPath& rp,
                             std::span<const std::size_t> output_indices, const TransportOptions& options) {
  GridField bf0 = f0;
  for (double& v : bf0.values()) v = beta(v);
  const GridField inputs[2] = {f0, bf0};
  const auto batch = solve_lagrangian({}, inputs, b, xi, rp, output_indices, options);
  double worst = 0.0;
  for (std::size_t q = 0; q < output_indices.size(); ++q) {
    auto lhs = batch.scalars[0].fields[q].values();
    auto rhs = batch.scalars[1].fields[q].values();
    for (std::size_t c = 0; c < lhs.size(); ++c) worst = std::max(worst, std::abs(beta(lhs[c]) - rhs[c]));
  }
  return worst;
}

StabilityReport stability_check(const GridField& rho1_0, const GridField& rho2_0, const FieldSequence& rho1,
                                const FieldSequence& rho2) {
  if (rho1.indices != rho2.indices) throw DimensionError("stability check needs matching output times");
  StabilityReport r;
  r.initial_distance = l2_distance(rho1_0, rho2_0);
  for (std::size_t q = 0; q < rho1.fields.size(); ++q)
    r.sup_distance = std::max(r.sup_distance, l2_distance(rho1.fields[q], rho2.fields[q]));
  r.ratio = r.initial_distance > 0.0 ? r.sup_distance / r.initial_distance
                                     : (r.sup_distance > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return r;
}

// ---------------------------------------------------------------------------
// Test functions and drivers

BumpFunction::BumpFunction(std::vector<double> center, double radius, std::vector<double> slope)
    : center_(std::move(center)), radius_(radius), slope_(std::move(slope)) {
  if (center_.empty()) throw DimensionError("bump centre must be nonempty");
  if (!(radius_ > 0.0) || !std::isfinite(radius_)) throw ParameterError("bump radius must be positive");
  if (slope_.empty()) slope_.assign(center_.size(), 0.0);
  if (slope_.size() != center_.size()) throw DimensionError("bump slope has the wrong dimension");
}

double BumpFunction::value(std::span<const double> x) const {
  double q = 0.0, poly = 1.0;
  for (std::size_t c = 0; c < dim(); ++c) {
    const double z = x[c] - center_[c];
    q += z * z;
    poly += slope_[c] * z;
  }
  q /= radius_ * radius_;
  if (q >= 1.0) return 0.0;
  return poly * std::exp(-1.0 / (1.0 - q));
}

void BumpFunction::gradient(std::span<const double> x, std::span<double> out) const {
  const std::size_t d = dim();
  double q = 0.0, poly = 1.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double z = x[c] - center_[c];
    q += z * z;
    poly += slope_[c] * z;
  }
  const double r2 = radius_ * radius_;
  q /= r2;
  if (q >= 1.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double psi = std::exp(-1.0 / (1.0 - q));
  const double dpsi = -psi / ((1.0 - q) * (1.0 - q));  // d psi / d q
  for (std::size_t c = 0; c < d; ++c) {
    const double z = x[c] - center_[c];
    out[c] = slope_[c] * psi + poly * dpsi * 2.0 * z / r2;
  }
}

void BumpFunction::hessian(std::span<const double> x, std::span<double> out) const {
  const std::size_t d = dim();
  double q = 0.0, poly = 1.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double z = x[c] - center_[c];
    q += z * z;
    poly += slope_[c] * z;
  }
  const double r2 = radius_ * radius_;
  q /= r2;
  if (q >= 1.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double omq = 1.0 - q;
  const double psi = std::exp(-1.0 / omq);
  const double dpsi = -psi / (omq * omq);
  const double d2psi = psi * (2.0 * q - 1.0) / (omq * omq * omq * omq);
  for (std::size_t a = 0; a < d; ++a) {
    const double za = x[a] - center_[a];
    for (std::size_t c = 0; c < d; ++c) {
      const double zc = x[c] - center_[c];
      const double qa = 2.0 * za / r2, qc = 2.0 * zc / r2;
      double h = poly * (d2psi * qa * qc + (a == c ? dpsi * 2.0 / r2 : 0.0));
      h += slope_[a] * dpsi * qc + slope_[c] * dpsi * qa;
      out[a * d + c] = h;
    }
  }
}

double test_function_gradient_error(const TestFunctionSet& tests, std::span<const double> probes) {
  double worst = 0.0;
  for (const auto& phi : tests) {
    const std::size_t d = phi.dim();
    std::vector<double> g(d), x(d);
    const double h = 1e-6 * phi.radius();
    for (std::size_t p = 0; p + d <= probes.size(); p += d) {
      std::copy_n(probes.begin() + static_cast<std::ptrdiff_t>(p), d, x.begin());
      phi.gradient(x, g);
      double scale = 0.0;
      for (double v : g) scale = std::max(scale, std::abs(v));
      for (std::size_t c = 0; c < d; ++c) {
        const double keep = x[c];
        x[c] = keep + h;
        const double fp = phi.value(x);
        x[c] = keep - h;
        const double fm = phi.value(x);
        x[c] = keep;
        const double fd = (fp - fm) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - g[c]) / std::max(scale, 1e-300 + 1.0 / phi.radius()));
      }
    }
  }
  return worst;
}

DriverPair::DriverPair(const VectorFieldSet& xi, const RoughPath& rp) : xi_(xi), rp_(rp) {
  if (xi.count() != rp.dim()) throw DimensionError("driver: field count differs from the path dimension");
}

void DriverPair::first_order_terms(const BumpFunction& phi, std::span<const double> x, std::span<double> out) const {
  const std::size_t d = xi_.dim(), m = xi_.count();
  std::vector<double> grad(d), f(d);
  phi.gradient(x, grad);
  for (std::size_t k = 0; k < m; ++k) {
    xi_.eval(k, x, f);
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += f[c] * grad[c];
    out[k] = s;
  }
}

void DriverPair::second_order_terms(const BumpFunction& phi, std::span<const double> x,
                                    std::span<double> out) const {
  // xi_j . grad(xi_k . grad phi) = grad phi . (D xi_k xi_j) + xi_j^T H xi_k
  const std::size_t d = xi_.dim(), m = xi_.count();
  std::vector<double> grad(d), hess(d * d), fields(m * d), jac(d * d);
  phi.gradient(x, grad);
  phi.hessian(x, hess);
  for (std::size_t k = 0; k < m; ++k) xi_.eval(k, x, {fields.data() + k * d, d});
  for (std::size_t k = 0; k < m; ++k) {
    xi_.jacobian(k, x, jac);
    const double* fk = fields.data() + k * d;
    for (std::size_t j = 0; j < m; ++j) {
      const double* fj = fields.data() + j * d;
      double s = 0.0;
      for (std::size_t r = 0; r < d; ++r) {
        double dxi = 0.0, hx = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          dxi += jac[r * d + c] * fj[c];
          hx += hess[r * d + c] * fk[c];
        }
        s += grad[r] * dxi + fj[r] * hx;
      }
      out[j * m + k] = s;
    }
  }
}

double DriverPair::first(const BumpFunction& phi, std::span<const double> x, std::size_t s, std::size_t t) const {
  const std::size_t m = xi_.count();
  std::vector<double> terms(m), dz(m);
  first_order_terms(phi, x, terms);
  rp_.increment(s, t, dz);
  double v = 0.0;
  for (std::size_t k = 0; k < m; ++k) v += terms[k] * dz[k];
  return v;
}

double DriverPair::second(const BumpFunction& phi, std::span<const double> x, std::size_t s, std::size_t t) const {
  const std::size_t m = xi_.count();
  std::vector<double> terms(m * m), zz(m * m);
  second_order_terms(phi, x, terms);
  rp_.second_level(s, t, zz);
  double v = 0.0;
  for (std::size_t e = 0; e < m * m; ++e) v += terms[e] * zz[e];
  return v;
}

double driver_chen_defect(const DriverPair& driver, const BumpFunction& phi, std::span<const double> x,
                          std::size_t s, std::size_t u, std::size_t t) {
  if (!(s <= u && u <= t)) throw ParameterError("driver Chen check needs s <= u <= t");
  const std::size_t m = driver.fields().count();
  std::vector<double> terms(m * m), zsu(m), zut(m);
  driver.second_order_terms(phi, x, terms);
  driver.path().increment(s, u, zsu);
  driver.path().increment(u, t, zut);
  double composed = 0.0;
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < m; ++k) composed += terms[j * m + k] * zsu[j] * zut[k];
  const double delta = driver.second(phi, x, s, t) - driver.second(phi, x, s, u) - driver.second(phi, x, u, t);
  return std::abs(delta - composed);
}

std::pair<std::vector<double>, std::vector<double>> particles_from_density(const GridField& rho) {
  std::vector<double> seeds, weights;
  for (std::size_t j = 0; j < rho.ny(); ++j)
    for (std::size_t i = 0; i < rho.nx(); ++i) {
      if (rho(i, j) == 0.0) continue;
      seeds.push_back(rho.cell_x(i));
      seeds.push_back(rho.cell_y(j));
      weights.push_back(rho(i, j) * rho.cell_area());
    }
  return {seeds, weights};
}

FlowMap frozen_flow(std::span<const double> seeds, std::size_t dim, const TimeGrid& grid) {
  FlowMap flow{grid, dim, {seeds.begin(), seeds.end()}, {}, {}, {}, FlowDirection::Forward};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    flow.recorded.push_back(i);
    flow.positions.insert(flow.positions.end(), seeds.begin(), seeds.end());
  }
  flow.failures.assign(flow.seed_count(), std::nullopt);
  return flow;
}

RemainderReport rpde_remainder_diagnostic(const ParticleDensity& rho, const DriftField& b, const DriverPair& driver,
                                          const TestFunctionSet& tests, const RemainderOptions& options) {
  const FlowMap& flow = rho.flow;
  const RoughPath& rp = driver.path();
  const std::size_t d = flow.dim, m = driver.fields().count(), n = rp.size(), count = flow.seed_count();
  if (!(flow.grid == rp.grid())) throw DimensionError("particle flow and driver use different grids");
  if (flow.recorded.size() != n) throw ParameterError("remainder diagnostic needs every grid index recorded");
  if (rho.weights.size() != count) throw DimensionError("one weight per particle required");
  if (b.dim() != d || driver.fields().dim() != d) throw DimensionError("drift, fields and particles differ in dimension");

  // Window sizes in steps whose mean length falls in [min_window, max_window].
  std::vector<std::size_t> sizes;
  const double mean_step = rp.grid().horizon() / static_cast<double>(rp.grid().steps());
  for (std::size_t len = 1; len <= rp.grid().steps(); len *= 2) {
    const double w = mean_step * static_cast<double>(len);
    if (w >= options.min_window * (1.0 - 1e-9) && w <= options.max_window * (1.0 + 1e-9)) sizes.push_back(len);
  }
  if (sizes.size() < 2) throw ParameterError("fewer than two dyadic windows fit the requested range");

  RemainderReport report;
  for (std::size_t len : sizes) report.window_lengths.push_back(mean_step * static_cast<double>(len));

  std::vector<double> pair(n), drift(n), a(n * m), bb(n * m * m);
  std::vector<double> grad(d), bx(d), t1(m), t2(m * m), dz(m), zz(m * m);
  for (const auto& phi : tests) {
    if (phi.dim() != d) throw DimensionError("test function dimension differs from the particles");
    std::fill(drift.begin(), drift.end(), 0.0);
    std::fill(a.begin(), a.end(), 0.0);
    std::fill(bb.begin(), bb.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double p = 0.0;
      const double dt = i + 1 < n ? rp.grid()[i + 1] - rp.grid()[i] : 0.0;
      for (std::size_t q = 0; q < count; ++q) {
        if (flow.failures[q]) continue;
        auto x = flow.position(i, q);
        const double w = rho.weights[q];
        p += w * phi.value(x);
        if (i + 1 < n) {
          b.eval(rp.grid()[i], x, bx);
          phi.gradient(x, grad);
          double s = 0.0;
          for (std::size_t c = 0; c < d; ++c) s += bx[c] * grad[c];
          drift[i] += w * s * dt;
        }
        driver.first_order_terms(phi, x, t1);
        driver.second_order_terms(phi, x, t2);
        for (std::size_t k = 0; k < m; ++k) a[i * m + k] += w * t1[k];
        for (std::size_t e = 0; e < m * m; ++e) bb[i * m * m + e] += w * t2[e];
      }
      pair[i] = p;
    }

    std::vector<double> maxima;
    double ratio = 0.0;
    for (std::size_t si = 0; si < sizes.size(); ++si) {
      const std::size_t len = sizes[si];
      double worst = 0.0, level_one = 0.0, sq = 0.0;
      std::size_t windows = 0;
      for (std::size_t s = 0; s + len < n; s += len) {
        const std::size_t t = s + len;
        double dr = 0.0;
        for (std::size_t k = s; k < t; ++k) dr += drift[k];
        rp.increment(s, t, dz);
        rp.second_level(s, t, zz);
        double first = 0.0, second = 0.0;
        for (std::size_t k = 0; k < m; ++k) first += a[s * m + k] * dz[k];
        for (std::size_t e = 0; e < m * m; ++e) second += bb[s * m * m + e] * zz[e];
        const double rem = (pair[t] - pair[s]) - dr - first - second;
        worst = std::max(worst, std::abs(rem));
        sq += rem * rem;
        ++windows;
        level_one = std::max(level_one, std::abs(dr) + std::abs(first));
      }
      maxima.push_back(options.statistic == RemainderStatistic::Max ? worst
                                                                     : std::sqrt(sq / static_cast<double>(windows)));
      if (si == 0) ratio = level_one > 0.0 ? worst / level_one : 0.0;
    }
    const bool vanishes = std::all_of(maxima.begin(), maxima.end(), [](double v) { return v == 0.0; });
    const double kappa =
        vanishes ? std::numeric_limits<double>::infinity() : fit_loglog_slope(report.window_lengths, maxima);
    report.remainders.push_back(maxima);
    report.exponents.push_back(kappa);
    report.level_one_ratio.push_back(ratio);
    if (!(kappa >= options.exponent_threshold) || ratio > options.level_one_ratio) report.flagged = true;
  }
  return report;
}

}  // namespace roughflow
