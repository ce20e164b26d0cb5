#include "roughflow/rde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "roughflow/errors.hpp"
#include "roughflow/parallel.hpp"

namespace roughflow {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void check_compatible(const DriftField& b, const VectorFieldSet& xi, const RoughPath& rp) {
  if (b.dim() != xi.dim())
    throw DimensionError("drift dimension " + std::to_string(b.dim()) + " differs from noise field dimension " +
                         std::to_string(xi.dim()));
  if (xi.count() != rp.dim())
    throw DimensionError(std::to_string(xi.count()) + " noise fields for a rough path of dimension " +
                         std::to_string(rp.dim()));
}

}  // namespace

// ---------------------------------------------------------------------------
// DavieStepper

DavieStepper::DavieStepper(const DriftField& b, const VectorFieldSet& xi, const RoughPath& rp)
    : b_(b), xi_(xi), rp_(rp), d_(xi.dim()), m_(xi.count()) {
  check_compatible(b, xi, rp);
  drift_.resize(d_);
  noise_.resize(d_);
  second_.resize(d_);
  field_.resize(m_ * d_);
  scratch_.resize(d_ + d_ * d_ + m_ * m_ + m_);
  before_.resize(d_);
}

void DavieStepper::step(std::span<double> y, std::size_t k) {
  const double t = rp_.grid()[k];
  const double dt = rp_.grid()[k + 1] - t;
  b_.eval(t, y, drift_);
  for (double& v : drift_) v *= dt;
  apply(y, drift_, k);
}

void DavieStepper::step_with_drift_increment(std::span<double> y, std::span<const double> drift_increment,
                                             std::size_t k) {
  apply(y, drift_increment, k);
}

void DavieStepper::apply(std::span<double> y, std::span<const double> drift, std::size_t k) {
  const std::size_t d = d_, m = m_;
  double* mixed = scratch_.data();
  double* jac = mixed + d;
  double* zz = jac + d * d;
  double* dz = zz + m * m;

  auto z0 = rp_.point(k), z1 = rp_.point(k + 1);
  for (std::size_t c = 0; c < m; ++c) dz[c] = z1[c] - z0[c];
  if (rp_.has_dense_second_level()) {
    rp_.second_level(k, k + 1, {zz, m * m});
  } else {
    auto adj = rp_.adjacent_second(k);
    std::copy(adj.begin(), adj.end(), zz);
  }

  std::fill(noise_.begin(), noise_.end(), 0.0);
  std::fill(second_.begin(), second_.end(), 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double* f = field_.data() + j * d;
    xi_.eval(j, y, {f, d});
    for (std::size_t r = 0; r < d; ++r) noise_[r] += f[r] * dz[j];
  }
  // Xi(y) ZZ = sum_k D xi_k(y) [sum_j xi_j(y) ZZ^{jk}]
  for (std::size_t kk = 0; kk < m; ++kk) {
    bool any = false;
    std::fill(mixed, mixed + d, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const double w = zz[j * m + kk];
      if (w == 0.0) continue;
      any = true;
      for (std::size_t r = 0; r < d; ++r) mixed[r] += field_[j * d + r] * w;
    }
    if (!any) continue;
    xi_.jacobian(kk, y, {jac, d * d});
    for (std::size_t r = 0; r < d; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += jac[r * d + c] * mixed[c];
      second_[r] += s;
    }
  }

  std::copy(y.begin(), y.end(), before_.begin());
  double rem2 = 0.0, mag2 = 0.0;
  for (std::size_t r = 0; r < d; ++r) {
    const double inc = drift[r] + noise_[r] + second_[r];
    y[r] = before_[r] + inc;
    const double e = (y[r] - before_[r]) - inc;
    rem2 += e * e;
    mag2 += y[r] * y[r];
  }
  last_remainder_ = std::sqrt(rem2);
  if (!std::isfinite(mag2) || std::sqrt(mag2) > kDivergenceThreshold)
    throw DivergenceError("trajectory diverged at step " + std::to_string(k) + " (t = " +
                              std::to_string(rp_.grid()[k + 1]) + ")",
                          k);
}

std::vector<double> davie_step(std::span<const double> y, const DriftField& b, const VectorFieldSet& xi,
                               const RoughPath& rp, std::size_t k) {
  if (k + 1 >= rp.size()) throw ParameterError("davie_step: step index out of range");
  if (y.size() != xi.dim()) throw DimensionError("davie_step: state has wrong dimension");
  DavieStepper stepper(b, xi, rp);
  std::vector<double> out(y.begin(), y.end());
  stepper.step(out, k);
  return out;
}

Trajectory solve_rde(std::span<const double> y0, const DriftField& b, const VectorFieldSet& xi,
                     const RoughPath& rp) {
  if (y0.size() != xi.dim()) throw DimensionError("solve_rde: initial condition has wrong dimension");
  DavieStepper stepper(b, xi, rp);
  const std::size_t d = xi.dim(), n = rp.size();
  Trajectory traj{rp.grid(), d, std::vector<double>(n * d), std::vector<double>(n - 1)};
  std::vector<double> y(y0.begin(), y0.end());
  std::copy(y.begin(), y.end(), traj.states.begin());
  for (std::size_t k = 0; k + 1 < n; ++k) {
    stepper.step(y, k);
    traj.remainder_norms[k] = stepper.last_remainder();
    std::copy(y.begin(), y.end(), traj.states.begin() + static_cast<std::ptrdiff_t>((k + 1) * d));
  }
  return traj;
}

RemainderFit fit_remainder_exponent(const Trajectory& traj, const DriftField& b, const VectorFieldSet& xi,
                                    const RoughPath& rp) {
  check_compatible(b, xi, rp);
  if (!(traj.grid == rp.grid())) throw DimensionError("trajectory and rough path grids differ");
  const std::size_t d = xi.dim(), m = xi.count(), steps = rp.grid().steps();
  RemainderFit fit;
  std::vector<double> drift(d), bt(d), noise(d), second(d), field(d), dz(m), zz(m * m), rem(d);
  std::vector<double> scratch(d * (m + d + 1));
  for (std::size_t len = 2; 2 * len <= steps; len *= 2) {
    double worst = 0.0, longest = 0.0;
    for (std::size_t s = 0; s + len <= steps; s += len) {
      const std::size_t t = s + len;
      std::fill(drift.begin(), drift.end(), 0.0);
      for (std::size_t k = s; k < t; ++k) {
        const double dt = rp.grid()[k + 1] - rp.grid()[k];
        b.eval(rp.grid()[k], traj.state(k), bt);
        for (std::size_t r = 0; r < d; ++r) drift[r] += bt[r] * dt;
      }
      rp.increment(s, t, dz);
      rp.second_level(s, t, zz);
      auto ys = traj.state(s);
      std::fill(noise.begin(), noise.end(), 0.0);
      for (std::size_t j = 0; j < m; ++j) {
        xi.eval(j, ys, field);
        for (std::size_t r = 0; r < d; ++r) noise[r] += field[r] * dz[j];
      }
      xi.second_order(ys, zz, second, scratch);
      auto yt = traj.state(t);
      for (std::size_t r = 0; r < d; ++r) rem[r] = yt[r] - ys[r] - drift[r] - noise[r] - second[r];
      worst = std::max(worst, norm2(rem));
      longest = std::max(longest, rp.grid()[t] - rp.grid()[s]);
    }
    fit.window_lengths.push_back(longest);
    fit.max_remainders.push_back(worst);
  }
  fit.exponent = fit_loglog_slope(fit.window_lengths, fit.max_remainders);
  return fit;
}

// ---------------------------------------------------------------------------
// Flows

std::size_t FlowMap::record_of(std::size_t grid_index) const {
  auto it = std::lower_bound(recorded.begin(), recorded.end(), grid_index);
  if (it == recorded.end() || *it != grid_index)
    throw ParameterError("grid index " + std::to_string(grid_index) + " was not recorded");
  return static_cast<std::size_t>(it - recorded.begin());
}

Trajectory FlowMap::trajectory(std::size_t seed) const {
  std::vector<double> times;
  for (std::size_t r : recorded) times.push_back(grid[r]);
  Trajectory traj{TimeGrid(std::move(times)), dim, {}, {}};
  for (std::size_t r = 0; r < recorded.size(); ++r) {
    auto p = position(r, seed);
    traj.states.insert(traj.states.end(), p.begin(), p.end());
  }
  return traj;
}

std::vector<double> FlowMap::terminal() const {
  const std::size_t last = recorded.size() - 1;
  return {positions.begin() + static_cast<std::ptrdiff_t>(last * seed_count() * dim),
          positions.begin() + static_cast<std::ptrdiff_t>((last + 1) * seed_count() * dim)};
}

FlowMap solve_flow(std::span<const double> seeds, const DriftField& b, const VectorFieldSet& xi,
                   const RoughPath& rp, const FlowOptions& options) {
  check_compatible(b, xi, rp);
  const std::size_t d = xi.dim(), n = rp.size();
  if (seeds.empty() || seeds.size() % d != 0) throw DimensionError("solve_flow: seeds must be a nonempty d-row array");
  const std::size_t count = seeds.size() / d;

  FlowMap flow{rp.grid(), d, std::vector<double>(seeds.begin(), seeds.end()), options.recorded, {}, {},
               FlowDirection::Forward};
  if (flow.recorded.empty())
    for (std::size_t i = 0; i < n; ++i) flow.recorded.push_back(i);
  for (std::size_t r = 0; r < flow.recorded.size(); ++r)
    if (flow.recorded[r] >= n || (r > 0 && flow.recorded[r] <= flow.recorded[r - 1]))
      throw ParameterError("recorded indices must be increasing grid indices");
  flow.positions.assign(flow.recorded.size() * count * d, std::numeric_limits<double>::quiet_NaN());
  flow.failures.assign(count, std::nullopt);

  parallel_chunks(count, options.threads, [&](std::size_t begin, std::size_t end) {
    DavieStepper stepper(b, xi, rp);
    std::vector<double> state(seeds.begin() + static_cast<std::ptrdiff_t>(begin * d),
                              seeds.begin() + static_cast<std::ptrdiff_t>(end * d));
    std::vector<char> alive(end - begin, 1);
    std::size_t next_record = 0;
    auto store = [&](std::size_t grid_index) {
      if (next_record >= flow.recorded.size() || flow.recorded[next_record] != grid_index) return;
      for (std::size_t s = begin; s < end; ++s)
        if (alive[s - begin])
          std::copy_n(state.begin() + static_cast<std::ptrdiff_t>((s - begin) * d), d,
                      flow.positions.begin() + static_cast<std::ptrdiff_t>((next_record * count + s) * d));
      ++next_record;
    };
    store(0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      for (std::size_t s = begin; s < end; ++s) {
        if (!alive[s - begin]) continue;
        try {
          stepper.step({state.data() + (s - begin) * d, d}, k);
        } catch (const DivergenceError& e) {
          alive[s - begin] = 0;
          flow.failures[s] = "seed " + std::to_string(s) + ": " + e.what();
        }
      }
      store(k + 1);
    }
  });
  return flow;
}

std::vector<double> inverse_flow(std::span<const double> targets, const DriftField& b, const VectorFieldSet& xi,
                                 const RoughPath& rp, std::size_t t_index, unsigned threads) {
  if (t_index >= rp.size()) throw ParameterError("inverse_flow: time index out of range");
  if (t_index == 0) return {targets.begin(), targets.end()};
  const RoughPath reversed = time_reverse(restrict_path(rp, {0, t_index}));
  const DriftField reversed_drift = b.reversed(rp.grid().front(), rp.grid()[t_index]);
  FlowOptions options{{reversed.size() - 1}, threads};
  FlowMap back = solve_flow(targets, reversed_drift, xi, reversed, options);
  back.direction = FlowDirection::Inverse;
  return back.terminal();
}

std::vector<double> jacobian_stencil(std::span<const double> x, double fd_step) {
  if (!(fd_step > 0.0)) throw ParameterError("finite-difference step must be positive");
  const std::size_t d = x.size();
  std::vector<double> seeds;
  seeds.reserve(2 * d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (double sign : {1.0, -1.0}) {
      for (std::size_t c = 0; c < d; ++c) seeds.push_back(x[c] + (c == i ? sign * fd_step : 0.0));
    }
  return seeds;
}

double jacobian_determinant(const FlowMap& flow, std::size_t t_index, std::span<const double> x, double fd_step) {
  const std::size_t d = flow.dim;
  if (x.size() != d) throw DimensionError("jacobian_determinant: point has wrong dimension");
  const auto stencil = jacobian_stencil(x, fd_step);
  std::vector<std::size_t> index(2 * d);
  const double tol = 1e-12 * (1.0 + norm2(x));
  for (std::size_t s = 0; s < 2 * d; ++s) {
    bool found = false;
    for (std::size_t q = 0; q < flow.seed_count() && !found; ++q) {
      double dist = 0.0;
      for (std::size_t c = 0; c < d; ++c) dist = std::max(dist, std::abs(flow.seeds[q * d + c] - stencil[s * d + c]));
      if (dist <= tol) {
        index[s] = q;
        found = true;
      }
    }
    if (!found) throw ParameterError("jacobian_determinant: flow lacks the neighbouring seeds of the stencil");
  }
  if (t_index == flow.recorded.front() && flow.recorded.front() == 0) return 1.0;
  const std::size_t r = flow.record_of(t_index);
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    auto plus = flow.position(r, index[2 * i]);
    auto minus = flow.position(r, index[2 * i + 1]);
    for (std::size_t c = 0; c < d; ++c)
      jac(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = (plus[c] - minus[c]) / (2.0 * fd_step);
  }
  return jac.determinant();
}

std::vector<double> default_constant_ladder() {
  return {0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 7.5, 10.0, 15.0, 20.0, 30.0, 50.0, 75.0, 100.0, 200.0, 500.0, 1000.0};
}

FlowModulusReport flow_modulus_diagnostic(const FlowMap& flow, const OsgoodModulus& h,
                                          const std::function<double(double)>& g_integral,
                                          std::span<const double> ladder_in) {
  if (flow.seed_count() < 2) throw ParameterError("flow_modulus_diagnostic needs at least two seeds");
  const std::vector<double> ladder =
      ladder_in.empty() ? default_constant_ladder() : std::vector<double>(ladder_in.begin(), ladder_in.end());
  const std::size_t d = flow.dim, count = flow.seed_count(), records = flow.recorded.size();

  // Checked records: at most 64, always including the last.
  std::vector<std::size_t> checked;
  const std::size_t stride = std::max<std::size_t>(1, records / 64);
  for (std::size_t r = 0; r < records; r += stride) checked.push_back(r);
  if (checked.back() != records - 1) checked.push_back(records - 1);

  FlowModulusReport report;
  std::vector<double> diff(d), running(records);
  for (std::size_t a = 0; a < count; ++a) {
    if (flow.failures[a]) continue;
    for (std::size_t b = a + 1; b < count; ++b) {
      if (flow.failures[b]) continue;
      for (std::size_t c = 0; c < d; ++c) diff[c] = flow.seeds[a * d + c] - flow.seeds[b * d + c];
      const double sep0 = norm2(diff);
      double sup = 0.0;
      for (std::size_t r = 0; r < records; ++r) {
        auto pa = flow.position(r, a), pb = flow.position(r, b);
        for (std::size_t c = 0; c < d; ++c) diff[c] = pa[c] - pb[c];
        sup = std::max(sup, norm2(diff));
        running[r] = sup;
      }
      auto first_failure = [&](double constant) -> std::optional<std::pair<std::size_t, double>> {
        for (std::size_t r : checked) {
          const double t = flow.grid[flow.recorded[r]];
          const double bound = bihari_bound(h, constant * sep0, constant * g_integral(t));
          if (running[r] > bound * (1.0 + 1e-12) + 1e-300) return std::make_pair(r, bound);
        }
        return std::nullopt;
      };
      std::size_t lo = 0, hi = ladder.size();  // smallest passing index in [lo, hi]
      while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        (first_failure(ladder[mid]) ? lo = mid + 1 : hi = mid);
      }
      if (lo == ladder.size()) {
        auto fail = first_failure(ladder.back());
        report.violations.push_back({a, b, flow.recorded[fail->first], running[fail->first], fail->second});
        report.fitted_constant = ladder.back();
      } else {
        report.fitted_constant = std::max(report.fitted_constant, ladder[lo]);
      }
    }
  }
  report.bound_holds = report.violations.empty();
  return report;
}

double cocycle_check(std::span<const double> seeds, const DriftField& b, const VectorFieldSet& xi,
                     const RoughPath& rp, std::size_t u) {
  if (!b.autonomous()) throw ParameterError("cocycle_check requires an autonomous drift");
  const std::size_t n = rp.size();
  if (u >= n) throw ParameterError("cocycle split index out of range");
  const auto direct = solve_flow(seeds, b, xi, rp, {{n - 1}, 1}).terminal();
  std::vector<double> mid(seeds.begin(), seeds.end());
  if (u > 0) mid = solve_flow(seeds, b, xi, restrict_path(rp, {0, u}), {{u}, 1}).terminal();
  std::vector<double> composed = mid;
  if (u < n - 1) {
    const RoughPath shifted = translate(rp, u);
    composed = solve_flow(mid, b, xi, shifted, {{shifted.size() - 1}, 1}).terminal();
  }
  double worst = 0.0;
  for (std::size_t e = 0; e < direct.size(); ++e) worst = std::max(worst, std::abs(direct[e] - composed[e]));
  return worst;
}

}  // namespace roughflow
