#include "roughflow/vector_fields.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "roughflow/errors.hpp"

namespace roughflow {

namespace {

constexpr double kJacobianStep = 1e-5;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

// ---------------------------------------------------------------------------
// VectorFieldSet

VectorFieldSet::VectorFieldSet(std::string name, std::size_t dim, std::size_t count, Field field, Field jacobian,
                               Divergence divergence, bool divergence_free)
    : name_(std::move(name)),
      dim_(dim),
      count_(count),
      field_(std::move(field)),
      jacobian_(std::move(jacobian)),
      divergence_(std::move(divergence)),
      divergence_free_(divergence_free) {
  if (dim_ == 0) throw DimensionError("vector fields need a positive dimension");
  if (!field_) throw ParameterError("vector field set '" + name_ + "' has no evaluator");
}

void VectorFieldSet::jacobian(std::size_t k, std::span<const double> x, std::span<double> out) const {
  if (jacobian_) {
    jacobian_(k, x, out);
    return;
  }
  std::vector<double> xp(x.begin(), x.end()), fp(dim_), fm(dim_);
  for (std::size_t c = 0; c < dim_; ++c) {
    const double x0 = xp[c];
    xp[c] = x0 + kJacobianStep;
    field_(k, xp, fp);
    xp[c] = x0 - kJacobianStep;
    field_(k, xp, fm);
    xp[c] = x0;
    for (std::size_t r = 0; r < dim_; ++r) out[r * dim_ + c] = (fp[r] - fm[r]) / (2.0 * kJacobianStep);
  }
}

double VectorFieldSet::divergence(std::size_t k, std::span<const double> x) const {
  if (divergence_) return divergence_(k, x);
  std::vector<double> jac(dim_ * dim_);
  jacobian(k, x, jac);
  double trace = 0.0;
  for (std::size_t r = 0; r < dim_; ++r) trace += jac[r * dim_ + r];
  return trace;
}

void VectorFieldSet::second_order(std::span<const double> x, std::span<const double> zz, std::span<double> out,
                                  std::span<double> scratch) const {
  const std::size_t d = dim_, m = count_;
  std::fill(out.begin(), out.end(), 0.0);
  double* values = scratch.data();      // m x d
  double* mixed = values + m * d;       // d
  double* jac = mixed + d;              // d x d
  for (std::size_t j = 0; j < m; ++j) field_(j, x, {values + j * d, d});
  for (std::size_t k = 0; k < m; ++k) {
    bool any = false;
    std::fill(mixed, mixed + d, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const double w = zz[j * m + k];
      if (w == 0.0) continue;
      any = true;
      for (std::size_t r = 0; r < d; ++r) mixed[r] += values[j * d + r] * w;
    }
    if (!any) continue;
    jacobian(k, x, {jac, d * d});
    for (std::size_t r = 0; r < d; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += jac[r * d + c] * mixed[c];
      out[r] += s;
    }
  }
}

VectorFieldSet VectorFieldSet::constant(std::size_t dim, std::size_t count, std::vector<double> sigma) {
  if (sigma.size() != dim * count) throw DimensionError("constant noise matrix must be d x m");
  auto s = std::make_shared<const std::vector<double>>(std::move(sigma));
  return VectorFieldSet(
      "constant", dim, count,
      [s, dim, count](std::size_t k, std::span<const double>, std::span<double> out) {
        for (std::size_t r = 0; r < dim; ++r) out[r] = (*s)[r * count + k];
      },
      [](std::size_t, std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); },
      [](std::size_t, std::span<const double>) { return 0.0; }, true);
}

VectorFieldSet VectorFieldSet::linear(std::size_t dim, std::vector<std::vector<double>> matrices) {
  for (const auto& a : matrices)
    if (a.size() != dim * dim) throw DimensionError("linear noise matrices must be d x d");
  bool div_free = true;
  for (const auto& a : matrices) {
    double tr = 0.0;
    for (std::size_t r = 0; r < dim; ++r) tr += a[r * dim + r];
    div_free = div_free && tr == 0.0;
  }
  auto mats = std::make_shared<const std::vector<std::vector<double>>>(std::move(matrices));
  const std::size_t count = mats->size();
  return VectorFieldSet(
      "linear", dim, count,
      [mats, dim](std::size_t k, std::span<const double> x, std::span<double> out) {
        const auto& a = (*mats)[k];
        for (std::size_t r = 0; r < dim; ++r) {
          double s = 0.0;
          for (std::size_t c = 0; c < dim; ++c) s += a[r * dim + c] * x[c];
          out[r] = s;
        }
      },
      [mats](std::size_t k, std::span<const double>, std::span<double> out) {
        std::copy((*mats)[k].begin(), (*mats)[k].end(), out.begin());
      },
      [mats, dim](std::size_t k, std::span<const double>) {
        double tr = 0.0;
        for (std::size_t r = 0; r < dim; ++r) tr += (*mats)[k][r * dim + r];
        return tr;
      },
      div_free);
}

VectorFieldSet VectorFieldSet::zero(std::size_t dim, std::size_t count) {
  auto zeros = [](std::size_t, std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  return VectorFieldSet("zero", dim, count, zeros, zeros, [](std::size_t, std::span<const double>) { return 0.0; },
                        true);
}

VectorFieldSet VectorFieldSet::shear2d(double amplitude, double wavenumber) {
  const double a = amplitude, w = wavenumber;
  return VectorFieldSet(
      "shear", 2, 2,
      [a, w](std::size_t k, std::span<const double> x, std::span<double> out) {
        if (k == 0) {
          out[0] = a * std::sin(w * x[1]);
          out[1] = 0.0;
        } else {
          out[0] = 0.0;
          out[1] = a * std::sin(w * x[0]);
        }
      },
      [a, w](std::size_t k, std::span<const double> x, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        if (k == 0) {
          out[1] = a * w * std::cos(w * x[1]);  // d xi^0 / d y
        } else {
          out[2] = a * w * std::cos(w * x[0]);  // d xi^1 / d x
        }
      },
      [](std::size_t, std::span<const double>) { return 0.0; }, true);
}

VectorFieldReport validate_vector_fields(const VectorFieldSet& xi, std::span<const double> probes) {
  const std::size_t d = xi.dim();
  if (probes.size() % d != 0) throw DimensionError("probe array is not a multiple of the dimension");
  VectorFieldReport report;
  std::vector<double> exact(d * d), fp(d), fm(d), x(d);
  for (std::size_t p = 0; p < probes.size() / d; ++p) {
    std::copy_n(probes.begin() + static_cast<std::ptrdiff_t>(p * d), d, x.begin());
    for (std::size_t k = 0; k < xi.count(); ++k) {
      report.max_divergence = std::max(report.max_divergence, std::abs(xi.divergence(k, x)));
      if (!xi.has_exact_jacobian()) continue;
      xi.jacobian(k, x, exact);
      double err = 0.0, scale = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        auto xp = x;
        xp[c] += kJacobianStep;
        xi.eval(k, xp, fp);
        xp[c] = x[c] - kJacobianStep;
        xi.eval(k, xp, fm);
        for (std::size_t r = 0; r < d; ++r) {
          const double fd = (fp[r] - fm[r]) / (2.0 * kJacobianStep);
          err = std::max(err, std::abs(fd - exact[r * d + c]));
          scale = std::max(scale, std::abs(exact[r * d + c]));
        }
      }
      report.max_jacobian_error = std::max(report.max_jacobian_error, err / std::max(scale, 1.0));
    }
  }
  if (xi.divergence_free() && report.max_divergence > 1e-10)
    throw ParameterError("vector fields '" + xi.name() + "' are flagged divergence-free but |div| reaches " +
                         std::to_string(report.max_divergence));
  if (report.max_jacobian_error > 1e-6)
    throw ParameterError("Jacobian of '" + xi.name() + "' disagrees with central differences (" +
                         std::to_string(report.max_jacobian_error) + ")");
  return report;
}

// ---------------------------------------------------------------------------
// DriftField

DriftField::DriftField(std::string name, std::size_t dim, Evaluator eval, OsgoodModulus modulus, bool autonomous,
                       Schedule bound, Divergence divergence, Schedule divergence_sup)
    : name_(std::move(name)),
      dim_(dim),
      eval_(std::move(eval)),
      modulus_(std::move(modulus)),
      autonomous_(autonomous),
      bound_(std::move(bound)),
      divergence_(std::move(divergence)),
      divergence_sup_(std::move(divergence_sup)) {
  if (dim_ == 0) throw DimensionError("drift needs a positive dimension");
  if (!eval_) throw ParameterError("drift '" + name_ + "' has no evaluator");
}

double DriftField::bound(double t) const {
  if (!bound_) throw ParameterError("drift '" + name_ + "' has no bound schedule");
  return bound_(t);
}

double DriftField::divergence(double t, std::span<const double> x) const {
  if (divergence_) return divergence_(t, x);
  constexpr double h = 1e-6;
  std::vector<double> xp(x.begin(), x.end()), fp(dim_), fm(dim_);
  double trace = 0.0;
  for (std::size_t c = 0; c < dim_; ++c) {
    xp[c] = x[c] + h;
    eval_(t, xp, fp);
    xp[c] = x[c] - h;
    eval_(t, xp, fm);
    xp[c] = x[c];
    trace += (fp[c] - fm[c]) / (2.0 * h);
  }
  return trace;
}

double DriftField::divergence_sup(double t) const {
  if (!divergence_sup_) throw ParameterError("drift '" + name_ + "' has no divergence schedule");
  return divergence_sup_(t);
}

DriftField DriftField::reversed(double t_begin, double t_end) const {
  const double origin = t_begin + t_end;
  Evaluator eval = [inner = eval_, origin](double s, std::span<const double> x, std::span<double> out) {
    inner(origin - s, x, out);
    for (double& v : out) v = -v;
  };
  Schedule bound;
  if (bound_) bound = [inner = bound_, origin](double s) { return inner(origin - s); };
  Divergence divergence;
  if (divergence_)
    divergence = [inner = divergence_, origin](double s, std::span<const double> x) { return -inner(origin - s, x); };
  Schedule divergence_sup;
  if (divergence_sup_) divergence_sup = [inner = divergence_sup_, origin](double s) { return inner(origin - s); };
  return DriftField(name_ + "-reversed", dim_, std::move(eval), modulus_, autonomous_, std::move(bound),
                    std::move(divergence), std::move(divergence_sup));
}

DriftField DriftField::zero(std::size_t dim) {
  return DriftField(
      "zero", dim, [](double, std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); },
      OsgoodModulus::linear(1.0), true, [](double) { return 0.0; },
      [](double, std::span<const double>) { return 0.0; }, [](double) { return 0.0; });
}

DriftField DriftField::linear(std::size_t dim, std::vector<double> matrix) {
  if (matrix.size() != dim * dim) throw DimensionError("linear drift matrix must be d x d");
  double frob = 0.0, trace = 0.0;
  for (double v : matrix) frob += v * v;
  for (std::size_t r = 0; r < dim; ++r) trace += matrix[r * dim + r];
  frob = std::sqrt(frob);
  auto a = std::make_shared<const std::vector<double>>(std::move(matrix));
  return DriftField(
      "linear", dim,
      [a, dim](double, std::span<const double> x, std::span<double> out) {
        for (std::size_t r = 0; r < dim; ++r) {
          double s = 0.0;
          for (std::size_t c = 0; c < dim; ++c) s += (*a)[r * dim + c] * x[c];
          out[r] = s;
        }
      },
      OsgoodModulus::linear(frob > 0.0 ? frob : 1.0), true, {},
      [trace](double, std::span<const double>) { return trace; }, [trace](double) { return std::abs(trace); });
}

DriftField DriftField::scaled_identity(std::size_t dim, double c) {
  const double div = c * static_cast<double>(dim);
  return DriftField(
      "scaled-identity", dim,
      [c](double, std::span<const double> x, std::span<double> out) {
        for (std::size_t r = 0; r < x.size(); ++r) out[r] = c * x[r];
      },
      OsgoodModulus::linear(c != 0.0 ? std::abs(c) : 1.0), true, {},
      [div](double, std::span<const double>) { return div; }, [div](double) { return std::abs(div); });
}

DriftField DriftField::rotation(double omega) {
  return DriftField(
      "rotation", 2,
      [omega](double, std::span<const double> x, std::span<double> out) {
        out[0] = -omega * x[1];
        out[1] = omega * x[0];
      },
      OsgoodModulus::linear(omega != 0.0 ? std::abs(omega) : 1.0), true, {},
      [](double, std::span<const double>) { return 0.0; }, [](double) { return 0.0; });
}

DriftField DriftField::log_lipschitz_1d() {
  const auto h = OsgoodModulus::log_lipschitz();
  return DriftField(
      "log-lipschitz", 1,
      [h](double, std::span<const double> x, std::span<double> out) {
        const double r = std::min(std::abs(x[0]), 1.0);
        out[0] = x[0] < 0.0 ? -h(r) : h(r);
      },
      h, true, [](double) { return 2.0; }, {}, {});
}

DriftReport validate_drift(const DriftField& b, std::span<const double> probes, double t) {
  const std::size_t d = b.dim();
  if (probes.size() % d != 0) throw DimensionError("probe array is not a multiple of the dimension");
  const std::size_t count = probes.size() / d;
  const double g = b.has_bound() ? b.bound(t) : 1.0;
  DriftReport report;
  std::vector<double> bx(d), by(d), diff(d);
  for (std::size_t i = 0; i < count; ++i) {
    auto x = probes.subspan(i * d, d);
    b.eval(t, x, bx);
    if (b.has_bound()) {
      const double mag = norm2(bx);
      report.max_bound_ratio = std::max(report.max_bound_ratio, g > 0.0 ? mag / g : (mag > 0.0 ? INFINITY : 0.0));
    }
    for (std::size_t j = i + 1; j < count; ++j) {
      auto y = probes.subspan(j * d, d);
      b.eval(t, y, by);
      for (std::size_t c = 0; c < d; ++c) diff[c] = x[c] - y[c];
      const double sep = norm2(diff);
      for (std::size_t c = 0; c < d; ++c) diff[c] = bx[c] - by[c];
      const double jump = norm2(diff);
      if (sep == 0.0) continue;
      const double denom = g * b.modulus()(sep);
      report.max_modulus_ratio =
          std::max(report.max_modulus_ratio, denom > 0.0 ? jump / denom : (jump > 0.0 ? INFINITY : 0.0));
    }
  }
  return report;
}

}  // namespace roughflow
