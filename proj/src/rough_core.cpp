#include "roughflow/rough_core.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "roughflow/errors.hpp"

namespace roughflow {

namespace {

double euclidean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void check_exponent(double p) {
  if (!(p >= 1.0) || !std::isfinite(p))
    throw ParameterError("p-variation exponent must be a finite real >= 1, got " + std::to_string(p));
}

}  // namespace

// ---------------------------------------------------------------------------
// TwoParamFunction

std::size_t TwoParamFunction::offset(std::size_t i, std::size_t j) const {
  const std::size_t n = grid_.size();
  // Row i starts after rows 0..i-1 of lengths n, n-1, ..., n-i+1.
  return (i * n - i * (i - 1) / 2 + (j - i)) * dim_;
}

void TwoParamFunction::check_pair(std::size_t i, std::size_t j) const {
  if (i > j || j >= grid_.size())
    throw ParameterError("invalid grid pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
}

TwoParamFunction TwoParamFunction::tabulate(TimeGrid grid, std::size_t dim, const Evaluator& eval) {
  if (dim == 0) throw DimensionError("TwoParamFunction dimension must be positive");
  TwoParamFunction f(std::move(grid), dim);
  const std::size_t n = f.grid_.size();
  f.table_.assign(n * (n + 1) / 2 * dim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      std::span<double> out(f.table_.data() + f.offset(i, j), dim);
      eval(i, j, out);
      for (double v : out)
        if (!std::isfinite(v))
          throw ParameterError("non-finite value at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      if (i == j)
        for (double v : out)
          if (v != 0.0) throw ParameterError("two-parameter function must vanish on the diagonal");
    }
  return f;
}

TwoParamFunction TwoParamFunction::lazy(TimeGrid grid, std::size_t dim, Evaluator eval) {
  if (dim == 0) throw DimensionError("TwoParamFunction dimension must be positive");
  TwoParamFunction f(std::move(grid), dim);
  f.eval_ = std::move(eval);
  return f;
}

void TwoParamFunction::value(std::size_t i, std::size_t j, std::span<double> out) const {
  check_pair(i, j);
  if (out.size() != dim_) throw DimensionError("output span has wrong dimension");
  if (i == j) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  if (is_dense()) {
    std::copy_n(table_.data() + offset(i, j), dim_, out.begin());
  } else {
    eval_(i, j, out);
  }
}

std::vector<double> TwoParamFunction::value(std::size_t i, std::size_t j) const {
  std::vector<double> out(dim_);
  value(i, j, out);
  return out;
}

double TwoParamFunction::norm(std::size_t i, std::size_t j) const {
  if (is_dense()) {
    check_pair(i, j);
    return euclidean({table_.data() + offset(i, j), dim_});
  }
  return euclidean(value(i, j));
}

void TwoParamFunction::column_norms(std::size_t first, std::size_t j, std::span<double> out) const {
  std::vector<double> buf(dim_);
  for (std::size_t i = first; i <= j; ++i) {
    value(i, j, buf);
    out[i - first] = euclidean(buf);
  }
}

std::span<double> TwoParamFunction::mutable_value(std::size_t i, std::size_t j) {
  check_pair(i, j);
  if (!is_dense()) throw ParameterError("mutable access requires a dense table");
  return {table_.data() + offset(i, j), dim_};
}

TwoParamFunction increments_of_path(const TimeGrid& grid, std::span<const double> values,
                                    std::size_t dim) {
  if (dim == 0 || values.size() != grid.size() * dim)
    throw DimensionError("path has " + std::to_string(values.size()) + " entries, expected " +
                         std::to_string(grid.size()) + " x " + std::to_string(dim));
  return TwoParamFunction::tabulate(grid, dim, [&](std::size_t i, std::size_t j, std::span<double> out) {
    for (std::size_t c = 0; c < dim; ++c) out[c] = values[j * dim + c] - values[i * dim + c];
  });
}

PathIncrements::PathIncrements(TimeGrid grid, std::vector<double> values, std::size_t dim)
    : grid_(std::move(grid)), values_(std::move(values)), dim_(dim) {
  if (dim_ == 0 || values_.size() != grid_.size() * dim_)
    throw DimensionError("path sample count does not match grid");
}

void PathIncrements::column_norms(std::size_t first, std::size_t j, std::span<double> out) const {
  for (std::size_t i = first; i <= j; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) {
      const double d = values_[j * dim_ + c] - values_[i * dim_ + c];
      s += d * d;
    }
    out[i - first] = std::sqrt(s);
  }
}

// ---------------------------------------------------------------------------
// p-variation

double p_variation(const IncrementSource& g, double p, Window window) {
  check_exponent(p);
  const std::size_t n = g.grid().size();
  if (window.first >= window.last || window.last >= n)
    throw ParameterError("empty or out-of-range p-variation window");
  const std::size_t a = window.first;
  const std::size_t len = window.last - a + 1;
  // best[k]: sup of sum |g|^p over partitions of [t_a, t_{a+k}].
  std::vector<double> best(len, 0.0), norms(len);
  for (std::size_t k = 1; k < len; ++k) {
    g.column_norms(a, a + k, {norms.data(), k + 1});
    double v = 0.0;
    for (std::size_t m = 0; m < k; ++m) v = std::max(v, best[m] + std::pow(norms[m], p));
    best[k] = v;
  }
  return std::pow(best[len - 1], 1.0 / p);
}

double p_variation(const IncrementSource& g, double p) {
  return p_variation(g, p, {0, g.grid().size() - 1});
}

// ---------------------------------------------------------------------------
// Controls

Control Control::tabulate(TimeGrid grid, const Evaluator& eval) {
  Control w(std::move(grid));
  const std::size_t n = w.grid_.size();
  w.table_.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = eval(i, j);
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ParameterError("control values must be finite and nonnegative");
      w.table_[i * n + j] = v;
    }
  return w;
}

Control Control::lazy(TimeGrid grid, Evaluator eval) {
  Control w(std::move(grid));
  w.eval_ = std::move(eval);
  return w;
}

double Control::operator()(std::size_t i, std::size_t j) const {
  const std::size_t n = grid_.size();
  if (i > j || j >= n) throw ParameterError("invalid control pair");
  if (i == j) return 0.0;
  return is_dense() ? table_[i * n + j] : eval_(i, j);
}

Control control_from_variation(const IncrementSource& g, double p) {
  check_exponent(p);
  const TimeGrid& grid = g.grid();
  const std::size_t n = grid.size();
  if (n > kDenseControlLimit) {
    // Shares the source by reference; the caller keeps it alive.
    return Control::lazy(grid, [&g, p](std::size_t i, std::size_t j) {
      return std::pow(p_variation(g, p, {i, j}), p);
    });
  }
  // powered[j * n + i] = |g(i, j)|^p
  std::vector<double> powered(n * n, 0.0), norms(n);
  for (std::size_t j = 1; j < n; ++j) {
    g.column_norms(0, j, {norms.data(), j + 1});
    for (std::size_t i = 0; i < j; ++i) powered[j * n + i] = std::pow(norms[i], p);
  }
  std::vector<double> table(n * n, 0.0), best(n);
  for (std::size_t a = 0; a < n; ++a) {
    best[a] = 0.0;
    for (std::size_t k = a + 1; k < n; ++k) {
      double v = 0.0;
      for (std::size_t m = a; m < k; ++m) v = std::max(v, best[m] + powered[k * n + m]);
      best[k] = v;
      table[a * n + k] = v;
    }
  }
  return Control::tabulate(grid, [&](std::size_t i, std::size_t j) { return table[i * n + j]; });
}

SuperadditivityReport check_superadditive(const Control& w, double tol) {
  const std::size_t n = w.grid().size();
  if (tol < 0.0) {
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) scale = std::max(scale, w(i, j));
    tol = 1e-10 * scale;
  }
  SuperadditivityReport report;
  report.worst_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      for (std::size_t k = j; k < n; ++k) {
        const double excess = w(i, j) + w(j, k) - w(i, k);
        if (excess > report.worst_violation) {
          report.worst_violation = excess;
          report.i = i;
          report.j = j;
          report.k = k;
        }
      }
  report.superadditive = report.worst_violation <= tol;
  return report;
}

// ---------------------------------------------------------------------------
// Sewing

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++count;
  }
  if (count < 2) return std::numeric_limits<double>::quiet_NaN();
  const double c = static_cast<double>(count);
  const double denom = c * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (c * sxy - sx * sy) / denom;
}

SewingResult sew(const TwoParamFunction& germ, double p) {
  check_exponent(p);
  const TimeGrid& grid = germ.grid();
  const std::size_t n = grid.size();
  const std::size_t dim = germ.dim();

  std::vector<double> st(dim), su(dim), ut(dim);
  std::vector<double> lengths, defects;
  double max_defect = 0.0, scale = 0.0;
  for (std::size_t half = 1; 2 * half <= n - 1; half *= 2) {
    const std::size_t span_len = 2 * half;
    double level_defect = 0.0, level_length = 0.0;
    for (std::size_t s = 0; s + span_len <= n - 1; s += half) {
      germ.value(s, s + span_len, st);
      germ.value(s, s + half, su);
      germ.value(s + half, s + span_len, ut);
      double d2 = 0.0, g2 = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double d = st[c] - su[c] - ut[c];
        d2 += d * d;
        g2 += st[c] * st[c] + su[c] * su[c] + ut[c] * ut[c];
      }
      level_defect = std::max(level_defect, std::sqrt(d2));
      level_length = std::max(level_length, grid[s + span_len] - grid[s]);
      scale = std::max(scale, std::sqrt(g2));
    }
    max_defect = std::max(max_defect, level_defect);
    lengths.push_back(level_length);
    defects.push_back(level_defect);
  }

  const bool additive = max_defect <= 1e-13 * std::max(scale, 1e-300);
  if (additive) {
    return SewingResult{germ, max_defect, std::numeric_limits<double>::infinity(), true, true};
  }

  // Neumaier-compensated prefix sums of the adjacent germ values.
  auto prefix = std::make_shared<std::vector<double>>(n * dim, 0.0);
  std::vector<double> comp(dim, 0.0), sum(dim, 0.0), step(dim);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    germ.value(k, k + 1, step);
    for (std::size_t c = 0; c < dim; ++c) {
      const double t = sum[c] + step[c];
      comp[c] += std::abs(sum[c]) >= std::abs(step[c]) ? (sum[c] - t) + step[c] : (step[c] - t) + sum[c];
      sum[c] = t;
      (*prefix)[(k + 1) * dim + c] = sum[c] + comp[c];
    }
  }
  auto integral = TwoParamFunction::lazy(grid, dim, [prefix, dim](std::size_t i, std::size_t j, std::span<double> out) {
    for (std::size_t c = 0; c < dim; ++c) out[c] = (*prefix)[j * dim + c] - (*prefix)[i * dim + c];
  });

  const double theta = fit_loglog_slope(lengths, defects);
  return SewingResult{std::move(integral), max_defect, theta, false, theta > 1.0};
}

}  // namespace roughflow
