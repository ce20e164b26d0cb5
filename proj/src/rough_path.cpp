#include "roughflow/rough_path.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "roughflow/errors.hpp"

namespace roughflow {

namespace {

double frobenius(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// acc += a (x) b for vectors of length m, acc row-major m x m.
void add_outer(std::span<double> acc, std::span<const double> a, std::span<const double> b) {
  const std::size_t m = a.size();
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < m; ++c) acc[r * m + c] += a[r] * b[c];
}

// Composes ZZ(i, j) forward from i, one adjacent step at a time.
class ForwardFold {
 public:
  ForwardFold(const RoughPath& rp, std::size_t start)
      : rp_(rp), start_(start), at_(start), acc_(rp.dim() * rp.dim(), 0.0), inc_(rp.dim()), step_(rp.dim()) {}

  void advance() {
    const std::size_t m = rp_.dim();
    auto zi = rp_.point(start_), zk = rp_.point(at_), zk1 = rp_.point(at_ + 1);
    for (std::size_t c = 0; c < m; ++c) {
      inc_[c] = zk[c] - zi[c];
      step_[c] = zk1[c] - zk[c];
    }
    auto adj = rp_.adjacent_second(at_);
    for (std::size_t e = 0; e < m * m; ++e) acc_[e] += adj[e];
    add_outer(acc_, inc_, step_);
    ++at_;
  }

  std::size_t position() const { return at_; }
  std::span<const double> value() const { return acc_; }

 private:
  const RoughPath& rp_;
  std::size_t start_, at_;
  std::vector<double> acc_, inc_, step_;
};

// |ZZ_a(i, j) - ZZ_b(i, j)| streamed column-wise by a backward fold.
class SecondLevelDifference final : public IncrementSource {
 public:
  SecondLevelDifference(const RoughPath& a, const RoughPath& b) : a_(a), b_(b) {}
  const TimeGrid& grid() const override { return a_.grid(); }

  void column_norms(std::size_t first, std::size_t j, std::span<double> out) const override {
    const std::size_t m = a_.dim();
    std::vector<double> acc_a(m * m, 0.0), acc_b(m * m, 0.0), diff(m * m);
    std::vector<double> da(m), db(m), ra(m), rb(m);
    out[j - first] = 0.0;
    for (std::size_t i = j; i-- > first;) {
      step(a_, i, j, acc_a, da, ra);
      step(b_, i, j, acc_b, db, rb);
      for (std::size_t e = 0; e < m * m; ++e) diff[e] = acc_a[e] - acc_b[e];
      out[i - first] = frobenius(diff);
    }
  }

 private:
  // acc holds ZZ(i + 1, j) on entry and ZZ(i, j) on exit.
  static void step(const RoughPath& rp, std::size_t i, std::size_t j, std::vector<double>& acc,
                   std::vector<double>& head, std::vector<double>& tail) {
    if (rp.has_dense_second_level()) {
      rp.dense_second_level()->value(i, j, acc);
      return;
    }
    const std::size_t m = rp.dim();
    auto zi = rp.point(i), zi1 = rp.point(i + 1), zj = rp.point(j);
    for (std::size_t c = 0; c < m; ++c) {
      head[c] = zi1[c] - zi[c];
      tail[c] = zj[c] - zi1[c];
    }
    auto adj = rp.adjacent_second(i);
    for (std::size_t e = 0; e < m * m; ++e) acc[e] += adj[e];
    add_outer(acc, head, tail);
  }

  const RoughPath& a_;
  const RoughPath& b_;
};

}  // namespace

// ---------------------------------------------------------------------------

RoughPath::RoughPath(TimeGrid grid, std::size_t dim, std::vector<double> first_level,
                     std::vector<double> adjacent_second_level, double p_exponent)
    : grid_(std::move(grid)),
      dim_(dim),
      first_(std::move(first_level)),
      adjacent_(std::move(adjacent_second_level)),
      p_(p_exponent) {
  if (dim_ == 0) throw DimensionError("rough path dimension must be positive");
  if (first_.size() != grid_.size() * dim_)
    throw DimensionError("first level has " + std::to_string(first_.size()) + " entries, expected " +
                         std::to_string(grid_.size() * dim_));
  if (adjacent_.size() != grid_.steps() * dim_ * dim_)
    throw DimensionError("adjacent second level has wrong size");
  if (!(p_ >= 2.0 && p_ < 3.0)) throw ParameterError("rough path exponent must lie in [2, 3)");
  for (double v : first_)
    if (!std::isfinite(v)) throw ParameterError("rough path first level is not finite");
  for (double v : adjacent_)
    if (!std::isfinite(v)) throw ParameterError("rough path second level is not finite");
}

void RoughPath::increment(std::size_t i, std::size_t j, std::span<double> out) const {
  if (i > j || j >= size()) throw ParameterError("invalid rough path window");
  for (std::size_t c = 0; c < dim_; ++c) out[c] = first_[j * dim_ + c] - first_[i * dim_ + c];
}

std::vector<double> RoughPath::increment(std::size_t i, std::size_t j) const {
  std::vector<double> out(dim_);
  increment(i, j, out);
  return out;
}

void RoughPath::second_level(std::size_t i, std::size_t j, std::span<double> out) const {
  if (i > j || j >= size()) throw ParameterError("invalid rough path window");
  if (dense_) {
    dense_->value(i, j, out);
    return;
  }
  if (j == i + 1) {
    auto adj = adjacent_second(i);
    std::copy(adj.begin(), adj.end(), out.begin());
    return;
  }
  ForwardFold fold(*this, i);
  while (fold.position() < j) fold.advance();
  std::copy(fold.value().begin(), fold.value().end(), out.begin());
}

std::vector<double> RoughPath::second_level(std::size_t i, std::size_t j) const {
  std::vector<double> out(dim_ * dim_);
  second_level(i, j, out);
  return out;
}

RoughPath RoughPath::densified() const {
  if (size() > kDenseControlLimit) throw ParameterError("grid too long for a dense second level");
  RoughPath copy = *this;
  copy.dense_.reset();
  std::optional<ForwardFold> fold;
  copy.dense_ = TwoParamFunction::tabulate(grid_, dim_ * dim_, [&](std::size_t i, std::size_t j, std::span<double> out) {
    if (i == j) {
      std::fill(out.begin(), out.end(), 0.0);
      fold.emplace(*this, i);
      return;
    }
    while (fold->position() < j) fold->advance();
    std::copy(fold->value().begin(), fold->value().end(), out.begin());
  });
  return copy;
}

std::span<double> RoughPath::mutable_dense_second(std::size_t i, std::size_t j) {
  if (!dense_) throw ParameterError("rough path has no dense second level");
  return dense_->mutable_value(i, j);
}

// ---------------------------------------------------------------------------

RoughPath canonical_lift(const TimeGrid& grid, std::span<const double> samples, std::size_t dim,
                         double p_exponent) {
  if (dim == 0 || samples.size() != grid.size() * dim)
    throw DimensionError("canonical_lift: " + std::to_string(samples.size()) + " samples for " +
                         std::to_string(grid.size()) + " grid points of dimension " + std::to_string(dim));
  std::vector<double> adjacent(grid.steps() * dim * dim);
  std::vector<double> d(dim);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    for (std::size_t c = 0; c < dim; ++c) d[c] = samples[(k + 1) * dim + c] - samples[k * dim + c];
    double* zz = adjacent.data() + k * dim * dim;
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) zz[r * dim + c] = 0.5 * d[r] * d[c];
  }
  return RoughPath(grid, dim, std::vector<double>(samples.begin(), samples.end()), std::move(adjacent),
                   p_exponent);
}

double chen_defect(const RoughPath& rp) {
  const std::size_t n = rp.size();
  const std::size_t m = rp.dim();
  std::vector<std::size_t> pts;
  if (n <= kChenExactLimit) {
    for (std::size_t i = 0; i < n; ++i) pts.push_back(i);
  } else {
    const std::size_t stride = (n - 1 + kChenExactLimit - 2) / (kChenExactLimit - 1);
    for (std::size_t i = 0; i < n - 1; i += stride) pts.push_back(i);
    pts.push_back(n - 1);
  }
  const std::size_t k = pts.size();
  const std::size_t mm = m * m;
  // second[(a * k + b) * mm ...] = ZZ(pts[a], pts[b]) for a < b.
  std::vector<double> second(k * k * mm, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    if (rp.has_dense_second_level()) {
      for (std::size_t b = a + 1; b < k; ++b)
        rp.second_level(pts[a], pts[b], {second.data() + (a * k + b) * mm, mm});
      continue;
    }
    ForwardFold fold(rp, pts[a]);
    for (std::size_t b = a + 1; b < k; ++b) {
      while (fold.position() < pts[b]) fold.advance();
      std::copy(fold.value().begin(), fold.value().end(), second.begin() + static_cast<std::ptrdiff_t>((a * k + b) * mm));
    }
  }
  double worst = 0.0;
  std::vector<double> du(m), dt(m);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) {
      rp.increment(pts[a], pts[b], du);
      for (std::size_t c = b + 1; c < k; ++c) {
        rp.increment(pts[b], pts[c], dt);
        const double* zst = second.data() + (a * k + c) * mm;
        const double* zsu = second.data() + (a * k + b) * mm;
        const double* zut = second.data() + (b * k + c) * mm;
        double s = 0.0;
        for (std::size_t r = 0; r < m; ++r)
          for (std::size_t q = 0; q < m; ++q) {
            const std::size_t e = r * m + q;
            const double d = zst[e] - zsu[e] - zut[e] - du[r] * dt[q];
            s += d * d;
          }
        worst = std::max(worst, std::sqrt(s));
      }
    }
  return worst;
}

RoughPath time_reverse(const RoughPath& rp) {
  const std::size_t n = rp.size();
  const std::size_t m = rp.dim();
  const TimeGrid& g = rp.grid();
  std::vector<double> times(n);
  const double origin = g.front() + g.back();
  for (std::size_t k = 0; k < n; ++k) times[k] = origin - g[n - 1 - k];
  times.front() = g.front();
  times.back() = g.back();

  std::vector<double> first(n * m);
  for (std::size_t k = 0; k < n; ++k)
    std::copy_n(rp.point(n - 1 - k).begin(), m, first.begin() + static_cast<std::ptrdiff_t>(k * m));

  std::vector<double> adjacent(rp.grid().steps() * m * m);
  std::vector<double> d(m);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const std::size_t src = n - 2 - k;  // reversed step k covers original (src, src + 1)
    rp.increment(src, src + 1, d);
    auto zz = rp.adjacent_second(src);
    double* out = adjacent.data() + k * m * m;
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < m; ++c) out[r * m + c] = -zz[r * m + c] + d[r] * d[c];
  }
  RoughPath result(TimeGrid(std::move(times)), m, std::move(first), std::move(adjacent), rp.p_exponent());
  if (rp.has_dense_second_level()) {
    std::vector<double> zz(m * m);
    result.dense_ = TwoParamFunction::tabulate(result.grid(), m * m, [&](std::size_t a, std::size_t b, std::span<double> out) {
      if (a == b) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
      }
      const std::size_t s = n - 1 - b, t = n - 1 - a;
      rp.second_level(s, t, zz);
      rp.increment(s, t, d);
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) out[r * m + c] = -zz[r * m + c] + d[r] * d[c];
    });
  }
  return result;
}

double rough_distance(const RoughPath& a, const RoughPath& b, double p) {
  if (!(a.grid() == b.grid())) throw DimensionError("rough_distance: grids differ");
  if (a.dim() != b.dim()) throw DimensionError("rough_distance: dimensions differ");
  if (!(p >= 2.0)) throw ParameterError("rough_distance needs p >= 2");
  const std::size_t m = a.dim();
  std::vector<double> diff(a.first_level().size());
  for (std::size_t e = 0; e < diff.size(); ++e) diff[e] = a.first_level()[e] - b.first_level()[e];
  double start = 0.0;
  for (std::size_t c = 0; c < m; ++c) start += diff[c] * diff[c];
  const PathIncrements first(a.grid(), std::move(diff), m);
  const SecondLevelDifference second(a, b);
  return std::sqrt(start) + p_variation(first, p) + p_variation(second, p / 2.0);
}

RoughPath restrict_path(const RoughPath& rp, Window window) {
  if (window.first >= window.last || window.last >= rp.size())
    throw ParameterError("restriction window out of range");
  const std::size_t m = rp.dim();
  auto fl = rp.first_level();
  auto adj = rp.adjacent_second_level();
  std::vector<double> first(fl.begin() + static_cast<std::ptrdiff_t>(window.first * m),
                            fl.begin() + static_cast<std::ptrdiff_t>((window.last + 1) * m));
  std::vector<double> adjacent(adj.begin() + static_cast<std::ptrdiff_t>(window.first * m * m),
                               adj.begin() + static_cast<std::ptrdiff_t>(window.last * m * m));
  if (window.first == 0 && window.last == rp.size() - 1) return rp;
  RoughPath out(rp.grid().slice(window.first, window.last), m, std::move(first), std::move(adjacent),
                rp.p_exponent());
  if (rp.has_dense_second_level()) {
    out = out.densified();
    // Dense data may differ from the Chen composition; copy it verbatim.
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t j = i + 1; j < out.size(); ++j) {
        auto dst = out.mutable_dense_second(i, j);
        rp.second_level(window.first + i, window.first + j, dst);
      }
  }
  return out;
}

RoughPath translate(const RoughPath& rp, std::size_t shift) {
  if (shift == 0) return rp;
  if (shift >= rp.size() - 1) throw ParameterError("translation leaves fewer than two grid points");
  RoughPath sliced = restrict_path(rp, {shift, rp.size() - 1});
  const auto& g = sliced.grid();
  std::vector<double> times(g.size());
  const double offset = rp.grid()[shift] - rp.grid().front();
  for (std::size_t k = 0; k < g.size(); ++k) times[k] = g[k] - offset;
  times.front() = rp.grid().front();
  std::vector<double> first(sliced.first_level().begin(), sliced.first_level().end());
  std::vector<double> adjacent(sliced.adjacent_second_level().begin(), sliced.adjacent_second_level().end());
  return RoughPath(TimeGrid(std::move(times)), rp.dim(), std::move(first), std::move(adjacent), rp.p_exponent());
}

RoughPath coarsen(const RoughPath& rp, std::size_t factor) {
  if (factor == 1) return rp;
  TimeGrid grid = rp.grid().coarsen(factor);
  const std::size_t m = rp.dim();
  std::vector<double> first(grid.size() * m), adjacent(grid.steps() * m * m);
  for (std::size_t k = 0; k < grid.size(); ++k)
    std::copy_n(rp.point(k * factor).begin(), m, first.begin() + static_cast<std::ptrdiff_t>(k * m));
  for (std::size_t k = 0; k + 1 < grid.size(); ++k)
    rp.second_level(k * factor, (k + 1) * factor, {adjacent.data() + k * m * m, m * m});
  return RoughPath(std::move(grid), m, std::move(first), std::move(adjacent), rp.p_exponent());
}

RoughPath piecewise_linear_approximation(const RoughPath& rp, std::size_t factor) {
  TimeGrid grid = rp.grid().coarsen(factor);
  const std::size_t m = rp.dim();
  std::vector<double> samples(grid.size() * m);
  for (std::size_t k = 0; k < grid.size(); ++k)
    std::copy_n(rp.point(k * factor).begin(), m, samples.begin() + static_cast<std::ptrdiff_t>(k * m));
  return canonical_lift(grid, samples, m, rp.p_exponent());
}

// ---------------------------------------------------------------------------
// Serialization

std::string hexfloat(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  return std::string(buf, res.ptr);
}

double parse_hexfloat(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto res = std::from_chars(begin, end, v, std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != end) throw ParameterError("malformed hexfloat '" + s + "'");
  return v;
}

namespace {

nlohmann::json hex_array(std::span<const double> values) {
  nlohmann::json arr = nlohmann::json::array();
  for (double v : values) arr.push_back(hexfloat(v));
  return arr;
}

std::vector<double> parse_array(const nlohmann::json& arr, const char* field) {
  if (!arr.is_array()) throw ParameterError(std::string("rough path field '") + field + "' must be an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (v.is_string()) {
      out.push_back(parse_hexfloat(v.get<std::string>()));
    } else if (v.is_number()) {
      out.push_back(v.get<double>());
    } else {
      throw ParameterError(std::string("rough path field '") + field + "' has a non-numeric entry");
    }
  }
  return out;
}

}  // namespace

nlohmann::json rough_path_to_json(const RoughPath& rp) {
  nlohmann::json doc;
  doc["grid"] = hex_array(rp.grid().times());
  doc["dimension"] = rp.dim();
  doc["first_level"] = hex_array(rp.first_level());
  doc["adjacent_second_level"] = hex_array(rp.adjacent_second_level());
  doc["p_exponent"] = hexfloat(rp.p_exponent());
  if (rp.has_dense_second_level()) {
    std::vector<double> dense;
    const std::size_t n = rp.size(), mm = rp.dim() * rp.dim();
    std::vector<double> buf(mm);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        rp.second_level(i, j, buf);
        dense.insert(dense.end(), buf.begin(), buf.end());
      }
    doc["dense_second_level"] = hex_array(dense);
  }
  return doc;
}

RoughPath rough_path_from_json(const nlohmann::json& doc) {
  for (const char* key : {"grid", "dimension", "first_level", "adjacent_second_level", "p_exponent"})
    if (!doc.contains(key)) throw ParameterError(std::string("rough path document lacks '") + key + "'");
  const auto p_field = doc.at("p_exponent");
  const double p = p_field.is_string() ? parse_hexfloat(p_field.get<std::string>()) : p_field.get<double>();
  RoughPath rp(TimeGrid(parse_array(doc.at("grid"), "grid")), doc.at("dimension").get<std::size_t>(),
               parse_array(doc.at("first_level"), "first_level"),
               parse_array(doc.at("adjacent_second_level"), "adjacent_second_level"), p);
  if (doc.contains("dense_second_level")) {
    const auto dense = parse_array(doc.at("dense_second_level"), "dense_second_level");
    const std::size_t n = rp.size(), mm = rp.dim() * rp.dim();
    if (dense.size() != n * (n - 1) / 2 * mm) throw DimensionError("dense second level has wrong size");
    std::size_t cursor = 0;
    rp.dense_ = TwoParamFunction::tabulate(rp.grid(), mm, [&](std::size_t i, std::size_t j, std::span<double> out) {
      if (i == j) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
      }
      std::copy_n(dense.begin() + static_cast<std::ptrdiff_t>(cursor), mm, out.begin());
      cursor += mm;
    });
  }
  return rp;
}

}  // namespace roughflow
