#include "roughflow/grid_field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "roughflow/errors.hpp"

namespace roughflow {

namespace {

// Offsets within 1e-9 of a node are snapped to it, so cell centres are
// reproduced exactly.
constexpr double kSnap = 1e-9;

void locate(double f, std::size_t n, std::ptrdiff_t& i, double& t) {
  const double hi = static_cast<double>(n - 1);
  f = std::clamp(f, 0.0, hi);
  double fl = std::floor(f);
  t = f - fl;
  if (t < kSnap) t = 0.0;
  if (t > 1.0 - kSnap) {
    t = 0.0;
    fl += 1.0;
  }
  i = static_cast<std::ptrdiff_t>(fl);
}

double catmull_rom(double p0, double p1, double p2, double p3, double t) {
  if (t == 0.0) return p1;
  return p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)));
}

}  // namespace

GridField::GridField(std::size_t nx, std::size_t ny, double x0, double y0, double dx, double dy,
                     std::vector<double> values)
    : nx_(nx), ny_(ny), x0_(x0), y0_(y0), dx_(dx), dy_(dy), values_(std::move(values)) {
  if (nx == 0 || ny == 0) throw DimensionError("grid field needs at least one cell per axis");
  if (!(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) || !std::isfinite(dy))
    throw ParameterError("grid spacing must be positive and finite");
  if (!std::isfinite(x0) || !std::isfinite(y0)) throw ParameterError("grid origin must be finite");
  if (values_.empty()) values_.assign(nx * ny, 0.0);
  if (values_.size() != nx * ny)
    throw DimensionError("grid field has " + std::to_string(values_.size()) + " values for " + std::to_string(nx) +
                         " x " + std::to_string(ny) + " cells");
  for (double v : values_)
    if (!std::isfinite(v)) throw NumericError("grid field values must be finite");
}

GridField GridField::sample(std::size_t nx, std::size_t ny, double x0, double y0, double dx, double dy,
                            const std::function<double(double, double)>& f) {
  GridField g(nx, ny, x0, y0, dx, dy);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) g(i, j) = f(g.cell_x(i), g.cell_y(j));
  for (double v : g.values_)
    if (!std::isfinite(v)) throw NumericError("sampled field is not finite");
  return g;
}

GridField GridField::zeros_like() const { return GridField(nx_, ny_, x0_, y0_, dx_, dy_); }

double GridField::interpolate(double x, double y, Interpolation order) const {
  std::ptrdiff_t i, j;
  double tx, ty;
  locate((x - x0_) / dx_ - 0.5, nx_, i, tx);
  locate((y - y0_) / dy_ - 0.5, ny_, j, ty);
  const auto nxm = static_cast<std::ptrdiff_t>(nx_) - 1, nym = static_cast<std::ptrdiff_t>(ny_) - 1;
  auto at = [&](std::ptrdiff_t a, std::ptrdiff_t b) {
    a = std::clamp<std::ptrdiff_t>(a, 0, nxm);
    b = std::clamp<std::ptrdiff_t>(b, 0, nym);
    return values_[static_cast<std::size_t>(b) * nx_ + static_cast<std::size_t>(a)];
  };
  if (order == Interpolation::Bilinear) {
    const double lo = tx == 0.0 ? at(i, j) : at(i, j) + tx * (at(i + 1, j) - at(i, j));
    if (ty == 0.0) return lo;
    const double hi = tx == 0.0 ? at(i, j + 1) : at(i, j + 1) + tx * (at(i + 1, j + 1) - at(i, j + 1));
    return lo + ty * (hi - lo);
  }
  double rows[4];
  for (int r = 0; r < 4; ++r) {
    const std::ptrdiff_t b = j - 1 + r;
    rows[r] = catmull_rom(at(i - 1, b), at(i, b), at(i + 1, b), at(i + 2, b), tx);
  }
  return catmull_rom(rows[0], rows[1], rows[2], rows[3], ty);
}

bool GridField::same_layout(const GridField& o) const {
  return nx_ == o.nx_ && ny_ == o.ny_ && x0_ == o.x0_ && y0_ == o.y0_ && dx_ == o.dx_ && dy_ == o.dy_;
}

void GridField::write(const std::string& stem) const {
  std::ofstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw IoError("cannot write " + stem + ".bin");
  bin.write(reinterpret_cast<const char*>(values_.data()), static_cast<std::streamsize>(values_.size() * sizeof(double)));
  nlohmann::json meta = {{"nx", nx_}, {"ny", ny_}, {"x0", x0_}, {"y0", y0_}, {"dx", dx_}, {"dy", dy_}};
  std::ofstream js(stem + ".json");
  if (!js) throw IoError("cannot write " + stem + ".json");
  js << meta.dump(2) << '\n';
  if (!bin || !js) throw IoError("write failed for " + stem);
}

GridField GridField::read(const std::string& stem) {
  std::ifstream js(stem + ".json");
  if (!js) throw IoError("cannot read " + stem + ".json");
  nlohmann::json meta;
  try {
    js >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(stem + ".json: " + e.what());
  }
  const auto nx = meta.at("nx").get<std::size_t>(), ny = meta.at("ny").get<std::size_t>();
  std::vector<double> values(nx * ny);
  std::ifstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw IoError("cannot read " + stem + ".bin");
  bin.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (bin.gcount() != static_cast<std::streamsize>(values.size() * sizeof(double)))
    throw IoError(stem + ".bin is shorter than its sidecar describes");
  return GridField(nx, ny, meta.at("x0").get<double>(), meta.at("y0").get<double>(), meta.at("dx").get<double>(),
                   meta.at("dy").get<double>(), std::move(values));
}

FieldNorms norms(const GridField& f) {
  FieldNorms n;
  for (double v : f.values()) {
    n.l1 += std::abs(v);
    n.l2 += v * v;
    n.linf = std::max(n.linf, std::abs(v));
  }
  n.l1 *= f.cell_area();
  n.l2 = std::sqrt(n.l2 * f.cell_area());
  return n;
}

double integral(const GridField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.cell_area();
}

double pairing(const GridField& f, const GridField& g) {
  if (!f.same_layout(g)) throw DimensionError("pairing of fields on different lattices");
  double s = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c) s += f.values()[c] * g.values()[c];
  return s * f.cell_area();
}

double l2_distance(const GridField& f, const GridField& g) {
  if (!f.same_layout(g)) throw DimensionError("distance between fields on different lattices");
  double s = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c) {
    const double e = f.values()[c] - g.values()[c];
    s += e * e;
  }
  return std::sqrt(s * f.cell_area());
}

double boundary_mass(const GridField& f) {
  double s = 0.0;
  for (std::size_t j = 0; j < f.ny(); ++j)
    for (std::size_t i = 0; i < f.nx(); ++i)
      if (i == 0 || j == 0 || i + 1 == f.nx() || j + 1 == f.ny()) s += std::abs(f(i, j));
  return s * f.cell_area();
}

}  // namespace roughflow
