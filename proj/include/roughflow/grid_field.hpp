#pragma once

// Cell-centred scalar fields on a uniform rectangular lattice.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace roughflow {

enum class Interpolation { Bilinear, Bicubic };

/// Values at cell centres (x0 + (i + 1/2) dx, y0 + (j + 1/2) dy), stored
/// row-major with index j * nx + i. Outside the lattice the field is
/// extended by clamping to the nearest edge cell.
class GridField {
 public:
  GridField(std::size_t nx, std::size_t ny, double x0, double y0, double dx, double dy,
            std::vector<double> values = {});

  /// Cell-centre samples of f(x, y).
  static GridField sample(std::size_t nx, std::size_t ny, double x0, double y0, double dx, double dy,
                          const std::function<double(double, double)>& f);
  /// Same lattice, all values zero.
  GridField zeros_like() const;

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return values_.size(); }
  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  double cell_area() const { return dx_ * dy_; }
  double cell_x(std::size_t i) const { return x0_ + (static_cast<double>(i) + 0.5) * dx_; }
  double cell_y(std::size_t j) const { return y0_ + (static_cast<double>(j) + 0.5) * dy_; }

  double operator()(std::size_t i, std::size_t j) const { return values_[j * nx_ + i]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[j * nx_ + i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double interpolate(double x, double y, Interpolation order = Interpolation::Bilinear) const;

  bool same_layout(const GridField& other) const;

  /// Writes stem.bin (row-major doubles, native byte order) and stem.json.
  void write(const std::string& stem) const;
  static GridField read(const std::string& stem);

 private:
  std::size_t nx_, ny_;
  double x0_, y0_, dx_, dy_;
  std::vector<double> values_;
};

struct FieldNorms {
  double l1 = 0.0, l2 = 0.0, linf = 0.0;
};

FieldNorms norms(const GridField& f);
/// sum f dx dy.
double integral(const GridField& f);
/// sum f g dx dy; the lattices must match.
double pairing(const GridField& f, const GridField& g);
double l2_distance(const GridField& f, const GridField& g);
/// sum |f| dx dy over the outermost ring of cells.
double boundary_mass(const GridField& f);

}  // namespace roughflow
