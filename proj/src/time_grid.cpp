#include "roughflow/time_grid.hpp"

#include <cmath>
#include <string>

#include "roughflow/errors.hpp"

namespace roughflow {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw ParameterError("TimeGrid needs at least two points");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]))
      throw ParameterError("TimeGrid point " + std::to_string(i) + " is not finite");
    if (i > 0 && !(times_[i] > times_[i - 1]))
      throw ParameterError("TimeGrid is not strictly increasing at index " + std::to_string(i));
  }
}

TimeGrid TimeGrid::uniform(double t0, double t1, std::size_t n_intervals) {
  if (n_intervals == 0) throw ParameterError("uniform grid needs at least one interval");
  std::vector<double> t(n_intervals + 1);
  const double h = (t1 - t0) / static_cast<double>(n_intervals);
  for (std::size_t i = 0; i <= n_intervals; ++i) t[i] = t0 + h * static_cast<double>(i);
  t.back() = t1;
  return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::dyadic(unsigned level, double horizon) {
  if (level > 30) throw ParameterError("dyadic level above 30");
  return uniform(0.0, horizon, std::size_t{1} << level);
}

TimeGrid TimeGrid::slice(std::size_t first, std::size_t last) const {
  if (first >= last || last >= times_.size())
    throw ParameterError("grid slice [" + std::to_string(first) + ", " + std::to_string(last) +
                         "] out of range");
  return TimeGrid(std::vector<double>(times_.begin() + static_cast<std::ptrdiff_t>(first),
                                      times_.begin() + static_cast<std::ptrdiff_t>(last) + 1));
}

TimeGrid TimeGrid::coarsen(std::size_t factor) const {
  if (factor == 0 || steps() % factor != 0)
    throw ParameterError("coarsening factor must divide the number of steps");
  std::vector<double> t;
  t.reserve(steps() / factor + 1);
  for (std::size_t i = 0; i < times_.size(); i += factor) t.push_back(times_[i]);
  return TimeGrid(std::move(t));
}

std::size_t TimeGrid::index_of(double t, double tol) const {
  std::size_t lo = 0, hi = times_.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (times_[mid] <= t ? lo : hi) = mid;
  }
  const double scale = tol * std::max(1.0, std::abs(t));
  if (std::abs(times_[lo] - t) <= scale) return lo;
  if (std::abs(times_[hi] - t) <= scale) return hi;
  throw ParameterError("time " + std::to_string(t) + " is not a grid point");
}

}  // namespace roughflow
