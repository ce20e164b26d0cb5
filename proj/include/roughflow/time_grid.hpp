#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace roughflow {

/// Strictly increasing finite sequence of instants t_0 < ... < t_n, n >= 1.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times);

  /// n_intervals equal steps on [t0, t1].
  static TimeGrid uniform(double t0, double t1, std::size_t n_intervals);
  /// 2^level equal steps on [0, horizon].
  static TimeGrid dyadic(unsigned level, double horizon = 1.0);

  std::size_t size() const { return times_.size(); }
  std::size_t steps() const { return times_.size() - 1; }
  double operator[](std::size_t i) const { return times_[i]; }
  double front() const { return times_.front(); }
  double back() const { return times_.back(); }
  double horizon() const { return times_.back() - times_.front(); }
  std::span<const double> times() const { return times_; }

  /// Sub-grid of indices [first, last].
  TimeGrid slice(std::size_t first, std::size_t last) const;
  /// Every `factor`-th point; the last point must be hit exactly.
  TimeGrid coarsen(std::size_t factor) const;
  /// Index of the grid point equal to t within `tol`; throws if none.
  std::size_t index_of(double t, double tol = 1e-12) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  std::vector<double> times_;
};

}  // namespace roughflow
