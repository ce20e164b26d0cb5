#pragma once

// Two-parameter functions on a time grid, grid-restricted p-variation,
// controls and a sewing integrator.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "roughflow/time_grid.hpp"

namespace roughflow {

/// Index pair (first, last) into a TimeGrid, first <= last.
struct Window {
  std::size_t first = 0;
  std::size_t last = 0;
};

/// Anything whose increment sizes |g(i, j)| can be streamed column by column.
/// column_norms(first, j, out) writes |g(i, j)| into out[i - first] for
/// i in [first, j]; out has j - first + 1 entries.
class IncrementSource {
 public:
  virtual ~IncrementSource() = default;
  virtual const TimeGrid& grid() const = 0;
  virtual void column_norms(std::size_t first, std::size_t j, std::span<double> out) const = 0;
};

/// g: {(i, j) : i <= j} -> R^dim with g(i, i) = 0.
///
/// Either a dense upper-triangular table or a lazy evaluator. Dense tables
/// cost O(n^2 dim) memory and are meant for grids up to a few thousand points.
class TwoParamFunction final : public IncrementSource {
 public:
  using Evaluator = std::function<void(std::size_t i, std::size_t j, std::span<double> out)>;

  /// Dense construction from an evaluator; checks the diagonal and finiteness.
  static TwoParamFunction tabulate(TimeGrid grid, std::size_t dim, const Evaluator& eval);
  /// Lazy wrapper, values are computed on every access.
  static TwoParamFunction lazy(TimeGrid grid, std::size_t dim, Evaluator eval);

  const TimeGrid& grid() const override { return grid_; }
  std::size_t dim() const { return dim_; }
  bool is_dense() const { return !table_.empty(); }

  void value(std::size_t i, std::size_t j, std::span<double> out) const;
  std::vector<double> value(std::size_t i, std::size_t j) const;
  double norm(std::size_t i, std::size_t j) const;

  void column_norms(std::size_t first, std::size_t j, std::span<double> out) const override;

  /// Mutable dense access, used to inject faults in tests.
  std::span<double> mutable_value(std::size_t i, std::size_t j);

 private:
  TwoParamFunction(TimeGrid grid, std::size_t dim) : grid_(std::move(grid)), dim_(dim) {}
  std::size_t offset(std::size_t i, std::size_t j) const;
  void check_pair(std::size_t i, std::size_t j) const;

  TimeGrid grid_;
  std::size_t dim_;
  std::vector<double> table_;
  Evaluator eval_;
};

/// Increment map of a sampled path: g(i, j) = x_j - x_i. `values` is
/// row-major, one row of `dim` entries per grid point.
TwoParamFunction increments_of_path(const TimeGrid& grid, std::span<const double> values,
                                    std::size_t dim);

/// Lazy increments of a path that only stores the samples; suitable for long grids.
class PathIncrements final : public IncrementSource {
 public:
  PathIncrements(TimeGrid grid, std::vector<double> values, std::size_t dim);
  const TimeGrid& grid() const override { return grid_; }
  void column_norms(std::size_t first, std::size_t j, std::span<double> out) const override;

 private:
  TimeGrid grid_;
  std::vector<double> values_;
  std::size_t dim_;
};

/// Supremum of (sum |g(t_k, t_{k+1})|^p)^(1/p) over all partitions of
/// [t_first, t_last] whose points are grid points.
///
/// This is the grid-restricted seminorm: exact for the sampled function and a
/// lower bound for the continuum supremum. O(n^2) dynamic programming.
double p_variation(const IncrementSource& g, double p, Window window);
double p_variation(const IncrementSource& g, double p);

/// Nonnegative two-parameter function w(i, j), i <= j, with w(i, i) = 0.
class Control {
 public:
  using Evaluator = std::function<double(std::size_t i, std::size_t j)>;

  static Control tabulate(TimeGrid grid, const Evaluator& eval);
  static Control lazy(TimeGrid grid, Evaluator eval);

  const TimeGrid& grid() const { return grid_; }
  double operator()(std::size_t i, std::size_t j) const;
  bool is_dense() const { return !table_.empty(); }

 private:
  explicit Control(TimeGrid grid) : grid_(std::move(grid)) {}

  TimeGrid grid_;
  std::vector<double> table_;
  Evaluator eval_;
};

/// Grids up to this many points get a dense control table.
inline constexpr std::size_t kDenseControlLimit = 4096;

/// w(s, t) = [[g]]_{p,[s,t]}^p on every grid pair.
Control control_from_variation(const IncrementSource& g, double p);

struct SuperadditivityReport {
  bool superadditive = true;
  double worst_violation = 0.0;  // max of w(i,j) + w(j,k) - w(i,k)
  std::size_t i = 0, j = 0, k = 0;
};

/// Checks w(i,j) + w(j,k) <= w(i,k) + tol on every grid triple. A negative
/// tol selects the default 1e-10 relative to max w.
SuperadditivityReport check_superadditive(const Control& w, double tol = -1.0);

struct SewingResult {
  /// I(i, j) = compensated sum of germ(k, k+1) over the grid steps in [i, j].
  TwoParamFunction integral;
  /// Max |germ(s,t) - germ(s,u) - germ(u,t)| over the sampled dyadic triples.
  double max_defect = 0.0;
  /// Fitted exponent theta in |delta germ| ~ |t - s|^theta; +inf when additive.
  double coherence_exponent = std::numeric_limits<double>::infinity();
  /// Germ is additive up to rounding; `integral` is then the germ itself.
  bool additive = false;
  /// theta > 1 (or additive): the sewn limit exists.
  bool coherent = false;
};

/// Sews a germ on its grid without adaptive refinement. `p` sets the
/// reference exponent 3/p reported alongside the fitted coherence exponent
/// (callers compare theta against it); it must be >= 1.
SewingResult sew(const TwoParamFunction& germ, double p);

/// Least-squares slope of log(y) against log(x) over entries with y > 0.
/// Returns NaN when fewer than two usable points exist.
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace roughflow
