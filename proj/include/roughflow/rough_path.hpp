#pragma once

// Level-2 geometric rough paths on a time grid.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "roughflow/rough_core.hpp"
#include "roughflow/time_grid.hpp"

namespace roughflow {

/// A p-rough path (Z, ZZ) on a grid, p in [2, 3).
///
/// The first level is stored at every grid point. The second level is stored
/// for adjacent pairs only; ZZ(i, j) for longer windows is composed with
/// Chen's relation ZZ(i, k) = ZZ(i, j) + ZZ(j, k) + dZ(i, j) (x) dZ(j, k).
/// A dense table of all windows can be attached (`densified`) to represent
/// arbitrary second-level data; windows are then read from the table.
///
/// Matrices are m x m row-major: entry [a * m + b] is ZZ^{ab}, the iterated
/// integral of dZ^a against dZ^b.
class RoughPath {
 public:
  RoughPath(TimeGrid grid, std::size_t dim, std::vector<double> first_level,
            std::vector<double> adjacent_second_level, double p_exponent);

  const TimeGrid& grid() const { return grid_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return grid_.size(); }
  double p_exponent() const { return p_; }

  std::span<const double> point(std::size_t i) const { return {first_.data() + i * dim_, dim_}; }
  std::span<const double> first_level() const { return first_; }
  std::span<const double> adjacent_second_level() const { return adjacent_; }
  /// ZZ(k, k + 1).
  std::span<const double> adjacent_second(std::size_t k) const {
    return {adjacent_.data() + k * dim_ * dim_, dim_ * dim_};
  }

  void increment(std::size_t i, std::size_t j, std::span<double> out) const;
  std::vector<double> increment(std::size_t i, std::size_t j) const;
  void second_level(std::size_t i, std::size_t j, std::span<double> out) const;
  std::vector<double> second_level(std::size_t i, std::size_t j) const;

  bool has_dense_second_level() const { return dense_.has_value(); }
  /// Copy with every window tabulated. Limited to kDenseControlLimit points.
  RoughPath densified() const;
  /// Dense entry for fault injection; requires `densified` storage.
  std::span<double> mutable_dense_second(std::size_t i, std::size_t j);
  const std::optional<TwoParamFunction>& dense_second_level() const { return dense_; }

 private:
  friend RoughPath time_reverse(const RoughPath&);
  friend RoughPath rough_path_from_json(const nlohmann::json&);

  TimeGrid grid_;
  std::size_t dim_;
  std::vector<double> first_;
  std::vector<double> adjacent_;
  double p_;
  std::optional<TwoParamFunction> dense_;
};

/// Default exponent for rough paths built from samples and Brownian noise.
inline constexpr double kDefaultRoughExponent = 2.5;

/// Canonical lift of the piecewise-linear interpolation of `samples`
/// (row-major, `dim` values per grid point): ZZ(k, k+1) = dZ (x) dZ / 2.
RoughPath canonical_lift(const TimeGrid& grid, std::span<const double> samples, std::size_t dim,
                         double p_exponent = kDefaultRoughExponent);

/// Grids up to this size are checked on every triple by chen_defect.
inline constexpr std::size_t kChenExactLimit = 257;

/// max |ZZ(s,t) - ZZ(s,u) - ZZ(u,t) - dZ(s,u) (x) dZ(u,t)| over grid triples
/// s <= u <= t. Every triple is visited when the grid has at most
/// kChenExactLimit points; longer grids are checked on the triples of an
/// evenly strided sub-grid of at most that many points, with all windows
/// still read or composed on the full grid.
double chen_defect(const RoughPath& rp);

/// Time reversal at the terminal time: Z'(t) = Z(T - t),
/// ZZ'(s,t) = -ZZ(T-t, T-s) + dZ(T-t, T-s) (x) dZ(T-t, T-s).
RoughPath time_reverse(const RoughPath& rp);

/// Inhomogeneous grid metric ||Z_a - Z_b||_p + [[ZZ_a - ZZ_b]]_{p/2}, with
/// ||x||_p = |x_0| + [[x]]_p. Requires identical grids and dimensions.
double rough_distance(const RoughPath& a, const RoughPath& b, double p);

/// The rough path over grid indices [first, last].
RoughPath restrict_path(const RoughPath& rp, Window window);

/// Shift by `shift` grid indices: the result starts at t_0, has the grid
/// steps of t_shift, ..., t_n, and increments equal to those of rp over
/// (s + shift, t + shift).
RoughPath translate(const RoughPath& rp, std::size_t shift);

/// Exact sub-sampling on every `factor`-th point; the adjacent second level
/// of the result is composed from the fine grid so no area is lost.
RoughPath coarsen(const RoughPath& rp, std::size_t factor);

/// Canonical lift of the first level sub-sampled on every `factor`-th point:
/// the piecewise-linear (Wong-Zakai) approximation at that resolution.
RoughPath piecewise_linear_approximation(const RoughPath& rp, std::size_t factor);

// ---------------------------------------------------------------------------
// Noise sampling

enum class NoiseKind { Samples, Brownian, FractionalBrownian };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Brownian;
  std::size_t dimension = 1;
  double hurst = 0.5;            // fbm only, in (1/3, 1]
  std::uint64_t seed = 0;
  TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 1);
  std::vector<double> samples;   // Samples kind only, row-major per grid point
  std::optional<double> p_exponent;
};

/// SplitMix64 mix of (seed, stream): the per-stream seed derivation used by
/// every sampler in the library.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Engine for one random stream. Brownian component c draws from stream c;
/// fbm component c draws from stream kFbmStreamBase + c.
std::mt19937_64 noise_engine(std::uint64_t seed, std::uint64_t stream);
inline constexpr std::uint64_t kFbmStreamBase = 1ull << 32;

/// Default p for an fbm sample of Hurst index H: max(2.01, 1/H + 0.01)
/// clamped into [2, 3).
double default_fbm_exponent(double hurst);

/// Samples the first level and lifts it canonically. Brownian increments are
/// N(0, dt) per component; fbm is sampled with the exact covariance on the
/// grid (circulant embedding on uniform grids, Cholesky otherwise or for
/// short grids). Z_0 = 0. Bit-reproducible for a fixed spec.
RoughPath sample_noise(const NoiseSpec& spec);

/// Row-major first-level samples only, as used by sample_noise.
std::vector<double> sample_noise_values(const NoiseSpec& spec);

// ---------------------------------------------------------------------------
// Serialization: doubles are written as hexfloat strings, so a round trip is
// bit-exact.

nlohmann::json rough_path_to_json(const RoughPath& rp);
RoughPath rough_path_from_json(const nlohmann::json& doc);

std::string hexfloat(double v);
double parse_hexfloat(const std::string& s);

}  // namespace roughflow
