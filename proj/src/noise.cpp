#include <cmath>
#include <complex>
#include <mutex>
#include <string>

#include <Eigen/Dense>
#include <fftw3.h>

#include "roughflow/errors.hpp"
#include "roughflow/rough_path.hpp"

namespace roughflow {

namespace {

// Fractional Gaussian noise autocovariance at integer lag k, unit step.
double fgn_autocovariance(std::size_t k, double hurst) {
  const double h2 = 2.0 * hurst;
  const double kk = static_cast<double>(k);
  return 0.5 * (std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) + std::pow(std::abs(kk - 1.0), h2));
}

bool is_uniform(const TimeGrid& grid) {
  const double h = grid.horizon() / static_cast<double>(grid.steps());
  for (std::size_t k = 0; k < grid.steps(); ++k)
    if (std::abs((grid[k + 1] - grid[k]) - h) > 1e-9 * h) return false;
  return true;
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place forward DFT of length data.size() via FFTW.
void dft(std::vector<std::complex<double>>& data) {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

// Davies-Harte: `steps` unit-step fGn samples, or empty when the circulant
// embedding is not nonnegative definite.
std::vector<double> fgn_circulant(std::size_t steps, double hurst, std::mt19937_64& engine) {
  const std::size_t m = 2 * steps;
  std::vector<std::complex<double>> row(m);
  for (std::size_t k = 0; k <= steps; ++k) row[k] = fgn_autocovariance(k, hurst);
  for (std::size_t k = 1; k < steps; ++k) row[m - k] = row[k];
  dft(row);
  double largest = 0.0;
  for (const auto& v : row) largest = std::max(largest, v.real());
  for (const auto& v : row)
    if (v.real() < -1e-10 * largest) return {};

  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::complex<double>> w(m);
  auto eig = [&](std::size_t k) { return std::max(row[k].real(), 0.0); };
  w[0] = std::sqrt(eig(0)) * normal(engine);
  w[steps] = std::sqrt(eig(steps)) * normal(engine);
  for (std::size_t k = 1; k < steps; ++k) {
    const double re = normal(engine);
    const double im = normal(engine);
    w[k] = std::sqrt(eig(k) / 2.0) * std::complex<double>(re, im);
    w[m - k] = std::conj(w[k]);
  }
  dft(w);
  std::vector<double> out(steps);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (std::size_t k = 0; k < steps; ++k) out[k] = w[k].real() * scale;
  return out;
}

// fBm values at grid points (relative to t_0) by Cholesky of the covariance.
std::vector<double> fbm_cholesky(const TimeGrid& grid, double hurst, std::mt19937_64& engine) {
  const std::size_t n = grid.steps();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> values(grid.size(), 0.0);
  if (hurst == 1.0) {
    const double slope = normal(engine);
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = slope * (grid[i] - grid.front());
    return values;
  }
  Eigen::MatrixXd cov(n, n);
  const double h2 = 2.0 * hurst;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const double s = grid[a + 1] - grid.front(), t = grid[b + 1] - grid.front();
      cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
    }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericError("fbm covariance is not positive definite");
  Eigen::VectorXd z(n);
  for (std::size_t a = 0; a < n; ++a) z(static_cast<Eigen::Index>(a)) = normal(engine);
  const Eigen::VectorXd x = llt.matrixL() * z;
  for (std::size_t a = 0; a < n; ++a) values[a + 1] = x(static_cast<Eigen::Index>(a));
  return values;
}

constexpr std::size_t kCholeskyMaxSteps = 64;

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::mt19937_64 noise_engine(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(derive_seed(seed, stream));
}

double default_fbm_exponent(double hurst) {
  return std::clamp(std::max(2.01, 1.0 / hurst + 0.01), 2.0, 2.99);
}

std::vector<double> sample_noise_values(const NoiseSpec& spec) {
  const TimeGrid& grid = spec.grid;
  const std::size_t m = spec.dimension;
  if (m == 0) throw ParameterError("noise dimension must be at least 1");
  const std::size_t n = grid.size();
  std::vector<double> values(n * m, 0.0);

  switch (spec.kind) {
    case NoiseKind::Samples:
      if (spec.samples.size() != n * m)
        throw DimensionError("noise samples: " + std::to_string(spec.samples.size()) + " values for " +
                             std::to_string(n) + " grid points of dimension " + std::to_string(m));
      return spec.samples;

    case NoiseKind::Brownian:
      for (std::size_t c = 0; c < m; ++c) {
        auto engine = noise_engine(spec.seed, c);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (std::size_t k = 0; k + 1 < n; ++k)
          values[(k + 1) * m + c] = values[k * m + c] + normal(engine) * std::sqrt(grid[k + 1] - grid[k]);
      }
      return values;

    case NoiseKind::FractionalBrownian: {
      if (!(spec.hurst > 1.0 / 3.0 && spec.hurst <= 1.0))
        throw ParameterError("Hurst index must lie in (1/3, 1], got " + std::to_string(spec.hurst));
      const bool circulant = is_uniform(grid) && grid.steps() > kCholeskyMaxSteps;
      const double dt = grid.horizon() / static_cast<double>(grid.steps());
      for (std::size_t c = 0; c < m; ++c) {
        auto engine = noise_engine(spec.seed, kFbmStreamBase + c);
        std::vector<double> path;
        if (circulant) {
          auto fgn = fgn_circulant(grid.steps(), spec.hurst, engine);
          if (!fgn.empty()) {
            path.assign(n, 0.0);
            const double scale = std::pow(dt, spec.hurst);
            for (std::size_t k = 0; k < fgn.size(); ++k) path[k + 1] = path[k] + scale * fgn[k];
          }
        }
        if (path.empty()) path = fbm_cholesky(grid, spec.hurst, engine);
        for (std::size_t k = 0; k < n; ++k) values[k * m + c] = path[k];
      }
      return values;
    }
  }
  throw ParameterError("unknown noise kind");
}

RoughPath sample_noise(const NoiseSpec& spec) {
  double p = kDefaultRoughExponent;
  if (spec.kind == NoiseKind::FractionalBrownian) p = default_fbm_exponent(spec.hurst);
  if (spec.p_exponent) p = *spec.p_exponent;
  auto values = sample_noise_values(spec);
  return canonical_lift(spec.grid, values, spec.dimension, p);
}

}  // namespace roughflow
