#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "roughflow/rough_path.hpp"

namespace testing {

inline constexpr double kPi = std::numbers::pi;

inline roughflow::RoughPath brownian(std::size_t dim, std::size_t steps, std::uint64_t seed, double horizon = 1.0) {
  roughflow::NoiseSpec spec;
  spec.kind = roughflow::NoiseKind::Brownian;
  spec.dimension = dim;
  spec.seed = seed;
  spec.grid = roughflow::TimeGrid::uniform(0.0, horizon, steps);
  return roughflow::sample_noise(spec);
}

inline std::vector<double> random_samples(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

}  // namespace testing
