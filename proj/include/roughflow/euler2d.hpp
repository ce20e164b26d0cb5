#pragma once

// Rough 2D Euler in vorticity form, d omega + u . grad omega dt +
// sum_k xi_k . grad omega dZ^k = 0 with u = K * omega, discretised by
// vortex blobs moving under the Davie scheme.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roughflow/grid_field.hpp"
#include "roughflow/osgood.hpp"
#include "roughflow/rde.hpp"

namespace roughflow {

enum class KernelKind { Exact, Blob, Custom };

/// Velocity kernel K : R^2 -> R^2.
///   exact: K(z) = z^perp / (2 pi |z|^2), singular at 0;
///   blob:  K(z) = z^perp / (2 pi (|z|^2 + delta^2)).
class Kernel {
 public:
  using Evaluator = std::function<void(double zx, double zy, double& ux, double& uy)>;

  static Kernel exact();
  static Kernel blob(double delta);
  /// `singular` marks kernels that may not be evaluated at z = 0.
  static Kernel custom(std::string name, Evaluator k, OsgoodModulus modulus, bool singular);

  KernelKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double delta() const { return delta_; }
  bool singular() const { return singular_; }
  const OsgoodModulus& modulus() const { return modulus_; }

  /// Throws SingularityError at z = 0 for singular kernels.
  void operator()(double zx, double zy, double& ux, double& uy) const;

 private:
  Kernel(KernelKind kind, std::string name, double delta, bool singular, OsgoodModulus modulus, Evaluator k)
      : kind_(kind), name_(std::move(name)), delta_(delta), singular_(singular), modulus_(std::move(modulus)),
        k_(std::move(k)) {}

  KernelKind kind_;
  std::string name_;
  double delta_;
  bool singular_;
  OsgoodModulus modulus_;
  Evaluator k_;
};

struct ParticleEnsemble {
  std::vector<double> positions;     // x0, y0, x1, y1, ...
  std::vector<double> circulations;  // gamma_i, never modified after construction
  std::string source;

  std::size_t size() const { return circulations.size(); }
  /// Sum of circulations in index order.
  double total_circulation() const;
};

/// One particle per cell with |omega| > threshold, at the cell centre, with
/// gamma = omega dx dy.
ParticleEnsemble discretize_vorticity(const GridField& omega0, double threshold = 0.0);

/// u(q) = sum_j gamma_j K(q - X_j) at each query point (row-major pairs).
/// Each query sums the particles in index order, so the result does not
/// depend on `threads`.
std::vector<double> induced_velocity(const ParticleEnsemble& ens, std::span<const double> queries,
                                     const Kernel& kernel, unsigned threads = 1);

/// Velocities at the particles themselves, self-interaction excluded.
std::vector<double> particle_velocities(const ParticleEnsemble& ens, const Kernel& kernel, unsigned threads = 1);

/// omega(x) = sum_j gamma_j zeta_delta(x - X_j) at the cell centres of
/// `layout`, zeta_delta(z) = delta^2 / (pi (|z|^2 + delta^2)^2).
GridField reconstruct_vorticity(const ParticleEnsemble& ens, const GridField& layout, double delta,
                                unsigned threads = 1);

/// Advances every particle over grid step k of the rough path with the
/// velocity frozen at the current positions:
///   X' = X + u(X) dt + xi(X) dZ + Xi(X) ZZ.
/// Requires divergence-free noise fields.
void step_rough_euler(ParticleEnsemble& ens, const Kernel& kernel, const VectorFieldSet& xi, const RoughPath& rp,
                      std::size_t k, unsigned threads = 1);

struct EulerConfig {
  Kernel kernel = Kernel::blob(0.1);
  std::vector<std::size_t> output_indices;  // empty: every grid index
  std::optional<GridField> reconstruction;  // lattice for field output
  double reconstruction_delta = 0.0;        // 0: the kernel's delta
  bool keep_positions = true;
  unsigned threads = 1;
};

struct ConservedSample {
  double t = 0.0;
  double total_circulation = 0.0;
  FieldNorms norms;  // of the reconstructed field, zero without a lattice
};

struct EulerRun {
  std::vector<std::size_t> indices;
  std::vector<double> times;
  std::vector<std::vector<double>> positions;  // per output, when kept
  std::vector<GridField> fields;               // per output, when reconstructed
  std::vector<ConservedSample> series;
  std::vector<double> circulations;
};

EulerRun simulate(const ParticleEnsemble& initial, const VectorFieldSet& xi, const RoughPath& rp,
                  const EulerConfig& config);

/// Time of the first full turn of X_b - X_a, from the unwrapped angle with
/// linear interpolation between outputs; NaN if it never completes a turn.
double rotation_period(const EulerRun& run, std::size_t a, std::size_t b);

/// Point-vortex ODE dX_i/dt = sum_{j != i} gamma_j K(X_i - X_j) integrated by
/// classical RK4 with `steps` equal steps over [0, horizon].
std::vector<double> point_vortex_rk4(std::span<const double> positions, std::span<const double> circulations,
                                     const Kernel& kernel, double horizon, std::size_t steps);

/// Wong-Zakai study: the same fine sample, piecewise-linearly interpolated
/// from dyadic sub-grids of 2^level steps, drives the simulation on the fine
/// grid. distances[l] is the sup over outputs of the L2 distance between the
/// reconstructions at levels[l] and levels[l + 1].
struct WongZakaiReport {
  std::vector<unsigned> levels;
  std::vector<double> distances;
  bool nonincreasing = false;  // each distance <= 1.1 x its predecessor
};

/// `fine_values` are path samples on the dyadic grid of 2^max(levels) steps
/// over [0, horizon].
WongZakaiReport wong_zakai_study(const ParticleEnsemble& initial, const VectorFieldSet& xi,
                                 std::span<const double> fine_values, std::size_t dim, double horizon,
                                 std::span<const unsigned> levels, const EulerConfig& config);

/// Canonical lift on `grid` of the linear interpolation of the samples taken
/// every `factor` grid points.
RoughPath interpolated_lift(const TimeGrid& grid, std::span<const double> values, std::size_t dim,
                            std::size_t factor);

struct KernelProbeReport {
  double field_norm = 0.0;      // ||f||_1 + ||f||_inf
  double sup_ratio = 0.0;       // sup |K * f| / field_norm
  double modulus_ratio = 0.0;   // sup |K*f(x) - K*f(y)| / (h(|x - y|) field_norm)
  double gradient_l1 = 0.0;     // ||grad(K * f)||_L1 over the probe disc
};

/// Probes the velocity K * f of a grid field: its size, its modulus of
/// continuity against the kernel's Osgood modulus at separations
/// 1e-1 .. 1e-4, and the L1 norm of its gradient over the disc of radius
/// `radius` around the lattice centre. Probes sit at cell corners.
KernelProbeReport kernel_assumption_probe(const Kernel& kernel, const GridField& f, double radius);

}  // namespace roughflow
