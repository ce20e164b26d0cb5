#pragma once

// Davie-scheme solver for dy = b(t, y) dt + xi(y) dZ, flows, inverse flows
// and flow diagnostics.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roughflow/osgood.hpp"
#include "roughflow/rough_path.hpp"
#include "roughflow/vector_fields.hpp"

namespace roughflow {

/// Trajectories whose norm exceeds this are declared divergent.
inline constexpr double kDivergenceThreshold = 1e12;

/// One-step Davie expansion over grid step k of a rough path:
///   y' = y + b(t_k, y) dt + xi(y) dZ + Xi(y) ZZ,   Xi = D xi . xi.
/// The drift is frozen at the left endpoint. Owns its scratch buffers; use one
/// stepper per thread.
class DavieStepper {
 public:
  DavieStepper(const DriftField& b, const VectorFieldSet& xi, const RoughPath& rp);

  /// Advances y in place. Throws DivergenceError naming the step.
  void step(std::span<double> y, std::size_t k);
  /// Same expansion with a caller-supplied drift displacement in place of
  /// b(t_k, y) dt.
  void step_with_drift_increment(std::span<double> y, std::span<const double> drift_increment, std::size_t k);

  /// |y' - y - (b dt + xi dZ + Xi ZZ)| of the last step: pure rounding.
  double last_remainder() const { return last_remainder_; }
  const RoughPath& path() const { return rp_; }

 private:
  void apply(std::span<double> y, std::span<const double> drift, std::size_t k);

  const DriftField& b_;
  const VectorFieldSet& xi_;
  const RoughPath& rp_;
  std::size_t d_, m_;
  std::vector<double> drift_, noise_, second_, scratch_, field_, before_;
  double last_remainder_ = 0.0;
};

/// y' after one Davie step over grid step k.
std::vector<double> davie_step(std::span<const double> y, const DriftField& b, const VectorFieldSet& xi,
                               const RoughPath& rp, std::size_t k);

struct Trajectory {
  TimeGrid grid;
  std::size_t dim = 0;
  std::vector<double> states;           // row-major, one row per grid point
  std::vector<double> remainder_norms;  // per step, rounding level by construction

  std::span<const double> state(std::size_t i) const { return {states.data() + i * dim, dim}; }
};

/// Iterates the Davie step over the whole grid.
Trajectory solve_rde(std::span<const double> y0, const DriftField& b, const VectorFieldSet& xi,
                     const RoughPath& rp);

struct RemainderFit {
  std::vector<double> window_lengths;
  std::vector<double> max_remainders;  // max |y^natural_{st}| per window length
  double exponent = 0.0;               // fitted kappa in |y^natural| ~ |t-s|^kappa
};

/// Evaluates y^natural_{st} = dy - sum b dt - xi(y_s) dZ - Xi(y_s) ZZ of a
/// trajectory on dyadic windows (2, 4, ... steps) and fits its decay.
RemainderFit fit_remainder_exponent(const Trajectory& traj, const DriftField& b, const VectorFieldSet& xi,
                                    const RoughPath& rp);

enum class FlowDirection { Forward, Inverse };

struct FlowOptions {
  /// Grid indices whose states are stored; empty means every grid point.
  std::vector<std::size_t> recorded;
  unsigned threads = 1;
};

struct FlowMap {
  TimeGrid grid;
  std::size_t dim = 0;
  std::vector<double> seeds;              // row-major initial points
  std::vector<std::size_t> recorded;      // grid indices of the stored states
  std::vector<double> positions;          // [record][seed][dim]
  std::vector<std::optional<std::string>> failures;  // per seed
  FlowDirection direction = FlowDirection::Forward;

  std::size_t seed_count() const { return dim == 0 ? 0 : seeds.size() / dim; }
  std::span<const double> position(std::size_t record, std::size_t seed) const {
    return {positions.data() + (record * seed_count() + seed) * dim, dim};
  }
  /// Record index of grid index t; throws if not recorded.
  std::size_t record_of(std::size_t grid_index) const;
  /// Trajectory of one seed over the recorded points.
  Trajectory trajectory(std::size_t seed) const;
  /// Terminal positions of all seeds, row-major.
  std::vector<double> terminal() const;
};

/// Advances every seed through each grid step against the shared increments.
/// A seed that diverges is reported in `failures`, its later states are NaN,
/// and the remaining seeds are completed.
FlowMap solve_flow(std::span<const double> seeds, const DriftField& b, const VectorFieldSet& xi,
                   const RoughPath& rp, const FlowOptions& options = {});

/// Phi_t^{-1}(targets) for t = grid point `t_index`, obtained by solving the
/// time-reversed equation (reversed rough path, drift -b(t - s)) from t to 0.
std::vector<double> inverse_flow(std::span<const double> targets, const DriftField& b, const VectorFieldSet& xi,
                                 const RoughPath& rp, std::size_t t_index, unsigned threads = 1);

/// Seeds x +/- fd_step e_i, i = 0..d-1, in that order.
std::vector<double> jacobian_stencil(std::span<const double> x, double fd_step);

/// det of the central-difference Jacobian of x -> Phi_t(x) at grid index
/// t_index, read from the stencil seeds already present in the flow.
double jacobian_determinant(const FlowMap& flow, std::size_t t_index, std::span<const double> x, double fd_step);

struct FlowModulusReport {
  double fitted_constant = 0.0;  // smallest C on the ladder that works for all pairs
  bool bound_holds = false;      // false when even the largest C fails
  struct Violation {
    std::size_t seed_a, seed_b, grid_index;
    double separation, bound;
  };
  std::vector<Violation> violations;  // at the largest tested C
};

/// Default ladder of candidate constants C.
std::vector<double> default_constant_ladder();

/// Finds the smallest C on `ladder` with
///   sup_{s <= t} |Phi_s(x) - Phi_s(y)| <= M^h(C |x - y|, C int_0^t g)
/// for every seed pair and recorded time t.
FlowModulusReport flow_modulus_diagnostic(const FlowMap& flow, const OsgoodModulus& h,
                                          const std::function<double(double)>& g_integral,
                                          std::span<const double> ladder = {});

/// max |Phi_{0->T}(x) - Phi_{u->T}(Phi_{0->u}(x))| over seeds, the second
/// leg driven by translate(rp, u). Requires an autonomous drift.
double cocycle_check(std::span<const double> seeds, const DriftField& b, const VectorFieldSet& xi,
                     const RoughPath& rp, std::size_t u);

}  // namespace roughflow
