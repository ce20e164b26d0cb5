#pragma once

// Lagrangian solvers for the rough continuity equation
//   d rho + div(b rho) dt + sum_k div(xi_k rho) dZ^k = 0
// and the rough transport equation
//   d f + b . grad f dt + sum_k xi_k . grad f dZ^k = 0,
// evaluated through the characteristic flow, plus the structural checks
// built on them.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roughflow/grid_field.hpp"
#include "roughflow/rde.hpp"

namespace roughflow {

struct TransportOptions {
  Interpolation interpolation = Interpolation::Bilinear;
  unsigned threads = 1;
};

/// Fields at a list of grid indices of the driving rough path.
struct FieldSequence {
  std::vector<std::size_t> indices;
  std::vector<double> times;
  std::vector<GridField> fields;
};

/// Backward characteristics from every cell centre at grid index t_index:
/// feet = Phi_t^{-1}(x), and log_weight = -int_0^t div b(Phi_{s<-t}(x)) ds
/// (trapezoidal along the stored backward path; empty when the drift is
/// declared divergence-free).
struct Characteristics {
  std::size_t t_index = 0;
  std::vector<double> feet;        // 2 per cell
  std::vector<double> log_weight;  // 1 per cell, or empty
};

Characteristics backward_characteristics(const GridField& layout, const DriftField& b, const VectorFieldSet& xi,
                                         const RoughPath& rp, std::size_t t_index, unsigned threads = 1);

/// f_0 o Phi_t^{-1}.
GridField pull_back(const GridField& f0, const Characteristics& ch, Interpolation order);
/// rho_0(Phi_t^{-1}) exp(log_weight).
GridField push_forward_density(const GridField& rho0, const Characteristics& ch, Interpolation order);

/// Densities (continuity equation) and scalars (transport equation) advanced
/// by one shared set of characteristics per output index.
struct LagrangianBatch {
  std::vector<FieldSequence> densities;
  std::vector<FieldSequence> scalars;
};

/// Requires divergence-free noise fields. Output indices must be increasing.
LagrangianBatch solve_lagrangian(std::span<const GridField> densities, std::span<const GridField> scalars,
                                 const DriftField& b, const VectorFieldSet& xi, const RoughPath& rp,
                                 std::span<const std::size_t> output_indices, const TransportOptions& options = {});

FieldSequence solve_rce_lagrangian(const GridField& rho0, const DriftField& b, const VectorFieldSet& xi,
                                   const RoughPath& rp, std::span<const std::size_t> output_indices,
                                   const TransportOptions& options = {});

FieldSequence solve_rte_lagrangian(const GridField& f0, const DriftField& b, const VectorFieldSet& xi,
                                   const RoughPath& rp, std::span<const std::size_t> output_indices,
                                   const TransportOptions& options = {});

/// Output indices spread evenly over the grid: round(k n / count), k = 1..count.
std::vector<std::size_t> even_output_indices(const TimeGrid& grid, std::size_t count);

struct SeriesReport {
  std::vector<double> values;  // per output time
  double max_relative_drift = 0.0;
};

/// <rho_t, f_t> per output time and its largest drift from the first value
/// (absolute when the first value is zero).
SeriesReport duality_check(const FieldSequence& rho, const FieldSequence& f);

struct MassReport {
  SeriesReport mass;
  std::optional<std::string> warning;  // set when boundary mass exceeds 1e-6 of the total
};

MassReport mass_conservation_check(const FieldSequence& rho);

/// max over outputs and cells of |beta(f_t) - S_t(beta(f_0))| where S_t is
/// the transport solver.
double renormalization_check(const GridField& f0, const std::function<double(double)>& beta, const DriftField& b,
                             const VectorFieldSet& xi, const RoughPath& rp,
                             std::span<const std::size_t> output_indices, const TransportOptions& options = {});

struct StabilityReport {
  double initial_distance = 0.0;
  double sup_distance = 0.0;  // over the output times
  double ratio = 0.0;         // sup / initial
};

StabilityReport stability_check(const GridField& rho1_0, const GridField& rho2_0, const FieldSequence& rho1,
                                const FieldSequence& rho2);

// ---------------------------------------------------------------------------
// Remainder diagnostic

/// phi(x) = (1 + a . (x - c)) psi(|x - c|^2 / r^2) with the smooth bump
/// psi(q) = exp(-1 / (1 - q)) for q < 1 and 0 otherwise.
class BumpFunction {
 public:
  BumpFunction(std::vector<double> center, double radius, std::vector<double> slope = {});

  std::size_t dim() const { return center_.size(); }
  const std::vector<double>& center() const { return center_; }
  double radius() const { return radius_; }

  double value(std::span<const double> x) const;
  void gradient(std::span<const double> x, std::span<double> out) const;
  /// d x d row-major.
  void hessian(std::span<const double> x, std::span<double> out) const;

 private:
  std::vector<double> center_;
  double radius_;
  std::vector<double> slope_;
};

using TestFunctionSet = std::vector<BumpFunction>;

/// Largest relative disagreement between the analytic gradients and central
/// differences at the probes.
double test_function_gradient_error(const TestFunctionSet& tests, std::span<const double> probes);

/// Action of the unbounded rough driver on test functions:
///   A_st phi  = sum_k xi_k . grad phi dZ^k_st,
///   AA_st phi = sum_{j,k} xi_j . grad(xi_k . grad phi) ZZ^{jk}_st.
class DriverPair {
 public:
  DriverPair(const VectorFieldSet& xi, const RoughPath& rp);

  const VectorFieldSet& fields() const { return xi_; }
  const RoughPath& path() const { return rp_; }

  /// (xi_k . grad phi)(x) for every k.
  void first_order_terms(const BumpFunction& phi, std::span<const double> x, std::span<double> out) const;
  /// (xi_j . grad(xi_k . grad phi))(x), m x m row-major.
  void second_order_terms(const BumpFunction& phi, std::span<const double> x, std::span<double> out) const;

  double first(const BumpFunction& phi, std::span<const double> x, std::size_t s, std::size_t t) const;
  double second(const BumpFunction& phi, std::span<const double> x, std::size_t s, std::size_t t) const;

 private:
  const VectorFieldSet& xi_;
  const RoughPath& rp_;
};

/// |AA_st phi - AA_su phi - AA_ut phi - A_su(A_ut phi)| at x.
double driver_chen_defect(const DriverPair& driver, const BumpFunction& phi, std::span<const double> x,
                          std::size_t s, std::size_t u, std::size_t t);

/// Point masses carried by a flow: <rho_t, phi> = sum_i w_i phi(X_i(t)).
struct ParticleDensity {
  FlowMap flow;                 // every grid index recorded
  std::vector<double> weights;  // one per seed
};

/// One particle per nonzero cell centre with weight rho dx dy.
std::pair<std::vector<double>, std::vector<double>> particles_from_density(const GridField& rho);

/// Particles left at their seeds for the whole grid; not a solution unless
/// the equation is trivial.
FlowMap frozen_flow(std::span<const double> seeds, std::size_t dim, const TimeGrid& grid);

/// How the remainders of the windows of one length are summarised.
enum class RemainderStatistic { RootMeanSquare, Max };

struct RemainderOptions {
  RemainderStatistic statistic = RemainderStatistic::RootMeanSquare;
  double min_window = 1.0 / 256.0;
  double max_window = 1.0 / 16.0;
  double exponent_threshold = 1.1;  // flagged below this
  double level_one_ratio = 0.5;     // flagged when |rho^natural| exceeds this share of the level-one terms
};

struct RemainderReport {
  std::vector<double> window_lengths;
  std::vector<std::vector<double>> remainders;  // [test][window length], summarised
  std::vector<double> exponents;                    // per test; +inf when the remainder vanishes
  std::vector<double> level_one_ratio;              // per test, at the smallest window
  bool flagged = false;
};

/// Evaluates
///   <rho^natural_st, phi> = <delta rho_st, phi> - int_s^t <rho b, grad phi>
///                           - <rho_s, A_st phi> - <rho_s, AA_st phi>
/// on the disjoint dyadic windows of each length in [min_window, max_window],
/// summarises each length by `statistic` and fits the decay exponent.
RemainderReport rpde_remainder_diagnostic(const ParticleDensity& rho, const DriftField& b, const DriverPair& driver,
                                          const TestFunctionSet& tests, const RemainderOptions& options = {});

}  // namespace roughflow
