#pragma once

// Noise vector fields xi_1..xi_m and drifts b(t, x) on R^d.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roughflow/osgood.hpp"

namespace roughflow {

/// Noise fields xi_k : R^d -> R^d, k = 0..count-1, with their Jacobians.
///
/// Jacobians are d x d row-major, out[r * d + c] = d xi_k^r / d x_c. When no
/// Jacobian evaluator is supplied, central differences with step 1e-5 are
/// used and `has_exact_jacobian()` reports false.
class VectorFieldSet {
 public:
  using Field = std::function<void(std::size_t k, std::span<const double> x, std::span<double> out)>;
  using Divergence = std::function<double(std::size_t k, std::span<const double> x)>;

  VectorFieldSet(std::string name, std::size_t dim, std::size_t count, Field field,
                 Field jacobian = {}, Divergence divergence = {}, bool divergence_free = false);

  /// xi_k(x) = column k of the d x m row-major matrix sigma.
  static VectorFieldSet constant(std::size_t dim, std::size_t count, std::vector<double> sigma);
  /// xi_k(x) = A_k x with A_k d x d row-major.
  static VectorFieldSet linear(std::size_t dim, std::vector<std::vector<double>> matrices);
  /// count fields that vanish identically.
  static VectorFieldSet zero(std::size_t dim, std::size_t count);
  /// Two divergence-free shears on R^2: xi_0 = a (sin(kappa y), 0),
  /// xi_1 = a (0, sin(kappa x)).
  static VectorFieldSet shear2d(double amplitude, double wavenumber);

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  std::size_t count() const { return count_; }
  bool divergence_free() const { return divergence_free_; }
  bool has_exact_jacobian() const { return static_cast<bool>(jacobian_); }

  void eval(std::size_t k, std::span<const double> x, std::span<double> out) const { field_(k, x, out); }
  void jacobian(std::size_t k, std::span<const double> x, std::span<double> out) const;
  double divergence(std::size_t k, std::span<const double> x) const;

  /// Second-order map: out = sum_{j,k} D xi_k(x) xi_j(x) zz[j * m + k].
  /// `scratch` needs at least d * (m + d + 1) entries.
  void second_order(std::span<const double> x, std::span<const double> zz, std::span<double> out,
                    std::span<double> scratch) const;

 private:
  std::string name_;
  std::size_t dim_, count_;
  Field field_;
  Field jacobian_;
  Divergence divergence_;
  bool divergence_free_;
};

struct VectorFieldReport {
  double max_jacobian_error = 0.0;  // relative, vs central differences
  double max_divergence = 0.0;      // sampled |div xi_k|
};

/// Samples the fields at `probes` (row-major, d per point). Throws
/// ParameterError when the divergence-free flag is set but a sampled
/// divergence exceeds 1e-10, or when an exact Jacobian disagrees with
/// central differences by more than 1e-6 relative.
VectorFieldReport validate_vector_fields(const VectorFieldSet& xi, std::span<const double> probes);

/// Drift b(t, x) with its Osgood data: |b_t(x)| <= g_t and
/// |b_t(x) - b_t(y)| <= g_t h(|x - y|).
class DriftField {
 public:
  using Evaluator = std::function<void(double t, std::span<const double> x, std::span<double> out)>;
  using Divergence = std::function<double(double t, std::span<const double> x)>;
  using Schedule = std::function<double(double t)>;

  DriftField(std::string name, std::size_t dim, Evaluator eval, OsgoodModulus modulus, bool autonomous,
             Schedule bound = {}, Divergence divergence = {}, Schedule divergence_sup = {});

  static DriftField zero(std::size_t dim);
  /// b(x) = A x, A d x d row-major. Lipschitz with constant ||A||_F.
  static DriftField linear(std::size_t dim, std::vector<double> matrix);
  /// b(x) = c x, divergence c d.
  static DriftField scaled_identity(std::size_t dim, double c);
  /// Rigid rotation b(x) = omega (-x_2, x_1) on R^2.
  static DriftField rotation(double omega);
  /// Bounded log-Lipschitz drift on R: b(y) = sign(y) h(min(|y|, 1)) with h
  /// the log-Lipschitz modulus; |b| <= 1.
  static DriftField log_lipschitz_1d();

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  bool autonomous() const { return autonomous_; }
  const OsgoodModulus& modulus() const { return modulus_; }
  bool has_bound() const { return static_cast<bool>(bound_); }
  bool has_divergence() const { return static_cast<bool>(divergence_); }
  bool has_divergence_sup() const { return static_cast<bool>(divergence_sup_); }

  void eval(double t, std::span<const double> x, std::span<double> out) const { eval_(t, x, out); }
  double bound(double t) const;
  double divergence(double t, std::span<const double> x) const;
  /// sup_x |div b_t|; falls back to 0 for divergence-free builtins.
  double divergence_sup(double t) const;

  /// The drift of the time-reversed equation on [t_begin, t_end]:
  /// s -> -b(t_begin + t_end - s, x).
  DriftField reversed(double t_begin, double t_end) const;

 private:
  std::string name_;
  std::size_t dim_;
  Evaluator eval_;
  OsgoodModulus modulus_;
  bool autonomous_;
  Schedule bound_;
  Divergence divergence_;
  Schedule divergence_sup_;
};

struct DriftReport {
  double max_bound_ratio = 0.0;    // max |b_t(x)| / g_t
  double max_modulus_ratio = 0.0;  // max |b_t(x) - b_t(y)| / (g_t h(|x - y|))
};

/// Probes the bound and modulus assumptions at sampled points and pairs,
/// at time t. Ratios above 1 mean the stated assumptions fail.
DriftReport validate_drift(const DriftField& b, std::span<const double> probes, double t = 0.0);

}  // namespace roughflow
