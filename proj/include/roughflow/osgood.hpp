#pragma once

// Osgood moduli of continuity and the Bihari-Osgood comparison function
// M^h(alpha, beta) = G^{-1}(G(alpha) + beta), G(r) = int_{r0}^r dr / h(r).

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace roughflow {

class OsgoodModulus {
 public:
  using Evaluator = std::function<double(double)>;

  /// h(r) = L r.
  static OsgoodModulus linear(double lipschitz);
  /// h(r) = r (1 - ln r) on (0, 1), h(r) = r on [1, inf), h(0) = 0.
  static OsgoodModulus log_lipschitz();
  /// User modulus. Construction samples h on a log-spaced lattice and
  /// rejects it unless h(0) = 0, h is strictly increasing and, when
  /// `concave` is set, h(r)/r is nonincreasing.
  static OsgoodModulus custom(std::string name, Evaluator h, bool concave);

  double operator()(double r) const { return h_(r); }
  const std::string& name() const { return name_; }
  bool concave() const { return concave_; }

 private:
  OsgoodModulus(std::string name, Evaluator h, bool concave)
      : name_(std::move(name)), h_(std::move(h)), concave_(concave) {}

  std::string name_;
  Evaluator h_;
  bool concave_;
};

/// int_a^b dr / h(r) for 0 < a, b (negative when b < a).
double inverse_modulus_integral(const OsgoodModulus& h, double a, double b);

/// M^h(alpha, beta) with G anchored at r0. M(0, beta) = 0, M(alpha, 0) = alpha.
double bihari_bound(const OsgoodModulus& h, double alpha, double beta, double r0 = 1.0);

/// t -> M^h(K, int_0^t g) at each of `times`. `g_integral` must be
/// nondecreasing on the sampled times, starting from 0.
std::vector<double> osgood_ode_envelope(const OsgoodModulus& h, double k,
                                        const std::function<double(double)>& g_integral,
                                        std::span<const double> times);

}  // namespace roughflow
