#include "roughflow/osgood.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "roughflow/errors.hpp"

namespace roughflow {

OsgoodModulus OsgoodModulus::linear(double lipschitz) {
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz))
    throw ParameterError("linear modulus needs a positive constant");
  return OsgoodModulus("linear", [lipschitz](double r) { return lipschitz * r; }, true);
}

OsgoodModulus OsgoodModulus::log_lipschitz() {
  return OsgoodModulus(
      "log-lipschitz",
      [](double r) {
        if (r <= 0.0) return 0.0;
        return r < 1.0 ? r * (1.0 - std::log(r)) : r;
      },
      true);
}

OsgoodModulus OsgoodModulus::custom(std::string name, Evaluator h, bool concave) {
  if (!h) throw ParameterError("custom modulus needs an evaluator");
  if (h(0.0) != 0.0) throw ParameterError("modulus '" + name + "' must vanish at 0");
  double prev_r = 0.0, prev_h = 0.0;
  for (int e = -120; e <= 60; ++e) {
    const double r = std::pow(10.0, e / 10.0);
    const double v = h(r);
    if (!std::isfinite(v) || !(v > prev_h))
      throw ParameterError("modulus '" + name + "' is not strictly increasing near r = " + std::to_string(r));
    if (concave && prev_r > 0.0 && v / r > prev_h / prev_r * (1.0 + 1e-12))
      throw ParameterError("modulus '" + name + "' flagged concave but h(r)/r increases near r = " +
                           std::to_string(r));
    prev_r = r;
    prev_h = v;
  }
  return OsgoodModulus(std::move(name), std::move(h), concave);
}

namespace {

// Breakpoints where the builtin moduli change formula or the integrand
// varies fastest; quadrature pieces never straddle them.
constexpr double kBreakpoints[] = {1e-3, 1.0};

double integrate_piece(const OsgoodModulus& h, double a, double b) {
  // Substituting r = e^s turns dr / h(r) into r / h(r) ds, smooth for the
  // moduli of interest, and keeps every evaluation strictly positive.
  // The interval is mapped onto [-1, 1] first: the library compares an
  // unscaled local error against a scaled tolerance, which otherwise forces
  // full-depth recursion on short intervals.
  const double mid = 0.5 * (std::log(b) + std::log(a)), half = 0.5 * (std::log(b) - std::log(a));
  auto integrand = [&](double u) {
    const double r = std::exp(mid + half * u);
    return half * r / h(r);
  };
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, -1.0, 1.0, 15, 1e-14, &error);
  if (!std::isfinite(value) || error > 1e-9 * std::max(1.0, std::abs(value)))
    throw NumericError("quadrature of 1/h on [" + std::to_string(a) + ", " + std::to_string(b) +
                       "] did not converge (error estimate " + std::to_string(error) + ")");
  return value;
}

}  // namespace

double inverse_modulus_integral(const OsgoodModulus& h, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw ParameterError("inverse modulus integral needs positive finite endpoints");
  if (a == b) return 0.0;
  if (b < a) return -inverse_modulus_integral(h, b, a);
  double total = 0.0, lo = a;
  for (double cut : kBreakpoints) {
    if (cut > lo && cut < b) {
      total += integrate_piece(h, lo, cut);
      lo = cut;
    }
  }
  return total + integrate_piece(h, lo, b);
}

double bihari_bound(const OsgoodModulus& h, double alpha, double beta, double r0) {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
    throw ParameterError("bihari_bound needs finite nonnegative arguments");
  if (!(r0 > 0.0)) throw ParameterError("bihari_bound anchor must be positive");
  if (alpha == 0.0) return 0.0;
  if (beta == 0.0) return alpha;

  // G(M) = G(alpha) + beta is solved by Newton's method on
  // F(r) = int_alpha^r dr / h - beta. F is increasing and concave, so the
  // iterates increase monotonically towards the root; each step only
  // integrates over the newly covered interval. The result does not
  // depend on the anchor r0.
  double r = alpha, covered = 0.0;
  for (int it = 0; it < 500; ++it) {
    const double hr = h(r);
    if (!(hr > 0.0) || !std::isfinite(hr)) throw NumericError("bihari_bound: modulus not positive at r = " + std::to_string(r));
    const double next = r + (beta - covered) * hr;
    if (!std::isfinite(next)) throw NumericError("bihari_bound: comparison solution blows up");
    if (next - r <= 1e-14 * r) return next;
    covered += inverse_modulus_integral(h, r, next);
    r = next;
  }
  throw NumericError("bihari_bound: Newton iteration did not converge");
}

std::vector<double> osgood_ode_envelope(const OsgoodModulus& h, double k,
                                        const std::function<double(double)>& g_integral,
                                        std::span<const double> times) {
  std::vector<double> out;
  out.reserve(times.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double g = g_integral(times[i]);
    if (!(g >= prev) || !std::isfinite(g))
      throw ParameterError("osgood_ode_envelope: schedule decreases (or is negative) at t = " +
                           std::to_string(times[i]));
    prev = g;
    out.push_back(bihari_bound(h, k, g));
  }
  return out;
}

}  // namespace roughflow
