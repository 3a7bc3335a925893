#pragma once

// Closed-form results for the amplification protocol and the 1-D optimizers
// used to locate squeezing optima.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

namespace catsim {

/// Click-click probability for ideal cats CSS_phi_a(alpha) and CSS_phi_b(beta)
/// through the planned circuit with perfect detectors.
inline double success_probability_formula(double alpha, double beta, double phi_a, double phi_b) {
  const double a2 = alpha * alpha;
  const double b2 = beta * beta;
  const double den = 2.0 * (1.0 + std::cos(phi_a) * std::exp(-2.0 * a2)) * (1.0 + std::cos(phi_b) * std::exp(-2.0 * b2));
  if (!(den > 1e-300) || a2 + b2 == 0.0)
    throw std::domain_error("success_probability_formula: null cat input");
  const double click = -std::expm1(-2.0 * a2 * b2 / (a2 + b2));
  return click * click * (1.0 + std::cos(phi_a + phi_b) * std::exp(-2.0 * (a2 + b2))) / den;
}

/// |<CSS_-(alpha)| S(r) |1>|^2.
inline double squeezed_photon_fidelity_formula(double r, double alpha) {
  if (!(alpha > 0.0)) throw std::domain_error("squeezed_photon_fidelity_formula: alpha must be positive");
  const double a2 = alpha * alpha;
  const double c = std::cosh(r);
  return 2.0 * a2 * std::exp(a2 * (std::tanh(r) - 1.0)) / (c * c * c * -std::expm1(-2.0 * a2));
}

/// Error probability of telling |alpha> from |-alpha> by the sign of one quadrature.
inline double homodyne_error(double alpha) {
  if (!(alpha >= 0.0)) throw std::domain_error("homodyne_error: alpha must be >= 0");
  return 0.5 * std::erfc(std::sqrt(2.0) * alpha);
}

struct ScalarMaximum {
  double x;
  double value;
};

/// Maximizes a unimodal f on [lo, hi] by Brent's method.
template <class F>
ScalarMaximum maximize_bracketed(F&& f, double lo, double hi, int bits = std::numeric_limits<double>::digits / 2) {
  if (!(lo < hi)) throw std::invalid_argument("maximize_bracketed: empty bracket");
  std::uintmax_t iters = 200;
  const auto [x, neg] = boost::math::tools::brent_find_minima([&](double v) { return -f(v); }, lo, hi, bits, iters);
  return {x, -neg};
}

/// Largest squeezing explored by optimize_squeezing.
inline constexpr double kMaxSqueeze = 2.0;

/// Maximizes squeezed_photon_fidelity_formula over r in [0, kMaxSqueeze].
/// Brent locates the peak, then the analytic stationarity condition
/// alpha^2 sech^2 r = 3 tanh r is polished by TOMS 748 inside the Brent bracket.
inline ScalarMaximum optimize_squeezing(double alpha) {
  if (!(alpha > 0.0)) throw std::domain_error("optimize_squeezing: alpha must be positive");
  const auto fid = [alpha](double r) { return squeezed_photon_fidelity_formula(r, alpha); };
  const ScalarMaximum coarse = maximize_bracketed(fid, 0.0, kMaxSqueeze);

  const double a2 = alpha * alpha;
  // Sign of dF/dr; it is strictly decreasing in r.
  const auto slope = [a2](double r) {
    const double c = std::cosh(r);
    return a2 / (c * c) - 3.0 * std::tanh(r);
  };
  double lo = std::max(0.0, coarse.x - 1e-3);
  double hi = std::min(kMaxSqueeze, coarse.x + 1e-3);
  if (slope(lo) <= 0.0) lo = 0.0;
  if (slope(hi) >= 0.0) hi = kMaxSqueeze;
  if (slope(lo) * slope(hi) > 0.0) return coarse;  // optimum on the boundary

  std::uintmax_t iters = 100;
  const auto [a, b] = boost::math::tools::toms748_solve(slope, lo, hi, boost::math::tools::eps_tolerance<double>(), iters);
  const double r = 0.5 * (a + b);
  return {r, fid(r)};
}

}  // namespace catsim
