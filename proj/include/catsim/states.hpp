#pragma once

// Constructors for the single-mode states used by the amplification protocol.
// Every constructor normalizes numerically and records the truncation deficit.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "catsim/fock.hpp"
#include "catsim/optics.hpp"

namespace catsim {

/// Ideal cat N (|alpha> + e^{i phi} |-alpha>); phi = pi is odd, phi = 0 even.
struct CssSpec {
  double alpha = 0.0;
  double phi = 0.0;

  CssSpec(double alpha_, double phi_) : alpha(alpha_), phi(phi_) {
    if (!std::isfinite(alpha) || alpha < 0.0) throw std::invalid_argument("CssSpec: alpha must be finite and >= 0");
    if (!std::isfinite(phi)) throw std::invalid_argument("CssSpec: phi must be finite");
  }

  static CssSpec odd(double alpha) { return {alpha, std::numbers::pi}; }
  static CssSpec even(double alpha) { return {alpha, 0.0}; }

  /// Phase reduced to [0, 2 pi).
  double reduced_phi() const {
    const double two_pi = 2.0 * std::numbers::pi;
    double p = std::fmod(phi, two_pi);
    if (p < 0.0) p += two_pi;
    if (two_pi - p < 1e-12) p = 0.0;
    return p;
  }
};

inline MultiModeState fock_state(int n, int cutoff = kDefaultCutoff) {
  if (cutoff < 1) throw ShapeError("fock_state: cutoff must be positive");
  if (n < 0 || n >= cutoff) throw std::out_of_range("fock_state: n must lie in [0, cutoff)");
  CVector v = CVector::Zero(cutoff);
  v[n] = 1.0;
  return MultiModeState::single(std::move(v));
}

namespace detail {

/// Unnormalized truncated Fock expansion e^{-|a|^2/2} a^n / sqrt(n!).
inline CVector coherent_series(complex alpha, int cutoff) {
  CVector v(cutoff);
  v[0] = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < cutoff; ++n) v[n] = v[n - 1] * alpha / std::sqrt(static_cast<double>(n));
  return v;
}

}  // namespace detail

inline MultiModeState coherent_state(complex alpha, int cutoff = kDefaultCutoff) {
  if (cutoff < 1) throw ShapeError("coherent_state: cutoff must be positive");
  return MultiModeState::normalized(1, cutoff, detail::coherent_series(alpha, cutoff));
}

inline MultiModeState css_state(const CssSpec& spec, int cutoff = kDefaultCutoff) {
  if (cutoff < 1) throw ShapeError("css_state: cutoff must be positive");
  const CVector plus = detail::coherent_series(spec.alpha, cutoff);
  const double phi = spec.reduced_phi();
  CVector v(cutoff);
  if (std::abs(phi - std::numbers::pi) < 1e-15 || phi == 0.0) {
    // Exact parity: |-alpha> differs from |alpha> only by (-1)^n.
    const double sign = phi == 0.0 ? 1.0 : -1.0;
    for (int n = 0; n < cutoff; ++n) v[n] = plus[n] * (1.0 + sign * ((n % 2) ? -1.0 : 1.0));
  } else {
    const complex phase = std::polar(1.0, phi);
    for (int n = 0; n < cutoff; ++n) v[n] = plus[n] * (1.0 + phase * ((n % 2) ? -1.0 : 1.0));
  }
  if (!(v.squaredNorm() > 0.0)) throw std::invalid_argument("css_state: alpha = 0 with phi = pi is the null vector");
  // Deficit relative to the closed-form normalization 2(1 + cos(phi) e^{-2 alpha^2}).
  const double exact = 2.0 * (1.0 + std::cos(phi) * std::exp(-2.0 * spec.alpha * spec.alpha));
  const double n2 = v.squaredNorm();
  auto psi = MultiModeState::normalized(1, cutoff, std::move(v));
  const double deficit = exact > 0.0 ? std::max(0.0, 1.0 - n2 / exact) : 0.0;
  return MultiModeState(1, cutoff, psi.amplitudes(), deficit);
}

/// S(r)|1> from its closed-form odd-photon series, evaluated in log space.
inline MultiModeState squeezed_photon(const SqueezeSpec& spec, int cutoff = kDefaultCutoff) {
  if (cutoff < 2) throw ShapeError("squeezed_photon: cutoff must be at least 2");
  const double r = spec.r;
  const double th = std::tanh(r);
  const double lcosh = std::log(std::cosh(r));
  CVector v = CVector::Zero(cutoff);
  for (int n = 0; 2 * n + 1 < cutoff; ++n) {
    // tanh^n sqrt((2n+1)!) / (cosh^{3/2} 2^n n!)
    const double log_mag = 0.5 * std::lgamma(2.0 * n + 2.0) - n * std::log(2.0) - std::lgamma(n + 1.0) - 1.5 * lcosh;
    const double t_pow = n == 0 ? 1.0 : std::pow(th, n);
    v[2 * n + 1] = t_pow * std::exp(log_mag);
  }
  return MultiModeState::normalized(1, cutoff, std::move(v));
}

/// S(r)|0>, taken from the squeeze unitary so the sign convention has one source.
inline MultiModeState squeezed_vacuum(const SqueezeSpec& spec, int cutoff = kDefaultCutoff) {
  CVector v = squeeze_unitary(spec, cutoff).col(0);
  for (int n = 1; n < cutoff; n += 2) v[n] = 0.0;
  return MultiModeState::normalized(1, cutoff, std::move(v));
}

}  // namespace catsim
