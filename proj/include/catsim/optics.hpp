#pragma once

// Squeezing and beam-splitter unitaries on the truncated Fock basis.
//
// Beam-splitter convention (anchors everything downstream):
//   B(r, t) |alpha>|beta> = |t alpha + r beta> |-r alpha + t beta>
// equivalently a^dag -> t a^dag - r b^dag and b^dag -> r a^dag + t b^dag.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "catsim/fock.hpp"

namespace catsim {

/// S(r) = exp(-(r/2)(a^2 - a^dag^2)).
struct SqueezeSpec {
  double r = 0.0;

  explicit SqueezeSpec(double r_) : r(r_) {
    if (!std::isfinite(r) || std::abs(r) > 2.0)
      throw std::invalid_argument("SqueezeSpec: |r| must be finite and at most 2");
  }
};

struct BeamSplitterParams {
  double reflectivity;
  double transmittivity;

  BeamSplitterParams(double r, double t) : reflectivity(r), transmittivity(t) {
    // Negative reflectivity is allowed so that B(-r, t) is the inverse of B(r, t).
    if (!(std::abs(r) <= 1.0) || !(t >= 0.0 && t <= 1.0) || std::abs(r * r + t * t - 1.0) > 1e-12)
      throw std::invalid_argument("BeamSplitterParams: need |r|, t in [0,1] with r^2 + t^2 = 1");
  }

  static BeamSplitterParams balanced() { return {M_SQRT1_2, M_SQRT1_2}; }
  BeamSplitterParams inverse() const { return {-reflectivity, transmittivity}; }
};

/// Matrix exponential of the truncated generator. Columns within ~2 of the cutoff
/// are inaccurate; keep |r| <= 0.5 for quantitative work.
inline CMatrix squeeze_unitary(const SqueezeSpec& spec, int cutoff) {
  if (cutoff < 1) throw ShapeError("squeeze_unitary: cutoff must be positive");
  const RMatrix a = annihilation(cutoff);
  const RMatrix generator = -0.5 * spec.r * (a * a - a.transpose() * a.transpose());
  const RMatrix u = generator.exp();
  return u.cast<complex>();
}

/// Two-mode beam splitter stored block-by-block in total photon number N.
/// Block N acts on {|k, N-k>} for k in [lo(N), hi(N)], the in-cutoff members.
/// Blocks with N <= cutoff-1 are complete and exactly unitary; higher blocks are
/// the in-cutoff sub-matrices of the exact operator.
class BeamSplitterUnitary {
 public:
  BeamSplitterUnitary(const BeamSplitterParams& params, int cutoff) : params_(params), cutoff_(cutoff) {
    if (cutoff < 1) throw ShapeError("BeamSplitterUnitary: cutoff must be positive");
    const int max_total = 2 * (cutoff - 1);
    blocks_.reserve(static_cast<std::size_t>(max_total) + 1);
    std::vector<long double> lfact(static_cast<std::size_t>(max_total) + 2);
    for (std::size_t i = 0; i < lfact.size(); ++i) lfact[i] = std::lgamma(static_cast<long double>(i) + 1.0L);
    const long double r = params.reflectivity;
    const long double t = params.transmittivity;
    const auto binom = [&](int n, int k) { return std::exp(lfact[n] - lfact[k] - lfact[n - k]); };
    const auto ipow = [](long double x, int e) {
      long double out = 1.0L;
      for (int i = 0; i < e; ++i) out *= x;
      return out;
    };

    for (int total = 0; total <= max_total; ++total) {
      const int lo = low(total);
      const int hi = high(total);
      RMatrix block = RMatrix::Zero(hi - lo + 1, hi - lo + 1);
      for (int m = lo; m <= hi; ++m) {
        const int n = total - m;
        // (t a^dag - r b^dag)^m (r a^dag + t b^dag)^n / sqrt(m! n!) |0,0>
        std::vector<long double> col(static_cast<std::size_t>(total) + 1, 0.0L);
        for (int j = 0; j <= m; ++j) {
          const long double cj = binom(m, j) * ipow(t, j) * ipow(-r, m - j);
          for (int i = 0; i <= n; ++i) col[static_cast<std::size_t>(j + i)] += cj * binom(n, i) * ipow(r, i) * ipow(t, n - i);
        }
        for (int k = lo; k <= hi; ++k) {
          const long double scale = std::exp(0.5L * (lfact[k] + lfact[total - k] - lfact[m] - lfact[n]));
          block(k - lo, m - lo) = static_cast<double>(col[static_cast<std::size_t>(k)] * scale);
        }
      }
      blocks_.push_back(std::move(block));
    }
  }

  int cutoff() const { return cutoff_; }
  const BeamSplitterParams& params() const { return params_; }
  int max_total() const { return 2 * (cutoff_ - 1); }
  int low(int total) const { return std::max(0, total - (cutoff_ - 1)); }
  int high(int total) const { return std::min(total, cutoff_ - 1); }
  const RMatrix& block(int total) const { return blocks_.at(static_cast<std::size_t>(total)); }

  /// Dense (cutoff^2 x cutoff^2) form with row/column index k*cutoff + l for |k, l>.
  CMatrix dense() const {
    const int d = cutoff_;
    CMatrix u = CMatrix::Zero(d * d, d * d);
    for (int total = 0; total <= max_total(); ++total) {
      const int lo = low(total);
      const int hi = high(total);
      for (int k = lo; k <= hi; ++k)
        for (int m = lo; m <= hi; ++m) u(k * d + (total - k), m * d + (total - m)) = block(total)(k - lo, m - lo);
    }
    return u;
  }

 private:
  BeamSplitterParams params_;
  int cutoff_;
  std::vector<RMatrix> blocks_;
};

inline CMatrix beam_splitter_unitary(const BeamSplitterParams& params, int cutoff) {
  return BeamSplitterUnitary(params, cutoff).dense();
}

/// Applies `bs` with mode m1 as the first input/output arm and m2 as the second.
inline MultiModeState apply_beam_splitter(const MultiModeState& psi, ModeIndex m1, ModeIndex m2,
                                          const BeamSplitterUnitary& bs) {
  psi.check_mode(m1);
  psi.check_mode(m2);
  if (m1 == m2) throw std::invalid_argument("apply_beam_splitter: modes must differ");
  if (bs.cutoff() != psi.cutoff()) throw ShapeError("apply_beam_splitter: cutoff mismatch");

  const int d = psi.cutoff();
  const auto s1 = static_cast<Eigen::Index>(psi.stride(m1.value()));
  const auto s2 = static_cast<Eigen::Index>(psi.stride(m2.value()));
  const CVector& in = psi.amplitudes();
  CVector out = CVector::Zero(in.size());

  // Offsets of every index tuple whose m1 and m2 digits are zero.
  std::vector<Eigen::Index> bases{0};
  for (int m = 0; m < psi.modes(); ++m) {
    if (m == m1.value() || m == m2.value()) continue;
    const auto s = static_cast<Eigen::Index>(psi.stride(m));
    std::vector<Eigen::Index> next;
    next.reserve(bases.size() * static_cast<std::size_t>(d));
    for (auto b : bases)
      for (int i = 0; i < d; ++i) next.push_back(b + i * s);
    bases = std::move(next);
  }

  CVector x(d);
  CVector y(d);
  for (const auto base : bases) {
    for (int total = 0; total <= bs.max_total(); ++total) {
      const int lo = bs.low(total);
      const int size = bs.high(total) - lo + 1;
      for (int k = 0; k < size; ++k) x[k] = in[base + (lo + k) * s1 + (total - lo - k) * s2];
      y.head(size).noalias() = bs.block(total) * x.head(size);
      for (int k = 0; k < size; ++k) out[base + (lo + k) * s1 + (total - lo - k) * s2] = y[k];
    }
  }
  // Amplitude pushed past the cutoff is lost; record it as leakage.
  const double n2 = out.squaredNorm();
  const double lost = std::max(0.0, psi.squared_norm() - n2);
  if (n2 > 1.0 + 1e-12) out /= std::sqrt(n2);
  return MultiModeState(psi.modes(), d, std::move(out), psi.norm_deficit() + lost);
}

inline MultiModeState apply_beam_splitter(const MultiModeState& psi, ModeIndex m1, ModeIndex m2,
                                          const BeamSplitterParams& params) {
  return apply_beam_splitter(psi, m1, m2, BeamSplitterUnitary(params, psi.cutoff()));
}

}  // namespace catsim
