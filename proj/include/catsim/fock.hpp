#pragma once

// Dense linear algebra over truncated bosonic Fock spaces.
//
// A MultiModeState stores cutoff^modes complex amplitudes with mode 0 the
// slowest-varying index. DensityOperator only ever lives on a single mode;
// multimode mixed states are represented upstream as weighted pure branches.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace catsim {

using complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;

inline constexpr int kDefaultCutoff = 30;

/// Norm deficit above which a truncation warning is attached to results.
inline constexpr double kLeakageWarnThreshold = 1e-6;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ModeIndex {
 public:
  constexpr explicit ModeIndex(int value) : value_(value) {}
  constexpr int value() const { return value_; }
  friend constexpr bool operator==(ModeIndex, ModeIndex) = default;

 private:
  int value_;
};

namespace detail {

inline std::size_t ipow(std::size_t base, int exp) {
  std::size_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

}  // namespace detail

/// Pure state on `modes` modes, each truncated to `cutoff` Fock levels.
class MultiModeState {
 public:
  MultiModeState(int modes, int cutoff, CVector amplitudes, double norm_deficit = 0.0)
      : MultiModeState(modes, cutoff, std::move(amplitudes), norm_deficit, true) {}

  /// Operator images (e.g. n|2>) are ordinary vectors: shape is checked, norm is not.
  static MultiModeState unnormalized(int modes, int cutoff, CVector amplitudes) {
    return MultiModeState(modes, cutoff, std::move(amplitudes), 0.0, false);
  }

  /// Single-mode state; the vector length is the cutoff.
  static MultiModeState single(CVector amplitudes, double norm_deficit = 0.0) {
    const int cutoff = static_cast<int>(amplitudes.size());
    return MultiModeState(1, cutoff, std::move(amplitudes), norm_deficit);
  }

  /// Scales an arbitrary nonzero vector to unit norm, recording 1 - |v|^2 as the deficit.
  static MultiModeState normalized(int modes, int cutoff, CVector v) {
    const double n2 = v.squaredNorm();
    if (!(n2 > 0.0)) throw std::domain_error("MultiModeState: cannot normalize the null vector");
    v /= std::sqrt(n2);
    return MultiModeState(modes, cutoff, std::move(v), std::max(0.0, 1.0 - n2));
  }

  int modes() const { return modes_; }
  int cutoff() const { return cutoff_; }
  const CVector& amplitudes() const { return amps_; }
  double squared_norm() const { return amps_.squaredNorm(); }
  /// 1 - |psi|^2 measured before the constructor renormalized (0 when exact).
  double norm_deficit() const { return deficit_; }
  bool leaky() const { return deficit_ > kLeakageWarnThreshold; }

  /// Stride of mode m in the flat amplitude vector.
  std::size_t stride(int m) const { return detail::ipow(static_cast<std::size_t>(cutoff_), modes_ - 1 - m); }

  complex at(std::initializer_list<int> idx) const {
    if (static_cast<int>(idx.size()) != modes_) throw ShapeError("MultiModeState::at: wrong index arity");
    std::size_t flat = 0;
    for (int i : idx) {
      if (i < 0 || i >= cutoff_) throw std::out_of_range("MultiModeState::at: Fock index out of range");
      flat = flat * static_cast<std::size_t>(cutoff_) + static_cast<std::size_t>(i);
    }
    return amps_[static_cast<Eigen::Index>(flat)];
  }

  void check_mode(ModeIndex m) const {
    if (m.value() < 0 || m.value() >= modes_)
      throw std::out_of_range("mode index " + std::to_string(m.value()) + " out of range for " +
                              std::to_string(modes_) + "-mode state");
  }

 private:
  MultiModeState(int modes, int cutoff, CVector amplitudes, double norm_deficit, bool check_norm)
      : modes_(modes), cutoff_(cutoff), amps_(std::move(amplitudes)), deficit_(norm_deficit) {
    if (modes < 1) throw ShapeError("MultiModeState: mode count must be positive");
    if (cutoff < 1) throw ShapeError("MultiModeState: cutoff must be positive");
    if (static_cast<std::size_t>(amps_.size()) != detail::ipow(static_cast<std::size_t>(cutoff), modes))
      throw ShapeError("MultiModeState: amplitude count does not match cutoff^modes");
    const double n2 = amps_.squaredNorm();
    if (!std::isfinite(n2)) throw std::domain_error("MultiModeState: non-finite amplitudes");
    if (check_norm && (!(n2 > 0.0) || n2 > 1.0 + 1e-12))
      throw std::domain_error("MultiModeState: squared norm " + std::to_string(n2) + " outside (0, 1]");
  }

  int modes_;
  int cutoff_;
  CVector amps_;
  double deficit_;
};

/// Hermitian positive semidefinite operator on one truncated mode.
/// Sub-normalized operators carry a conditioning probability as their trace.
class DensityOperator {
 public:
  explicit DensityOperator(CMatrix m) {
    if (m.rows() != m.cols() || m.rows() < 1) throw ShapeError("DensityOperator: matrix must be square");
    const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-10) throw std::domain_error("DensityOperator: matrix is not Hermitian (" + std::to_string(herm) + ")");
    mat_ = (m + m.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(mat_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw std::domain_error("DensityOperator: matrix is not positive semidefinite");
    trace_ = mat_.trace().real();
    if (trace_ > 1.0 + 1e-10) throw std::domain_error("DensityOperator: trace exceeds one");
  }

  static DensityOperator projector(const MultiModeState& psi) {
    if (psi.modes() != 1) throw ShapeError("DensityOperator::projector: state must be single-mode");
    return DensityOperator(psi.amplitudes() * psi.amplitudes().adjoint());
  }

  int cutoff() const { return static_cast<int>(mat_.rows()); }
  const CMatrix& matrix() const { return mat_; }
  double trace() const { return trace_; }
  double purity() const { return (mat_ * mat_).trace().real(); }

  /// Unit-trace copy with round-off negative eigenvalues clamped to zero.
  DensityOperator normalized() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(mat_);
    Eigen::VectorXd w = es.eigenvalues().cwiseMax(0.0);
    const double total = w.sum();
    if (!(total > 0.0)) throw std::domain_error("DensityOperator::normalized: zero operator");
    CMatrix m = es.eigenvectors() * (w / total).asDiagonal() * es.eigenvectors().adjoint();
    return DensityOperator(std::move(m));
  }

  struct Branch {
    double weight;
    MultiModeState state;
  };

  /// Spectral branches sorted by decreasing weight; eigenvalues below `floor` are dropped
  /// and at most `max_rank` branches are kept.
  std::vector<Branch> branches(double floor = 1e-10, int max_rank = 16) const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(mat_);
    std::vector<Branch> out;
    const auto& w = es.eigenvalues();
    for (Eigen::Index i = w.size() - 1; i >= 0 && static_cast<int>(out.size()) < max_rank; --i) {
      if (w[i] < floor) break;
      CVector v = es.eigenvectors().col(i);
      // Fix the gauge so identical operators give identical branch vectors.
      Eigen::Index pivot = 0;
      v.cwiseAbs().maxCoeff(&pivot);
      v *= std::conj(v[pivot]) / std::abs(v[pivot]);
      out.push_back({w[i], MultiModeState::normalized(1, cutoff(), std::move(v))});
    }
    return out;
  }

 private:
  CMatrix mat_;
  double trace_ = 0.0;
};

inline MultiModeState tensor(const MultiModeState& a, const MultiModeState& b) {
  if (a.cutoff() != b.cutoff()) throw ShapeError("tensor: cutoff mismatch");
  const auto& va = a.amplitudes();
  const auto& vb = b.amplitudes();
  CVector out(va.size() * vb.size());
  for (Eigen::Index i = 0; i < va.size(); ++i) out.segment(i * vb.size(), vb.size()) = va[i] * vb;
  const double da = a.norm_deficit();
  const double db = b.norm_deficit();
  return MultiModeState(a.modes() + b.modes(), a.cutoff(), std::move(out), da + db - da * db);
}

/// Reduced operator of mode `keep`; its trace equals |psi|^2.
inline DensityOperator partial_trace_to_mode(const MultiModeState& psi, ModeIndex keep) {
  if (psi.modes() < 2) throw ShapeError("partial_trace_to_mode: state needs at least two modes");
  psi.check_mode(keep);
  const auto d = static_cast<std::size_t>(psi.cutoff());
  const std::size_t inner = psi.stride(keep.value());
  const std::size_t outer = psi.amplitudes().size() / (inner * d);
  // View amplitudes as [outer][d][inner]; gather columns indexed by (outer, inner).
  CMatrix slices(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(outer * inner));
  const auto& amp = psi.amplitudes();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t i = 0; i < inner; ++i)
        slices(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(o * inner + i)) =
            amp[static_cast<Eigen::Index>((o * d + k) * inner + i)];
  return DensityOperator(slices * slices.adjoint());
}

inline complex inner_product(const MultiModeState& bra, const MultiModeState& ket) {
  if (bra.modes() != ket.modes() || bra.cutoff() != ket.cutoff()) throw ShapeError("inner_product: shape mismatch");
  return bra.amplitudes().dot(ket.amplitudes());
}

inline double fidelity_pure(const MultiModeState& a, const MultiModeState& b) {
  if (a.modes() != b.modes() || a.cutoff() != b.cutoff()) throw ShapeError("fidelity_pure: shape mismatch");
  return std::norm(inner_product(a, b));
}

inline double fidelity_mixed(const DensityOperator& rho, const MultiModeState& psi) {
  if (psi.modes() != 1 || psi.cutoff() != rho.cutoff()) throw ShapeError("fidelity_mixed: dimension mismatch");
  const auto& v = psi.amplitudes();
  return v.dot(rho.matrix() * v).real();
}

/// Contracts `op` against the index of mode `m`. The result is returned as-is
/// (no renormalization), so non-unitary operators give unnormalized vectors.
inline MultiModeState apply_single_mode(const CMatrix& op, const MultiModeState& psi, ModeIndex m) {
  psi.check_mode(m);
  const auto d = static_cast<Eigen::Index>(psi.cutoff());
  if (op.rows() != d || op.cols() != d) throw ShapeError("apply_single_mode: operator dimension mismatch");
  const auto inner = static_cast<Eigen::Index>(psi.stride(m.value()));
  const Eigen::Index outer = psi.amplitudes().size() / (inner * d);
  const auto& in = psi.amplitudes();
  CVector out = CVector::Zero(in.size());
  for (Eigen::Index o = 0; o < outer; ++o) {
    const Eigen::Index base = o * d * inner;
    for (Eigen::Index k = 0; k < d; ++k)
      for (Eigen::Index j = 0; j < d; ++j) {
        const complex c = op(k, j);
        if (c == complex{}) continue;
        out.segment(base + k * inner, inner) += c * in.segment(base + j * inner, inner);
      }
  }
  return MultiModeState::unnormalized(psi.modes(), psi.cutoff(), std::move(out));
}

inline RMatrix annihilation(int cutoff) {
  RMatrix a = RMatrix::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline RMatrix number_operator(int cutoff) {
  RMatrix n = RMatrix::Zero(cutoff, cutoff);
  for (int i = 0; i < cutoff; ++i) n(i, i) = i;
  return n;
}

inline double expectation(const MultiModeState& psi, const CMatrix& op) {
  if (psi.modes() != 1) throw ShapeError("expectation: state must be single-mode");
  return psi.amplitudes().dot(op * psi.amplitudes()).real();
}

}  // namespace catsim
