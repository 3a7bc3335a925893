#pragma once

// Inefficient threshold detectors and click-pattern conditioning.

#include <cmath>
#include <array>
#include <optional>
#include <stdexcept>

#include "catsim/fock.hpp"

namespace catsim {

/// Conditional outcomes below this probability are degenerate.
inline constexpr double kProbabilityFloor = 1e-12;

struct DetectorModel {
  double eta = 1.0;

  explicit DetectorModel(double eta_ = 1.0) : eta(eta_) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("DetectorModel: eta must lie in [0, 1]");
  }
};

enum class Outcome { click, no_click };

struct ClickPattern {
  Outcome detector_a = Outcome::click;
  Outcome detector_b = Outcome::click;

  static constexpr ClickPattern both_click() { return {Outcome::click, Outcome::click}; }
  static constexpr std::array<ClickPattern, 4> all() {
    return {{{Outcome::click, Outcome::click},
             {Outcome::click, Outcome::no_click},
             {Outcome::no_click, Outcome::click},
             {Outcome::no_click, Outcome::no_click}}};
  }
};

/// Diagonal of the no-click element: (1 - eta)^n.
inline Eigen::VectorXd no_click_diagonal(const DetectorModel& model, int cutoff) {
  Eigen::VectorXd d(cutoff);
  double p = 1.0;
  for (int n = 0; n < cutoff; ++n) {
    d[n] = p;
    p *= 1.0 - model.eta;
  }
  return d;
}

inline Eigen::VectorXd povm_diagonal(const DetectorModel& model, Outcome outcome, int cutoff) {
  const Eigen::VectorXd none = no_click_diagonal(model, cutoff);
  return outcome == Outcome::no_click ? none : Eigen::VectorXd(Eigen::VectorXd::Ones(cutoff) - none);
}

inline RMatrix click_povm(const DetectorModel& model, int cutoff = kDefaultCutoff) {
  return povm_diagonal(model, Outcome::click, cutoff).asDiagonal();
}

struct ConditionalOutcome {
  /// Sub-normalized operator on the unmeasured mode; trace = probability.
  DensityOperator unnormalized;
  double probability;

  bool degenerate() const { return probability < kProbabilityFloor; }
  /// Unit-trace state, absent when degenerate.
  std::optional<DensityOperator> state() const {
    if (degenerate()) return std::nullopt;
    return unnormalized.normalized();
  }
};

/// Tolerated |psi|^2 shortfall beyond what the recorded truncation deficit explains.
inline constexpr double kConditionNormSlack = 1e-3;

/// rho = Tr_{t1,t2}[(I x P_o1 x P_o2) |psi><psi|] on a three-mode state.
inline ConditionalOutcome condition(const MultiModeState& psi, ModeIndex t1, ModeIndex t2, ClickPattern pattern,
                                    const DetectorModel& model) {
  if (psi.modes() != 3) throw ShapeError("condition: expects a three-mode state");
  psi.check_mode(t1);
  psi.check_mode(t2);
  if (t1 == t2) throw std::invalid_argument("condition: detector modes must differ");
  const double n2 = psi.squared_norm();
  if (n2 > 1.0 + 1e-10 || 1.0 - n2 > psi.norm_deficit() + kConditionNormSlack)
    throw std::domain_error("condition: input state is not normalized");

  const int d = psi.cutoff();
  const int keep = 3 - t1.value() - t2.value();
  const Eigen::VectorXd w1 = povm_diagonal(model, pattern.detector_a, d);
  const Eigen::VectorXd w2 = povm_diagonal(model, pattern.detector_b, d);
  const auto sk = static_cast<Eigen::Index>(psi.stride(keep));
  const auto s1 = static_cast<Eigen::Index>(psi.stride(t1.value()));
  const auto s2 = static_cast<Eigen::Index>(psi.stride(t2.value()));
  const CVector& amp = psi.amplitudes();

  // Weighted slices: column (k, l) holds sqrt(w1_k w2_l) psi[., k, l].
  CMatrix slices(d, static_cast<Eigen::Index>(d) * d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) {
      const double w = std::sqrt(w1[k] * w2[l]);
      const Eigen::Index col = static_cast<Eigen::Index>(k) * d + l;
      for (int f = 0; f < d; ++f) slices(f, col) = w * amp[f * sk + k * s1 + l * s2];
    }
  CMatrix rho = slices * slices.adjoint();
  const double p = rho.trace().real();
  return {DensityOperator(std::move(rho)), p};
}

}  // namespace catsim
