#pragma once

// The conditional cat-amplification iteration and its recursive schedule.
//
// Mode layout inside one iteration: 0 = a -> f (output), 1 = b -> g -> t1,
// 2 = c (auxiliary coherent state) -> t2. BS1 mixes (a, b); BS2 is a 50:50
// splitter on (g, c) with t1 the transmitted arm of g.

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "catsim/analytics.hpp"
#include "catsim/detection.hpp"
#include "catsim/fock.hpp"
#include "catsim/optics.hpp"
#include "catsim/states.hpp"

namespace catsim {

class DegenerateProbability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double wrap_phase(double phi) { return CssSpec(0.0, phi).reduced_phi(); }

struct StageParams {
  double alpha_in;
  double beta_in;
  double phi_a;
  double phi_b;
  BeamSplitterParams bs1;
  double gamma;
  double eta;

  /// BS1 reflectivity beta/A, transmittivity alpha/A and auxiliary amplitude
  /// 2 alpha beta / A with A = sqrt(alpha^2 + beta^2).
  static StageParams plan(double alpha, double beta, double phi_a, double phi_b, double eta = 1.0) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("StageParams::plan: amplitudes must be positive");
    const double amp = std::hypot(alpha, beta);
    const double r = beta / amp;
    const double t = std::sqrt(std::max(0.0, 1.0 - r * r));
    return {alpha, beta, phi_a, phi_b, BeamSplitterParams(r, t), 2.0 * alpha * beta / amp, DetectorModel(eta).eta};
  }

  CssSpec nominal_target() const { return CssSpec(std::hypot(alpha_in, beta_in), wrap_phase(phi_a + phi_b)); }
};

struct IterationResult {
  DensityOperator output;  // unit trace
  double probability;
  CssSpec nominal_target;
  double fidelity;
  double purity;
  /// Set when the truncation deficit exceeds kLeakageWarnThreshold.
  std::optional<double> leakage_warning;
  /// Input spectral weight dropped by the rank cap and eigenvalue floor.
  double discarded_weight = 0.0;
};

struct AmplifyOptions {
  double eigen_floor = 1e-10;
  int max_rank = 16;
};

namespace detail {

inline IterationResult finish(const CMatrix& accumulated, double probability, const CssSpec& target, double leakage,
                              double discarded) {
  if (!(probability >= kProbabilityFloor))
    throw DegenerateProbability("conditional probability " + std::to_string(probability) + " below floor");
  DensityOperator out = DensityOperator(CMatrix(accumulated / probability)).normalized();
  const MultiModeState ideal = css_state(target, out.cutoff());
  IterationResult res{out, probability, target, fidelity_mixed(out, ideal), out.purity(), std::nullopt, discarded};
  if (leakage > kLeakageWarnThreshold) res.leakage_warning = leakage;
  return res;
}

}  // namespace detail

/// Runs one iteration on spectral branches of the inputs and combines the
/// conditional outputs convexly.
inline IterationResult amplify_once(const DensityOperator& input_a, const DensityOperator& input_b,
                                    const StageParams& params, const AmplifyOptions& opts = {}) {
  const int d = input_a.cutoff();
  if (input_b.cutoff() != d) throw ShapeError("amplify_once: cutoff mismatch");
  if (std::abs(input_a.trace() - 1.0) > 1e-8 || std::abs(input_b.trace() - 1.0) > 1e-8)
    throw std::domain_error("amplify_once: inputs must have unit trace");

  const auto branches_a = input_a.branches(opts.eigen_floor, opts.max_rank);
  const auto branches_b = input_b.branches(opts.eigen_floor, opts.max_rank);
  double kept_a = 0.0, kept_b = 0.0;
  for (const auto& br : branches_a) kept_a += br.weight;
  for (const auto& br : branches_b) kept_b += br.weight;

  const BeamSplitterUnitary bs1(params.bs1, d);
  const BeamSplitterUnitary bs2(BeamSplitterParams::balanced(), d);
  const DetectorModel det(params.eta);
  const MultiModeState aux = coherent_state(params.gamma, d);

  CMatrix acc = CMatrix::Zero(d, d);
  double prob = 0.0;
  double leakage = 0.0;
  for (const auto& ba : branches_a) {
    for (const auto& bb : branches_b) {
      const double w = ba.weight * bb.weight;
      // BS1 touches only (a, b), so it is applied before the auxiliary mode is attached.
      const MultiModeState fg = apply_beam_splitter(tensor(ba.state, bb.state), ModeIndex(0), ModeIndex(1), bs1);
      const MultiModeState mixed = apply_beam_splitter(tensor(fg, aux), ModeIndex(1), ModeIndex(2), bs2);
      const ConditionalOutcome out = condition(mixed, ModeIndex(1), ModeIndex(2), ClickPattern::both_click(), det);
      acc += w * out.unnormalized.matrix();
      prob += w * out.probability;
      leakage += w * mixed.norm_deficit();
    }
  }
  const double kept = kept_a * kept_b;
  // Renormalize the kept branches so the probability refers to the full inputs' kept part.
  return detail::finish(acc / kept, prob / kept, params.nominal_target(), leakage / kept, std::max(0.0, 1.0 - kept));
}

inline IterationResult amplify_once(const MultiModeState& input_a, const MultiModeState& input_b,
                                    const StageParams& params, const AmplifyOptions& opts = {}) {
  return amplify_once(DensityOperator::projector(input_a), DensityOperator::projector(input_b), params, opts);
}

enum class SourceKind { ideal_css, squeezed_photon, mixed_photon };

struct SourceModel {
  SourceKind kind = SourceKind::squeezed_photon;
  /// Squeezing of the photon sources; unset means optimize_squeezing(alpha_i).
  std::optional<double> r;
  /// Photon production inefficiency (mixed_photon only).
  double p = 0.0;
  /// Relative phase of ideal-css sources.
  double phi = std::numbers::pi;

  static SourceModel ideal(double phi = std::numbers::pi) { return {SourceKind::ideal_css, std::nullopt, 0.0, phi}; }
  static SourceModel squeezed(std::optional<double> r = std::nullopt) { return {SourceKind::squeezed_photon, r, 0.0}; }
  static SourceModel mixed(double p, std::optional<double> r = std::nullopt) { return {SourceKind::mixed_photon, r, p}; }

  void validate() const {
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("SourceModel: p must lie in [0, 1)");
    if (kind != SourceKind::mixed_photon && p != 0.0) throw std::invalid_argument("SourceModel: p applies to mixed-photon only");
    if (r) (void)SqueezeSpec(*r);
  }

  /// Phase of the cat this source approximates.
  double nominal_phi() const { return kind == SourceKind::ideal_css ? wrap_phase(phi) : std::numbers::pi; }

  double squeezing_for(double alpha_i) const { return r ? *r : optimize_squeezing(alpha_i).x; }
};

/// (1 - p)|S1><S1| + p|S0><S0| with S0 = S(r)|0>, S1 = S(r)|1>.
inline DensityOperator mixed_inputs(const SourceModel& source, double alpha_i, int cutoff = kDefaultCutoff) {
  source.validate();
  if (source.kind != SourceKind::mixed_photon) throw std::invalid_argument("mixed_inputs: source must be mixed-photon");
  const SqueezeSpec sq(source.squeezing_for(alpha_i));
  const CVector s1 = squeezed_photon(sq, cutoff).amplitudes();
  const CVector s0 = squeezed_vacuum(sq, cutoff).amplitudes();
  CMatrix m = (1.0 - source.p) * s1 * s1.adjoint();
  if (source.p > 0.0) m += source.p * s0 * s0.adjoint();
  return DensityOperator(std::move(m));
}

inline DensityOperator source_state(const SourceModel& source, double alpha_i, int cutoff = kDefaultCutoff) {
  source.validate();
  switch (source.kind) {
    case SourceKind::ideal_css:
      return DensityOperator::projector(css_state(CssSpec(alpha_i, source.phi), cutoff));
    case SourceKind::squeezed_photon:
      return DensityOperator::projector(squeezed_photon(SqueezeSpec(source.squeezing_for(alpha_i)), cutoff));
    case SourceKind::mixed_photon:
      return mixed_inputs(source, alpha_i, cutoff);
  }
  throw std::logic_error("source_state: unknown source kind");
}

struct Schedule {
  int n_iterations;
  double alpha_target;
  double alpha_i;
  std::vector<StageParams> stages;

  /// Stage k combines two cats of nominal amplitude alpha_i sqrt(2)^k.
  static Schedule make(double alpha_target, int n, double source_phi = std::numbers::pi, double eta = 1.0) {
    if (n < 0) throw std::invalid_argument("Schedule: iteration count must be non-negative");
    if (!(alpha_target > 0.0)) throw std::invalid_argument("Schedule: target amplitude must be positive");
    Schedule s{n, alpha_target, alpha_target / std::pow(std::sqrt(2.0), n), {}};
    double amp = s.alpha_i;
    double phi = wrap_phase(source_phi);
    for (int k = 0; k < n; ++k) {
      s.stages.push_back(StageParams::plan(amp, amp, phi, phi, eta));
      amp *= std::sqrt(2.0);
      phi = wrap_phase(2.0 * phi);
    }
    return s;
  }

  double stage_input_amplitude(int k) const { return alpha_i * std::pow(std::sqrt(2.0), k); }
};

/// Entry 0 describes the source state itself (probability 1); entry k >= 1 is
/// the output of stage k, fed by two copies of entry k-1.
inline std::vector<IterationResult> run_schedule(const Schedule& sched, const SourceModel& source,
                                                 int cutoff = kDefaultCutoff, const AmplifyOptions& opts = {}) {
  if (static_cast<int>(sched.stages.size()) != sched.n_iterations)
    throw std::invalid_argument("run_schedule: stage list does not match iteration count");
  const DensityOperator initial = source_state(source, sched.alpha_i, cutoff);
  const CssSpec initial_target(sched.alpha_i, source.nominal_phi());
  std::vector<IterationResult> out;
  out.push_back({initial, 1.0, initial_target, fidelity_mixed(initial, css_state(initial_target, cutoff)),
                 initial.purity(), std::nullopt, 0.0});
  for (const StageParams& stage : sched.stages) {
    const DensityOperator& prev = out.back().output;
    out.push_back(amplify_once(prev, prev, stage, opts));
  }
  return out;
}

struct BestSchedule {
  int n_star;
  double f_star;
  std::vector<double> fidelity_by_n;  // index n
};

/// Largest target amplitude validated at the default cutoff.
inline constexpr double kMaxValidatedAlpha = 2.5;

inline BestSchedule best_schedule(double alpha_target, int max_n, const SourceModel& source,
                                  int cutoff = kDefaultCutoff, double eta = 1.0, const AmplifyOptions& opts = {}) {
  if (!(alpha_target > 0.0) || alpha_target > kMaxValidatedAlpha + 1e-12)
    throw std::invalid_argument("best_schedule: alpha_target must lie in (0, 2.5]");
  if (max_n < 0) throw std::invalid_argument("best_schedule: max_n must be non-negative");
  BestSchedule best{0, -1.0, {}};
  for (int n = 0; n <= max_n; ++n) {
    // Each n uses its own alpha_i, so an unset r is re-optimized per n.
    const Schedule sched = Schedule::make(alpha_target, n, source.nominal_phi(), eta);
    const double f = run_schedule(sched, source, cutoff, opts).back().fidelity;
    best.fidelity_by_n.push_back(f);
    if (f > best.f_star) {
      best.n_star = n;
      best.f_star = f;
    }
  }
  return best;
}

}  // namespace catsim
