#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "catsim/detection.hpp"
#include "catsim/optics.hpp"
#include "catsim/states.hpp"

using namespace catsim;

namespace {

MultiModeState random_three_mode(int cutoff, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd;
  CVector v(cutoff * cutoff * cutoff);
  for (auto& x : v) x = complex(nd(gen), nd(gen));
  return MultiModeState::normalized(3, cutoff, v);
}

/// Both beam splitters applied to two ideal odd cats and the auxiliary field, built by hand.
MultiModeState ideal_odd_pair_after_circuit(double ai) {
  const auto odd = css_state(CssSpec::odd(ai));
  const auto fg = apply_beam_splitter(tensor(odd, odd), ModeIndex(0), ModeIndex(1), BeamSplitterParams::balanced());
  return apply_beam_splitter(tensor(fg, coherent_state(std::sqrt(2.0) * ai)), ModeIndex(1), ModeIndex(2),
                             BeamSplitterParams::balanced());
}

}  // namespace

TEST(ClickPovm, PerfectDeadAndHalfEfficient) {
  const RMatrix perfect = click_povm(DetectorModel(1.0), 30);
  EXPECT_EQ(perfect(0, 0), 0.0);
  for (int n = 1; n < 30; ++n) EXPECT_EQ(perfect(n, n), 1.0);
  EXPECT_EQ((click_povm(DetectorModel(0.0), 30)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(click_povm(DetectorModel(0.5), 30)(2, 2), 0.75);
  EXPECT_THROW(DetectorModel(1.5), std::invalid_argument);
  EXPECT_THROW(DetectorModel(-0.1), std::invalid_argument);
}

TEST(ClickPovm, CompletenessIsExact) {
  for (double eta : {0.0, 0.13, 0.5, 0.9, 1.0}) {
    const DetectorModel m(eta);
    const Eigen::VectorXd sum = povm_diagonal(m, Outcome::click, 30) + povm_diagonal(m, Outcome::no_click, 30);
    for (int n = 0; n < 30; ++n) EXPECT_EQ(sum[n], 1.0) << "eta=" << eta << " n=" << n;
  }
}

TEST(Condition, FourPatternsSumToOne) {
  for (unsigned seed = 1; seed <= 4; ++seed) {
    const auto psi = random_three_mode(8, seed);
    for (double eta : {0.2, 0.7, 1.0}) {
      double total = 0.0;
      for (const auto pattern : ClickPattern::all()) total += condition(psi, ModeIndex(1), ModeIndex(2), pattern, DetectorModel(eta)).probability;
      EXPECT_NEAR(total, 1.0, 1e-10);
    }
  }
}

TEST(Condition, MatchesExplicitProjectorFormula) {
  // Oracle: brute-force sum over all index pairs with explicit POVM weights.
  const int d = 5;
  const auto psi = random_three_mode(d, 17);
  const DetectorModel m(0.6);
  const auto out = condition(psi, ModeIndex(0), ModeIndex(2), {Outcome::click, Outcome::no_click}, m);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      complex acc = 0.0;
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          const double w = (1.0 - std::pow(0.4, k)) * std::pow(0.4, l);
          acc += w * psi.at({k, i, l}) * std::conj(psi.at({k, j, l}));
        }
      EXPECT_NEAR(std::abs(out.unnormalized.matrix()(i, j) - acc), 0.0, 1e-14);
    }
}

TEST(Condition, IdealCatsAcceptedBranch) {
  const double ai = M_SQRT1_2;
  const auto psi = ideal_odd_pair_after_circuit(ai);
  const auto out = condition(psi, ModeIndex(1), ModeIndex(2), ClickPattern::both_click(), DetectorModel(1.0));
  ASSERT_FALSE(out.degenerate());
  EXPECT_GE(fidelity_mixed(*out.state(), css_state(CssSpec::even(std::sqrt(2.0) * ai))), 1.0 - 1e-9);
  EXPECT_NEAR(out.probability, 0.2200, 1e-4);
}

TEST(Condition, IdealCatsRejectedBranch) {
  const auto psi = ideal_odd_pair_after_circuit(M_SQRT1_2);
  const auto out = condition(psi, ModeIndex(1), ModeIndex(2), {Outcome::no_click, Outcome::no_click}, DetectorModel(1.0));
  ASSERT_FALSE(out.degenerate());
  EXPECT_LT(fidelity_mixed(*out.state(), css_state(CssSpec::even(1.0))), 0.6);
}

TEST(Condition, EfficiencyInvarianceForIdealCats) {
  const auto psi = ideal_odd_pair_after_circuit(M_SQRT1_2);
  const auto ref = *condition(psi, ModeIndex(1), ModeIndex(2), ClickPattern::both_click(), DetectorModel(1.0)).state();
  double last_p = 0.0;
  for (double eta : {0.05, 0.1, 0.3, 0.5, 0.8, 1.0}) {
    const auto out = condition(psi, ModeIndex(1), ModeIndex(2), ClickPattern::both_click(), DetectorModel(eta));
    EXPECT_LT((out.state()->matrix() - ref.matrix()).cwiseAbs().maxCoeff(), 1e-9) << "eta=" << eta;
    EXPECT_GT(out.probability, last_p);
    last_p = out.probability;
  }
}

TEST(Condition, VacuumOnDetectorNeverClicks) {
  // |x>_f |0>_t1 |y>_t2: detector A sees vacuum, so A = click has probability exactly 0.
  const auto psi = tensor(tensor(coherent_state(0.9, 10), fock_state(0, 10)), coherent_state(1.2, 10));
  const auto out = condition(psi, ModeIndex(1), ModeIndex(2), ClickPattern::both_click(), DetectorModel(1.0));
  EXPECT_EQ(out.probability, 0.0);
  EXPECT_TRUE(out.degenerate());
  EXPECT_FALSE(out.state().has_value());
}

TEST(Condition, OutputIsPhysical) {
  for (unsigned seed = 30; seed < 34; ++seed) {
    const auto psi = random_three_mode(7, seed);
    for (const auto pattern : ClickPattern::all()) {
      const auto out = condition(psi, ModeIndex(0), ModeIndex(1), pattern, DetectorModel(0.8));
      EXPECT_LE(out.probability, 1.0 + 1e-12);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(out.unnormalized.matrix());
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
    }
  }
}

TEST(Condition, Errors) {
  const auto psi = random_three_mode(4, 2);
  EXPECT_THROW(condition(psi, ModeIndex(1), ModeIndex(1), ClickPattern::both_click(), DetectorModel()), std::invalid_argument);
  EXPECT_THROW(condition(psi, ModeIndex(1), ModeIndex(3), ClickPattern::both_click(), DetectorModel()), std::out_of_range);
  EXPECT_THROW(condition(tensor(fock_state(0, 4), fock_state(0, 4)), ModeIndex(0), ModeIndex(1), ClickPattern::both_click(),
                         DetectorModel()),
               ShapeError);
  const auto half = MultiModeState(3, 4, psi.amplitudes() * std::sqrt(0.5));
  EXPECT_THROW(condition(half, ModeIndex(1), ModeIndex(2), ClickPattern::both_click(), DetectorModel()), std::domain_error);
}

TEST(Condition, AcceptsTrackedTruncationLoss) {
  // A bright coherent state at a small cutoff loses norm, but the loss is recorded.
  const auto bright = coherent_state(2.5, 8);
  ASSERT_GT(bright.norm_deficit(), 0.1);
  const auto psi = tensor(tensor(bright, fock_state(1, 8)), fock_state(1, 8));
  const auto out = condition(psi, ModeIndex(1), ModeIndex(2), ClickPattern::both_click(), DetectorModel(1.0));
  EXPECT_NEAR(out.probability, psi.squared_norm(), 1e-14);
}
