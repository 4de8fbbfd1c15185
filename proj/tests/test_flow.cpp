#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "td/cartan.hpp"
#include "td/flow.hpp"
#include "td/presets.hpp"
#include "td/series.hpp"

using namespace td;

namespace {

const LinearFunctional kOmega1 = LinearFunctional::fundamental_weight(2, 1);

struct Shells {
  GroupPreset preset = make_preset("schottky");
  WordBall ball;
  Matrix kappas;
  double delta = 0.0;
  AtomicMeasure mu, mubar;
  explicit Shells(int radius) : ball(enumerate_ball(preset, radius)), kappas(ball_cartan(ball)) {
    delta = critical_exponent(ball, kappas, kOmega1).delta_hat;
    mu = flag_pushforward(shell(patterson_measure(ball, kappas, kOmega1, delta), radius), preset.theta);
    mubar = flag_pushforward(shell(patterson_measure(ball, kappas, dual_functional(kOmega1), delta), radius),
                             preset.theta);
  }
};

}  // namespace

TEST(BMS, SwapSymmetry) {
  const Shells s(5);
  const auto m = assemble_bms(s.mubar, s.mu, s.delta, kOmega1);
  const auto w = swapped(m);
  for (std::size_t x = 0; x < m.mubar.size(); x += 7) {
    for (std::size_t y = 0; y < m.mu.size(); y += 11) {
      if (s.mubar.words[x].front() == s.mu.words[y].front()) continue;  // same cylinder: close to the diagonal
      const double a = bms_density(m, x, y), b = bms_density(w, y, x);
      EXPECT_NEAR(a, b, 1e-12 * a);
    }
  }
}

TEST(BMS, ZeroExponentIsProduct) {
  const Shells s(4);
  const auto m = assemble_bms(s.mubar, s.mu, 0.0, kOmega1);
  for (std::size_t x = 0; x < m.mubar.size(); x += 5) {
    for (std::size_t y = 0; y < m.mu.size(); y += 3) {
      if (s.mubar.words[x].front() == s.mu.words[y].front()) continue;
      EXPECT_NEAR(bms_density(m, x, y), s.mubar.weights[x] * s.mu.weights[y], 1e-15);
    }
  }
}

TEST(BMS, NonTransversePairThrows) {
  const Shells s(3);
  AtomicMeasure one = s.mu;
  one.weights = {1.0};
  one.words = {s.mu.words[0]};
  one.flags = {s.mu.flags[0]};
  const auto m = assemble_bms(one, one, s.delta, kOmega1);
  EXPECT_THROW(bms_density(m, 0, 0), Error);
}

TEST(Invariance, IdentityIsExact) {
  const Shells s(6);
  const auto m = assemble_bms(s.mubar, s.mu, s.delta, kOmega1, 0);
  const auto cells = sphere_cells(s.ball, 2, s.preset.theta);
  const auto rep = invariance_residual(m, GroupElement::identity(2), s.preset.generators, cells);
  EXPECT_FALSE(rep.rows.empty());
  EXPECT_LT(rep.max_rel_error, 1e-12);
}

TEST(Invariance, GeneratorResidualSmallOnShell) {
  const Shells s(8);
  const auto m = assemble_bms(s.mubar, s.mu, s.delta, kOmega1, 0);
  const auto cells = sphere_cells(s.ball, 2, s.preset.theta);
  for (const auto& g : s.preset.generators) {
    EXPECT_LT(invariance_residual(m, g, s.preset.generators, cells).max_rel_error, 1e-2);
  }
}

TEST(Recurrence, ShellIsConservativeGapEscapes) {
  const Shells s(7);
  const auto m = assemble_bms(s.mubar, s.mu, s.delta, kOmega1, 0);
  const auto rep = recurrence_diagnostic(s.preset, m, 20.0, 30, 3);
  EXPECT_EQ(rep.samples, 30u);
  EXPECT_GE(rep.return_fraction, 0.9);
  EXPECT_EQ(rep.verdict.rfind("consistent with conservative", 0), 0u);
  EXPECT_FALSE(rep.trajectory.empty());
  EXPECT_EQ(trajectory_csv(rep).rfind("t,cell_id,reentry\n", 0), 0u);

  const auto gap = assemble_bms(s.mubar, tdtest::gap_measure(s.ball), s.delta, kOmega1, 0);
  const auto ctrl = recurrence_diagnostic(s.preset, gap, 20.0, 30, 3);
  EXPECT_EQ(ctrl.return_fraction, 0.0);
  EXPECT_EQ(ctrl.verdict.rfind("consistent with dissipative", 0), 0u);
}

TEST(Recurrence, Deterministic) {
  const Shells s(5);
  const auto m = assemble_bms(s.mubar, s.mu, s.delta, kOmega1, 0);
  const auto a = recurrence_diagnostic(s.preset, m, 10.0, 10, 9);
  const auto b = recurrence_diagnostic(s.preset, m, 10.0, 10, 9);
  EXPECT_EQ(a.reentries, b.reentries);
  EXPECT_EQ(trajectory_csv(a), trajectory_csv(b));
}
