#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "td/cartan.hpp"
#include "td/patterson.hpp"
#include "td/presets.hpp"
#include "td/series.hpp"

using namespace td;

namespace {

const LinearFunctional kOmega1 = LinearFunctional::fundamental_weight(2, 1);

struct SchottkyShell {
  GroupPreset preset = make_preset("schottky");
  WordBall ball;
  Matrix kappas;
  double delta = 0.0;
  AtomicMeasure flags;
  explicit SchottkyShell(int radius) : ball(enumerate_ball(preset, radius)), kappas(ball_cartan(ball)) {
    delta = critical_exponent(ball, kappas, kOmega1).delta_hat;
    flags = flag_pushforward(shell(patterson_measure(ball, kappas, kOmega1, delta), radius), preset.theta);
  }
};

}  // namespace

TEST(PattersonMeasure, IdentityBallIsADirac) {
  const auto ball = enumerate_ball(make_preset("schottky"), 0);
  const auto mu = patterson_measure(ball, kOmega1, 0.7);
  ASSERT_EQ(mu.size(), 1u);
  EXPECT_EQ(mu.weights[0], 1.0);
  EXPECT_TRUE(mu.words[0].empty());
}

TEST(PattersonMeasure, CyclicWeightsClosedForm) {
  // omega_1(kappa(a^n)) = |n| for a = diag(e, 1/e)
  const auto ball = enumerate_ball(make_preset("cyclic"), 20);
  for (double s : {0.3, 1.0, 2.5}) {
    const auto mu = patterson_measure(ball, kOmega1, s);
    const double z = 1.0 + 2.0 * (std::exp(-s) - std::exp(-21.0 * s)) / (1.0 - std::exp(-s));
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const double n = static_cast<double>(mu.words[i].size());
      EXPECT_NEAR(mu.weights[i], std::exp(-s * n) / z, 1e-12);
    }
    EXPECT_NEAR(mu.total(), 1.0, 1e-14);
  }
}

TEST(PattersonMeasure, SlowlyVaryingWeights) {
  const auto ball = enumerate_ball(make_preset("cyclic"), 10);
  const auto h = HFunction::slowly_varying(2.0);
  const auto mu = patterson_measure(ball, kOmega1, 1.0, h);
  // h(e^n) = max(1, n)^2
  const double w1 = std::exp(-1.0), w5 = 25.0 * std::exp(-5.0);
  double a = 0, b = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.words[i] == Word{1}) a = mu.weights[i];
    if (mu.words[i] == Word{1, 1, 1, 1, 1}) b = mu.weights[i];
  }
  EXPECT_NEAR(b / a, w5 / w1, 1e-12);
}

TEST(PattersonMeasure, SchottkyTailShrinks) {
  const auto p = make_preset("schottky");
  const auto big = enumerate_ball(p, 10);
  const Matrix k = ball_cartan(big);
  const double s = 1.5 * critical_exponent(big, k, kOmega1).delta_hat;
  auto at = [&](int r) {
    const auto b = big.truncated(r);
    return patterson_measure(b, Matrix(k.leftCols(static_cast<Eigen::Index>(b.size()))), kOmega1, s);
  };
  const double tv68 = total_variation(at(6), at(8));
  const double tv810 = total_variation(at(8), at(10));
  EXPECT_LT(tv810, tv68);
  EXPECT_LT(tv810, 0.1);
}

TEST(PattersonMeasure, NonSummableThrows) {
  const auto ball = enumerate_ball(make_preset("cyclic"), 5);
  EXPECT_THROW(patterson_measure(ball, kOmega1, std::nan("")), Error);
  // normalization is shift-invariant: huge negative s is still a probability
  EXPECT_NEAR(patterson_measure(ball, kOmega1, -1e6).total(), 1.0, 1e-14);
  // an elliptic orbit has no flags to push to
  const auto ell = enumerate_ball(make_preset("elliptic"), 5);
  EXPECT_THROW(flag_pushforward(patterson_measure(ell, kOmega1, 1.0), RootSubset(2, {1})), Error);
}

TEST(Shell, ConditionalOnOuterWords) {
  const auto ball = enumerate_ball(make_preset("schottky"), 6);
  const auto mu = shell(patterson_measure(ball, kOmega1, 0.8), 5);
  EXPECT_NEAR(mu.total(), 1.0, 1e-14);
  for (const auto& w : mu.words) EXPECT_GE(w.size(), 5u);
  EXPECT_EQ(mu.size(), ball.size() - ball.sphere_end(4));
}

TEST(Pushforward, InverseUndoes) {
  const auto p = make_preset("schottky");
  const auto ball = enumerate_ball(p, 5);
  const auto mu = patterson_measure(ball, kOmega1, 0.8);
  const auto g = p.generators[0] * p.generators[1].inverse();
  const auto back = pushforward(pushforward(mu, g), g.inverse());
  EXPECT_LT(total_variation(mu, back), 1e-14);
  const auto moved = pushforward(mu, g);
  EXPECT_GT(total_variation(mu, moved), 0.1);
}

TEST(Pushforward, FlagAtomsMoveByAction) {
  SchottkyShell f(6);
  const auto g = f.preset.generators[1];
  const auto pushed = pushforward(f.flags, g);
  ASSERT_EQ(pushed.size(), f.flags.size());
  for (std::size_t i = 0; i < pushed.size(); i += 17) {
    EXPECT_LT(flag_distance(pushed.flags[i], f.flags.flags[i].transformed(g)), 1e-12);
    EXPECT_EQ(pushed.weights[i], f.flags.weights[i]);
  }
}

TEST(Serialization, JsonRoundTrip) {
  const auto p = make_preset("schottky");
  const auto ball = enumerate_ball(p, 4);
  const auto mu = patterson_measure(ball, kOmega1, 0.8);
  const auto back = measure_from_json(to_json(mu), p.generators);
  ASSERT_EQ(back.size(), mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    EXPECT_EQ(back.weights[i], mu.weights[i]);
    EXPECT_EQ(back.words[i], mu.words[i]);
  }
  EXPECT_LT(total_variation(mu, back), 1e-15);

  const auto flags = flag_pushforward(mu, p.theta);
  const auto fb = measure_from_json(to_json(flags), p.generators);
  ASSERT_EQ(fb.size(), flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) EXPECT_EQ(fb.flags[i].frame(), flags.flags[i].frame());
}

TEST(FlagPushforward, DropsIdentityAndRenormalizes) {
  const auto ball = enumerate_ball(make_preset("cyclic"), 10);
  const auto mu = patterson_measure(ball, kOmega1, 1.0);
  const auto flags = flag_pushforward(mu, RootSubset(2, {1}));
  EXPECT_EQ(flags.size(), mu.size() - 1);
  EXPECT_NEAR(flags.dropped_mass, mu.weights[0], 1e-15);
  EXPECT_NEAR(flags.total(), 1.0, 1e-14);
}

TEST(Conformality, IdentityIsExact) {
  SchottkyShell f(6);
  const auto cells = sphere_cells(f.ball, 2, f.preset.theta);
  const auto rep = conformality_check(f.flags, GroupElement::identity(2), cells);
  EXPECT_LT(rep.max_rel_error, 1e-14);
}

TEST(Conformality, ShellErrorDecreasesWithRadius) {
  double prev = 1.0;
  for (int r : {6, 8}) {
    SchottkyShell f(r);
    const auto cells = sphere_cells(f.ball, 2, f.preset.theta);
    double worst = 0.0;
    for (const auto& g : f.preset.generators) {
      worst = std::max(worst, conformality_check(f.flags, g, cells).max_rel_error);
      worst = std::max(worst, conformality_check(f.flags, g.inverse(), cells).max_rel_error);
    }
    EXPECT_LT(worst, prev) << "R = " << r;
    EXPECT_LE(worst, 5e-2);
    prev = worst;
  }
}

TEST(Shadows, CalibratedRadiusPassesAndTinyRadiusFails) {
  SchottkyShell f(10);
  const auto gammas = sample_by_length(f.ball, 4, 8, 20, 1);
  for (const auto& g : gammas) {
    const int n = static_cast<int>(g.word().size());
    EXPECT_GE(n, 4);
    EXPECT_LE(n, 8);
  }
  const double r0 = calibrate_shadow_radius(f.flags, gammas, {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0});
  ASSERT_GT(r0, 0.0);
  const auto rep = shadow_lemma_check(f.flags, gammas, r0 + 1.0);
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(rep.constant, 20.0);
  EXPECT_FALSE(shadow_lemma_check(f.flags, gammas, 0.01).pass);
}

TEST(Conical, ShellIsConicalGapMeasureIsNot) {
  SchottkyShell f(8);
  const auto rep = conical_mass_estimate(f.flags, f.ball, 1.0, {2, 4, 6});
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_GE(rep.estimate, 0.95);
  const auto ctrl = conical_mass_estimate(tdtest::gap_measure(f.ball), f.ball, 1.0, {2, 4, 6});
  EXPECT_EQ(ctrl.estimate, 0.0);
}

TEST(Schedule, ApproachesDeltaFromAbove) {
  const auto s = s_schedule(0.8, 5);
  ASSERT_EQ(s.size(), 5u);
  for (int k = 1; k <= 5; ++k) EXPECT_DOUBLE_EQ(s[static_cast<std::size_t>(k - 1)], 0.8 * (1 + std::ldexp(1.0, -k)));
}

TEST(HFunction, SlowlyVaryingOnGrid) {
  EXPECT_TRUE(HFunction::constant_one().slowly_varying_on_grid(0.01, 1.0));
  EXPECT_TRUE(HFunction::slowly_varying(1.0).slowly_varying_on_grid(0.5, 10.0));
  EXPECT_DOUBLE_EQ(HFunction::slowly_varying(2.0)(std::exp(3.0)), 9.0);
  EXPECT_DOUBLE_EQ(HFunction::slowly_varying(2.0).log_at_log(3.0), 2.0 * std::log(3.0));
}
