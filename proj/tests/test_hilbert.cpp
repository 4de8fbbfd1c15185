#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "td/cartan.hpp"
#include "td/hilbert.hpp"
#include "td/presets.hpp"
#include "td/series.hpp"

using namespace td;

namespace {

// Klein-model hyperbolic distance (curvature -1).
double klein_hyperbolic(const Vector& p, const Vector& q) {
  const double c = (1.0 - p.dot(q)) / std::sqrt((1.0 - p.squaredNorm()) * (1.0 - q.squaredNorm()));
  return std::acosh(std::max(1.0, c));
}

// Busemann function of the Poincare ball at boundary point xi, zero at 0.
double poincare_busemann(const Vector& xi, const Vector& klein) {
  const Vector z = klein / (1.0 + std::sqrt(1.0 - klein.squaredNorm()));
  return std::log((xi - z).squaredNorm() / (1.0 - z.squaredNorm()));
}

// Simplex Hilbert metric from barycentric coordinates.
double simplex_oracle(const Vector& p, const Vector& q) {
  const int n = static_cast<int>(p.size());
  Vector bp(n + 1), bq(n + 1);
  bp << p, 1.0 - p.sum();
  bq << q, 1.0 - q.sum();
  double best = 0.0;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) best = std::max(best, std::log(bp(i) * bq(j) / (bp(j) * bq(i))));
  return best;
}

Vector random_in_ball(int d, std::mt19937_64& rng, double rmax = 0.95) {
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = n(rng);
  return v.normalized() * rmax * std::pow(u(rng), 1.0 / d);
}

Vector unit(double angle) { return Vector{{std::cos(angle), std::sin(angle)}}; }

}  // namespace

TEST(HilbertDistance, Examples) {
  const auto ball = ConvexDomain::ball(2);
  EXPECT_NEAR(hilbert_distance(ball, Vector::Zero(2), Vector{{0.5, 0.0}}), std::log(3.0), 1e-15);
  const Vector p{{0.3, -0.2}};
  EXPECT_EQ(hilbert_distance(ball, p, p), 0.0);
  const auto simplex = ConvexDomain::simplex(2);
  EXPECT_EQ(hilbert_distance(simplex, Vector{{0.2, 0.3}}, Vector{{0.2, 0.3}}), 0.0);
}

TEST(HilbertDistance, BallIsTwiceHyperbolic) {
  std::mt19937_64 rng(71);
  for (int d : {2, 3}) {
    const auto ball = ConvexDomain::ball(d);
    for (int t = 0; t < 300; ++t) {
      const Vector p = random_in_ball(d, rng), q = random_in_ball(d, rng);
      EXPECT_NEAR(hilbert_distance(ball, p, q), 2.0 * klein_hyperbolic(p, q), 1e-9);
    }
  }
}

TEST(HilbertDistance, SimplexMatchesBarycentricOracle) {
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int d : {2, 3}) {
    const auto simplex = ConvexDomain::simplex(d);
    for (int t = 0; t < 200; ++t) {
      Vector p(d), q(d);
      // uniform points of the open simplex
      for (Vector* v : {&p, &q}) {
        Vector e(d + 1);
        for (int i = 0; i <= d; ++i) e(i) = -std::log(u(rng));
        *v = (e / e.sum()).head(d);
      }
      EXPECT_NEAR(hilbert_distance(simplex, p, q), simplex_oracle(p, q), 1e-10);
      EXPECT_NEAR(polytope_distance_from_values(simplex.facet_values(p), simplex.facet_values(q)),
                  simplex_oracle(p, q), 1e-10);
    }
  }
}

TEST(HilbertDistance, ThrowsOnBoundary) {
  EXPECT_THROW(hilbert_distance(ConvexDomain::ball(2), Vector::Zero(2), Vector{{1.0, 0.0}}), Error);
}

TEST(Shadows, RadialPointAlwaysInside) {
  const auto ball = ConvexDomain::ball(2);
  const Vector b = Vector::Zero(2), p{{0.6, 0.3}};
  const Vector x = p.normalized();
  for (double r : {1e-3, 0.1, 1.0}) EXPECT_TRUE(shadow_contains(ball, b, p, r, x));
  const double dist = hilbert_distance(ball, b, p);
  EXPECT_FALSE(shadow_contains(ball, b, p, 0.9 * dist, -x));
}

TEST(Shadows, HalfAngleMatchesHyperbolicClosedForm) {
  // sin(theta) = sinh(r/2) / sinh(D/2): right triangle with hyperbolic legs halved
  const auto ball = ConvexDomain::ball(2);
  for (double dist : {2.0, 5.0, 10.0}) {
    for (double r : {0.5, 1.0, 1.9}) {
      const double closed = std::asin(std::sinh(r / 2) / std::sinh(dist / 2));
      EXPECT_NEAR(disk_shadow_half_angle(dist, r), closed, 1e-9);
      const double rho = std::tanh(dist / 2);  // Klein radius at Hilbert distance dist
      const Vector p = rho * unit(0.4);
      EXPECT_TRUE(shadow_contains(ball, Vector::Zero(2), p, r, unit(0.4 + closed - 1e-6)));
      EXPECT_FALSE(shadow_contains(ball, Vector::Zero(2), p, r, unit(0.4 + closed + 1e-6)));
    }
  }
  EXPECT_NEAR(disk_shadow_half_angle(1.0, 2.0), std::numbers::pi, 0.0);
}

TEST(Shadows, SegmentDistanceMatchesClosedForm) {
  const auto ball = ConvexDomain::ball(2);
  std::mt19937_64 rng(79);
  std::uniform_real_distribution<double> ang(-1.4, 1.4), rad(0.5, 8.0);
  for (int t = 0; t < 100; ++t) {
    const double dist = rad(rng), a = ang(rng);
    const Vector p = std::tanh(dist / 2) * unit(0.0);
    const double closed = 2.0 * std::asinh(std::sinh(dist / 2) * std::abs(std::sin(a)));
    EXPECT_NEAR(segment_distance(ball, Vector::Zero(2), p, unit(a)), closed, 1e-7);
  }
}

TEST(Horofunction, Examples) {
  const auto ball = ConvexDomain::ball(2);
  const auto y = boundary_point(ball, Vector{{1.0, 0.0}});
  const Vector a = Vector::Zero(2), b{{0.5, 0.0}};
  EXPECT_EQ(horofunction(ball, y, a, a).value, 0.0);
  // b lies on [a, y): the whole distance d(a, b) = log 3
  EXPECT_NEAR(horofunction(ball, y, a, b).value, std::log(3.0), 1e-12);
}

TEST(Horofunction, BallMatchesBusemannClosedForm) {
  const auto ball = ConvexDomain::ball(2);
  std::mt19937_64 rng(83);
  std::uniform_real_distribution<double> ang(0.0, 2 * std::numbers::pi);
  for (int t = 0; t < 200; ++t) {
    const Vector xi = unit(ang(rng));
    const Vector a = random_in_ball(2, rng), b = random_in_ball(2, rng);
    const double closed = 2.0 * (poincare_busemann(xi, a) - poincare_busemann(xi, b));
    EXPECT_NEAR(horofunction(ball, boundary_point(ball, xi), a, b).value, closed, 1e-9);
  }
}

TEST(Horofunction, PolytopeCocycle) {
  Matrix n(4, 2);
  n << 1, 0, -1, 0, 0, 1, 0, -1;
  const auto square = ConvexDomain::polytope(n, Vector::Ones(4), Vector::Zero(2));
  const auto y = boundary_point(square, Vector{{1.0, 0.3}});
  ASSERT_TRUE(y.smooth);
  const Vector a{{0.1, 0.2}}, b{{-0.4, 0.1}}, c{{0.3, -0.5}};
  const double ac = horofunction(square, y, a, c).value;
  const double ab = horofunction(square, y, a, b).value;
  const double bc = horofunction(square, y, b, c).value;
  EXPECT_NEAR(ac, ab + bc, 1e-8);
  EXPECT_THROW(horofunction(square, boundary_point(square, Vector{{1.0, 1.0}}), a, b), Error);
}

TEST(Hopf, FlowShiftsTime) {
  const auto ball = ConvexDomain::ball(2);
  const Vector p{{0.2, -0.1}}, dir = unit(0.7);
  const auto h0 = hopf_coordinates(ball, ball.basepoint(), dir);
  EXPECT_NEAR(h0.s, 0.0, 1e-14);
  const auto h = hopf_coordinates(ball, p, dir);
  for (double t : {-2.0, 0.5, 3.0}) {
    const auto ht = hopf_coordinates(ball, flow_point(ball, p, dir, t), dir);
    EXPECT_LT((ht.x.x - h.x.x).norm(), 1e-10);
    EXPECT_LT((ht.y.x - h.y.x).norm(), 1e-10);
    EXPECT_NEAR(ht.s, h.s + t, 1e-9);
  }
}

TEST(Hopf, GroupActionFormula) {
  // gamma v = (gamma x, gamma y, s + h_y(gamma^-1 b0, b0))
  const auto ball = ConvexDomain::ball(2);
  const auto preset = make_preset("schottky");
  const Vector p{{0.1, 0.3}}, dir = unit(-0.4);
  const auto h = hopf_coordinates(ball, p, dir);
  for (const Word& w : std::vector<Word>{{1}, {2}, {1, -2}, {-1, -1, 2}}) {
    const GroupElement g = evaluate(preset, w);
    const Matrix iso = klein_isometry(g.matrix());
    const Vector gp = klein_apply(iso, p), gy = klein_apply(iso, h.y.x), gx = klein_apply(iso, h.x.x);
    const auto hg = hopf_coordinates(ball, gp, (gy - gp).normalized());
    const Vector back = klein_apply(klein_isometry(g.inverse_matrix()), ball.basepoint());
    const double shift = horofunction(ball, h.y, back, ball.basepoint()).value;
    EXPECT_LT((hg.x.x - gx).norm(), 1e-8);
    EXPECT_NEAR(hg.s, h.s + shift, 1e-8);
  }
}

TEST(Visibility, BallPassesSimplexFails) {
  const auto ball = ConvexDomain::ball(2);
  std::vector<BoundaryPoint> sample;
  for (int k = 0; k < 12; ++k) sample.push_back(boundary_point(ball, unit(0.5 * k)));
  EXPECT_TRUE(visibility_check(ball, sample).pass);

  const auto simplex = ConvexDomain::simplex(2);
  // two points of the same edge x_2 = 0
  const std::vector<BoundaryPoint> edge = {boundary_point(simplex, Vector{{0.25, 0.0}}),
                                           boundary_point(simplex, Vector{{0.75, 0.0}})};
  EXPECT_FALSE(visibility_check(simplex, edge).pass);
}

TEST(Visibility, SchottkyLimitSampleMarginStable) {
  const auto ball = ConvexDomain::ball(2);
  const auto p = make_preset("schottky");
  double margins[2];
  int slot = 0;
  for (int r : {4, 6}) {
    std::vector<BoundaryPoint> sample;
    for (const Word& w : std::vector<Word>{{1}, {-1}, {2}, {-2}}) {
      Word ww = w;
      while (static_cast<int>(ww.size()) < r) ww.push_back(ww.back());
      const auto f = u_theta(evaluate(p, ww), p.theta);
      sample.push_back(boundary_point(ball, klein_boundary_point(f)));
    }
    const auto rep = visibility_check(ball, sample);
    EXPECT_TRUE(rep.pass);
    margins[slot++] = rep.min_margin;
  }
  EXPECT_GT(margins[1], 0.5 * margins[0]);
}

TEST(KleinDisk, PolarMatchesAffineChart) {
  const auto ball = ConvexDomain::ball(2);
  std::mt19937_64 rng(89);
  for (int t = 0; t < 100; ++t) {
    const Matrix g = tdtest::random_sl(2, rng, 0.05);
    const auto pol = disk_polar(g, g.inverse());
    const Vector x = klein_orbit_point(g);
    EXPECT_NEAR(pol.dist, hilbert_distance(ball, Vector::Zero(2), x), 1e-9);
    EXPECT_NEAR(pol.dist, 4.0 * tdtest::log_sv(g)(0), 1e-9);
    if (x.norm() > 1e-6) EXPECT_NEAR(std::remainder(pol.angle - std::atan2(x(1), x(0)), 2 * std::numbers::pi), 0.0, 1e-9);
  }
}

TEST(KleinDisk, DistancesAgree) {
  std::mt19937_64 rng(97);
  const auto ball = ConvexDomain::ball(2);
  for (int t = 0; t < 100; ++t) {
    const Matrix g = tdtest::random_sl(2, rng, 0.05), h = tdtest::random_sl(2, rng, 0.05);
    const auto pg = disk_polar(g, g.inverse()), ph = disk_polar(h, h.inverse());
    EXPECT_NEAR(disk_distance(pg, ph), hilbert_distance(ball, klein_orbit_point(g), klein_orbit_point(h)), 1e-8);
  }
}

TEST(CoarseAdditivity, TrivialAndCollinearCases) {
  const RootSubset th(2, {1});
  const GroupElement a(Matrix{{2.0, 0.0}, {0.0, 0.5}});
  EXPECT_EQ(coarse_additivity_check({{a, a}}, th, 1.0), 0.0);
  std::vector<std::pair<GroupElement, GroupElement>> pairs;
  GroupElement an = GroupElement::identity(2);
  for (int n = 1; n <= 6; ++n) {
    an = an * a;
    GroupElement am = an;
    for (int m = 1; m <= 4; ++m) am = am * a;
    pairs.emplace_back(an, am);
  }
  EXPECT_NEAR(coarse_additivity_check(pairs, th, 1e-6), 0.0, 1e-12);
}

TEST(CoarseAdditivity, SchottkyAlignedPairsBounded) {
  const auto p = make_preset("schottky");
  const RootSubset th(2, {1});
  double worst = 0.0;
  for (int len : {4, 6, 8, 10}) {
    std::vector<std::pair<GroupElement, GroupElement>> pairs;
    const Word full = {1, 2, 1, -2, -2, 1, 2, 2, -1, 2};
    const Word w(full.begin(), full.begin() + len);
    for (int k = 1; k < len; ++k) pairs.emplace_back(evaluate(p, Word(w.begin(), w.begin() + k)), evaluate(p, w));
    worst = std::max(worst, coarse_additivity_check(pairs, th, 6.0));
  }
  EXPECT_LT(worst, 2.0);
  EXPECT_THROW(coarse_additivity_check({{evaluate(p, {1, 1}), evaluate(p, {-1, -1})}}, th, 0.5), Error);
}
