#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "td/cartan.hpp"

using namespace td;
using tdtest::random_flag;
using tdtest::random_sl;

namespace {

GroupElement diag(std::initializer_list<double> v) {
  Vector d(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) d(i++) = x;
  return GroupElement(Matrix(d.asDiagonal()));
}

// Gram-determinant evaluation written out independently of the library.
double cocycle_oracle(const Matrix& g, const PartialFlag& f, int j) {
  const Matrix m = f.frame().leftCols(j);
  return 0.5 * std::log((m.transpose() * g.transpose() * g * m).determinant());
}

double gromov_oracle(const PartialFlag& f, const PartialFlag& g, int j) {
  const int d = f.dim();
  Matrix s(d, d);
  s << f.frame().leftCols(d - j), g.frame().leftCols(j);
  return std::log(std::abs(s.determinant()));
}

}  // namespace

TEST(CartanProject, DiagonalAndIdentity) {
  const auto k = cartan_project(diag({2, 1, 0.5}));
  EXPECT_NEAR(k[0], std::log(2.0), 1e-15);
  EXPECT_NEAR(k[1], 0.0, 1e-15);
  EXPECT_NEAR(k[2], -std::log(2.0), 1e-15);
  const auto z = cartan_project(GroupElement::identity(4));
  for (int i = 0; i < 4; ++i) EXPECT_EQ(z[i], 0.0);
}

TEST(CartanProject, UnipotentMatchesCharacteristicPolynomial) {
  // g^T g = [[1,1],[1,2]]: roots of x^2 - 3x + 1
  const double top = (3.0 + std::sqrt(5.0)) / 2.0;
  const auto k = cartan_project(GroupElement(Matrix{{1, 1}, {0, 1}}));
  EXPECT_NEAR(k[0], 0.5 * std::log(top), 1e-14);
  EXPECT_NEAR(k[1], -0.5 * std::log(top), 1e-14);
  EXPECT_NEAR(k[0], 0.48121182505960347, 1e-12);
}

TEST(CartanProject, MatchesJacobiSvd) {
  std::mt19937_64 rng(3);
  for (int d = 2; d <= 5; ++d) {
    for (int t = 0; t < 50; ++t) {
      const Matrix m = random_sl(d, rng);
      const auto k = cartan_project(GroupElement(m));
      const auto ref = tdtest::log_sv(m);
      for (int i = 0; i < d; ++i) EXPECT_NEAR(k[i], ref(i), 1e-11);
    }
  }
}

TEST(CartanProject, InverseIsOpposition) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const Matrix m = random_sl(3, rng);
    const auto a = opposition(cartan_project(GroupElement(m)));
    const auto ref = tdtest::log_sv(m.inverse());
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], ref(i), 1e-9);
  }
}

TEST(CartanProject, AccurateForLongProducts) {
  // product of 40 hyperbolic factors: sigma_min ~ 1e-24 is read from the inverse
  const GroupElement a(Matrix{{4, 0}, {0, 0.25}});
  GroupElement g = GroupElement::identity(2);
  for (int i = 0; i < 40; ++i) g = g * a;
  const auto k = cartan_project(g);
  EXPECT_NEAR(k[0], 40 * std::log(4.0), 1e-10);
  EXPECT_NEAR(k[1], -40 * std::log(4.0), 1e-10);
}

TEST(WeightCoords, PartialSums) {
  const RootSubset th(3, {1, 2});
  const auto w = weight_coords(CartanVector{Vector{{1.0, 0.0, -1.0}}}, th);
  EXPECT_EQ(w.at(1), 1.0);
  EXPECT_EQ(w.at(2), 1.0);
  const auto z = weight_coords(CartanVector{Vector::Zero(3)}, th);
  EXPECT_EQ(z.at(1), 0.0);
  EXPECT_EQ(z.at(2), 0.0);
}

TEST(WeightCoords, FunctionalAgreesBothWays) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  for (int t = 0; t < 100; ++t) {
    Vector h(4);
    for (int i = 0; i < 4; ++i) h(i) = n(rng);
    h.array() -= h.mean();
    const CartanVector cv{h};
    const RootSubset th(4, {1, 3});
    const LinearFunctional phi{th, {n(rng), n(rng)}};
    const double direct = phi.coeffs[0] * h(0) + phi.coeffs[1] * (h(0) + h(1) + h(2));
    EXPECT_NEAR(phi(cv), direct, 1e-12);
    EXPECT_NEAR(phi(weight_coords(cv, th)), direct, 1e-12);
  }
}

TEST(Opposition, Examples) {
  const auto a = opposition(CartanVector{Vector{{1.0, 0.0, -1.0}}});
  EXPECT_EQ(a[0], 1.0);
  EXPECT_EQ(a[1], 0.0);
  EXPECT_EQ(a[2], -1.0);
  const auto b = opposition(CartanVector{Vector{{3.0, 2.0, -5.0}}});
  EXPECT_EQ(b[0], 5.0);
  EXPECT_EQ(b[1], -2.0);
  EXPECT_EQ(b[2], -3.0);
}

TEST(DualFunctional, Examples) {
  const RootSubset th(3, {1, 2});
  const auto d = dual_functional(LinearFunctional{th, {1.0, 0.0}});
  EXPECT_EQ(d.coeff(1), 0.0);
  EXPECT_EQ(d.coeff(2), 1.0);
  const auto s = dual_functional(LinearFunctional{th, {1.0, 1.0}});
  EXPECT_EQ(s.coeff(1), 1.0);
  EXPECT_EQ(s.coeff(2), 1.0);
}

TEST(DualFunctional, OnInverse) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  const RootSubset th(4, {1, 2, 3});
  for (int t = 0; t < 100; ++t) {
    const GroupElement g(random_sl(4, rng));
    const LinearFunctional phi{th, {n(rng), n(rng), n(rng)}};
    EXPECT_NEAR(dual_functional(phi)(cartan_project(g)), phi(cartan_project(g.inverse())), 1e-9);
  }
}

TEST(UTheta, DiagonalGivesStandardFlag) {
  const auto f = u_theta(diag({2, 1, 0.5}), tdtest::full(3));
  EXPECT_LT(flag_distance(f, PartialFlag::standard(tdtest::full(3))), 1e-14);
}

TEST(UTheta, RightKFreedom) {
  std::mt19937_64 rng(13);
  const RootSubset th = tdtest::full(3);
  for (int t = 0; t < 20; ++t) {
    const Matrix m = random_sl(3, rng);
    // k stabilizing the decomposition of m^T m: sign flips in its eigenbasis
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.transpose() * m);
    const Matrix v = es.eigenvectors();
    const Matrix k = v * Vector{{-1.0, 1.0, -1.0}}.asDiagonal() * v.transpose();
    EXPECT_LT(flag_distance(u_theta(GroupElement(m), th), u_theta(GroupElement(m * k), th)), 1e-10);
  }
}

TEST(UTheta, PowersConvergeToAttractingFlag) {
  std::mt19937_64 rng(17);
  const RootSubset th = tdtest::full(3);
  const Matrix c = random_sl(3, rng, 0.05);
  const Matrix a = c * Vector{{3.0, 1.0, 1.0 / 3.0}}.asDiagonal() * c.inverse();
  const PartialFlag attracting(th, c);  // eigenvectors by decreasing modulus
  GroupElement g(a), p = GroupElement::identity(3);
  double prev = 10.0;
  for (int n = 1; n <= 30; ++n) {
    p = p * g;
    const double dist = flag_distance(u_theta(p, th), attracting);
    if (n >= 5) EXPECT_LT(dist, prev * 1.01);
    prev = dist;
  }
  EXPECT_LT(prev, 1e-10);
}

TEST(IwasawaCocycle, Examples) {
  const double a = 3.7;
  const auto b = iwasawa_cocycle(diag({a, 1 / a}), PartialFlag::standard(RootSubset(2, {1})));
  EXPECT_NEAR(b.at(1), std::log(a), 1e-15);
  std::mt19937_64 rng(19);
  for (int t = 0; t < 20; ++t) {
    const auto k = tdtest::random_orthogonal(3, rng);
    const auto z = iwasawa_cocycle(GroupElement(k), random_flag(tdtest::full(3), rng));
    EXPECT_NEAR(z.at(1), 0.0, 1e-13);
    EXPECT_NEAR(z.at(2), 0.0, 1e-13);
  }
}

TEST(IwasawaCocycle, MatchesGramOracle) {
  std::mt19937_64 rng(23);
  const RootSubset th = tdtest::full(4);
  for (int t = 0; t < 100; ++t) {
    const Matrix g = random_sl(4, rng);
    const auto f = random_flag(th, rng);
    const auto b = iwasawa_cocycle(GroupElement(g), f);
    for (int j = 1; j <= 3; ++j) EXPECT_NEAR(b.at(j), cocycle_oracle(g, f, j), 1e-10);
  }
}

TEST(IwasawaCocycle, CocycleIdentity) {
  std::mt19937_64 rng(29);
  const RootSubset th = tdtest::full(3);
  for (int t = 0; t < 200; ++t) {
    const GroupElement g(random_sl(3, rng)), h(random_sl(3, rng));
    const auto f = random_flag(th, rng);
    const auto lhs = iwasawa_cocycle(g * h, f);
    const auto a = iwasawa_cocycle(g, f.transformed(h));
    const auto b = iwasawa_cocycle(h, f);
    for (int j = 1; j <= 2; ++j) EXPECT_NEAR(lhs.at(j), a.at(j) + b.at(j), 1e-8);
  }
}

TEST(Transversality, Examples) {
  const RootSubset th = tdtest::full(3);
  const auto std_flag = PartialFlag::standard(th);
  const auto r = is_transverse(std_flag, PartialFlag::opposite_standard(th));
  EXPECT_TRUE(r.transverse);
  EXPECT_NEAR(r.conditioning, 1.0, 1e-15);
  const auto s = is_transverse(std_flag, std_flag);
  EXPECT_FALSE(s.transverse);
  EXPECT_NEAR(s.conditioning, 0.0, 1e-15);
}

TEST(Transversality, MatchesRankTest) {
  std::mt19937_64 rng(31);
  const RootSubset th = tdtest::full(3);
  std::bernoulli_distribution coin(0.5);
  for (int t = 0; t < 100; ++t) {
    const auto f = random_flag(th, rng);
    PartialFlag g = random_flag(th, rng);
    if (coin(rng)) {
      // force F^1 inside G^2
      Matrix fr = g.frame();
      fr.col(1) = f.frame().col(0);
      g = PartialFlag(th, fr);
    }
    bool rank_ok = true;
    for (int j = 1; j <= 2; ++j) {
      Matrix s(3, 3);
      s << f.frame().leftCols(j), g.frame().leftCols(3 - j);
      Eigen::FullPivLU<Matrix> lu(s);
      lu.setThreshold(1e-9);
      rank_ok = rank_ok && lu.rank() == 3;
    }
    EXPECT_EQ(is_transverse(f, g).transverse, rank_ok);
  }
}

TEST(GromovProduct, StandardPairAndSwap) {
  const RootSubset th = tdtest::full(4);
  const auto z = gromov_product(PartialFlag::standard(th), PartialFlag::opposite_standard(th));
  for (double v : z.values) EXPECT_NEAR(v, 0.0, 1e-15);
  std::mt19937_64 rng(37);
  for (int t = 0; t < 50; ++t) {
    const auto f = random_flag(th, rng), g = random_flag(th, rng);
    const auto fg = gromov_product(f, g), gf = gromov_product(g, f);
    for (int j = 1; j <= 3; ++j) {
      EXPECT_NEAR(fg.at(j), gf.at(4 - j), 1e-12);
      EXPECT_NEAR(fg.at(j), gromov_oracle(f, g, j), 1e-11);
    }
  }
}

TEST(GromovProduct, EquivarianceIdentity) {
  std::mt19937_64 rng(41);
  const RootSubset th = tdtest::full(3);
  for (int t = 0; t < 200; ++t) {
    const Matrix gm = random_sl(3, rng);
    const GroupElement g(gm);
    const auto f = random_flag(th, rng), h = random_flag(th, rng);
    const auto gf = f.transformed(g), gh = h.transformed(g);
    for (int j = 1; j <= 2; ++j) {
      const double lhs = gromov_oracle(gf, gh, j) - gromov_oracle(f, h, j);
      const double rhs = -cocycle_oracle(gm, f, 3 - j) - cocycle_oracle(gm, h, j);
      EXPECT_NEAR(lhs, rhs, 1e-8);
      EXPECT_NEAR(gromov_product(gf, gh).at(j) - gromov_product(f, h).at(j), rhs, 1e-8);
    }
  }
}

TEST(GromovProduct, ThrowsWhenNotTransverse) {
  const auto f = PartialFlag::standard(tdtest::full(3));
  EXPECT_THROW(gromov_product(f, f), Error);
}

TEST(PhiLength, Examples) {
  const auto phi = LinearFunctional::fundamental_weight(3, 1);
  EXPECT_NEAR(phi_length(diag({2, 1, 0.5}), phi).value, std::log(2.0), 1e-14);
  const auto u = phi_length(GroupElement(Matrix{{1, 1}, {0, 1}}), LinearFunctional::fundamental_weight(2, 1));
  EXPECT_NEAR(u.value, 0.0, 1e-12);
}

TEST(PhiLength, PowerLimitWithinEigenbasisBound) {
  // |log sigma_1(g^n) - n log rho| <= log cond(P) for g = P D P^-1
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  const auto phi = LinearFunctional::fundamental_weight(3, 1);
  for (int t = 0; t < 20; ++t) {
    const Matrix p = random_sl(3, rng, 0.05);
    const double l1 = u(rng), l2 = u(rng) - 0.7;
    const Matrix dm = Vector{{std::exp(l1), std::exp(l2), std::exp(-l1 - l2)}}.asDiagonal();
    const GroupElement g(p * dm * p.inverse());
    Eigen::JacobiSVD<Matrix> svd(p);
    const double cond = svd.singularValues()(0) / svd.singularValues()(2);
    Matrix q = g.matrix();
    double log_scale = 0.0;
    for (int k = 0; k < 10; ++k) {
      q = q * q;
      const double s = q.cwiseAbs().maxCoeff();
      q /= s;
      log_scale = 2 * log_scale + std::log(s);
    }
    const double power = (tdtest::log_sv(q)(0) + log_scale) / 1024.0;
    const double rho = std::max({l1, l2, -l1 - l2});
    EXPECT_NEAR(phi_length(g, phi).value, rho, 1e-10);
    EXPECT_LE(std::abs(power - rho), std::log(cond) / 1024.0 + 1e-12);
  }
  // symmetric: no bias at all
  const Matrix s = Matrix{{2.0, 0.5, 0.0}, {0.5, 1.0, 0.2}, {0.0, 0.2, 0.7}};
  const GroupElement gs(s);
  const auto pl = phi_length(gs, phi, 10);
  EXPECT_NEAR(pl.power_estimate, pl.value, 1e-6);
}

TEST(QuintGap, Examples) {
  const double a = 5.0;
  EXPECT_NEAR(quint_gap_check(diag({a, 1 / a}), PartialFlag::standard(RootSubset(2, {1})), 1e-3), 0.0, 1e-14);

  std::mt19937_64 rng(47);
  const RootSubset th = tdtest::full(3);
  const Matrix c = random_sl(3, rng, 0.05);
  const GroupElement g(c * Vector{{3.0, 1.0, 1.0 / 3.0}}.asDiagonal() * c.inverse());
  const PartialFlag attracting(th, c);
  GroupElement p = GroupElement::identity(3);
  double worst = 0.0;
  for (int n = 1; n <= 40; ++n) {
    p = p * g;
    worst = std::max(worst, quint_gap_check(p, attracting, 1e-6));
  }
  EXPECT_LT(worst, 10.0);
}

TEST(QuintGap, DivergesNearNonTransverseLocus) {
  const double a = 1e4;
  const GroupElement g = diag({a, 1 / a});
  const RootSubset th(2, {1});
  double prev = -1.0;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    // line at angle pi/2 - eps: close to e2, the repelling line of g
    const double t = std::numbers::pi / 2 - eps;
    const PartialFlag f(th, Matrix{{std::cos(t), -std::sin(t)}, {std::sin(t), std::cos(t)}});
    const double v = quint_gap_check(g, f, 1e-6);
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_GT(prev, 8.0);
  const PartialFlag bad(th, Matrix{{0.0, -1.0}, {1.0, 0.0}});
  EXPECT_THROW(quint_gap_check(g, bad, 1e-6), Error);
}

TEST(FlagConvergence, ProximalPowersAllHold) {
  const RootSubset th = tdtest::full(3);
  const GroupElement a = diag({4, 1, 0.25});
  std::vector<GroupElement> gs;
  GroupElement p = GroupElement::identity(3);
  for (int n = 0; n < 40; ++n) gs.push_back(p = p * a);
  std::mt19937_64 rng(53);
  std::vector<PartialFlag> probes;
  for (int i = 0; i < 6; ++i) probes.push_back(random_flag(th, rng));
  const auto r = check_flag_convergence(gs, PartialFlag::standard(th), PartialFlag::opposite_standard(th), probes);
  EXPECT_TRUE(r.cartan.holds && r.forward.holds && r.backward.holds && r.local.holds);
}

TEST(FlagConvergence, AlternatingPowersAllFail) {
  const RootSubset th = tdtest::full(3);
  const GroupElement a = diag({4, 1, 0.25});
  std::mt19937_64 rng(59);
  const Matrix k = tdtest::random_orthogonal(3, rng);
  const GroupElement b(k * a.matrix() * k.transpose());
  std::vector<GroupElement> gs;
  GroupElement pa = GroupElement::identity(3), pb = pa;
  for (int n = 0; n < 40; ++n) {
    pa = pa * a;
    pb = pb * b;
    gs.push_back(n % 2 ? pb : pa);
  }
  std::vector<PartialFlag> probes;
  for (int i = 0; i < 6; ++i) probes.push_back(random_flag(th, rng));
  const auto r = check_flag_convergence(gs, PartialFlag::standard(th), PartialFlag::opposite_standard(th), probes);
  EXPECT_FALSE(r.cartan.holds);
  EXPECT_TRUE(r.unanimous());
}

TEST(FlagConvergence, RotationsClaimNothing) {
  const RootSubset th(2, {1});
  std::vector<GroupElement> gs;
  for (int n = 0; n < 40; ++n) {
    const double t = 0.9 * n;
    gs.emplace_back(Matrix{{std::cos(t), -std::sin(t)}, {std::sin(t), std::cos(t)}});
  }
  std::mt19937_64 rng(61);
  std::vector<PartialFlag> probes;
  for (int i = 0; i < 6; ++i) probes.push_back(random_flag(th, rng));
  const auto r = check_flag_convergence(gs, PartialFlag::standard(th), PartialFlag::opposite_standard(th), probes);
  EXPECT_NEAR(r.tail_min_gap, 0.0, 1e-12);
  EXPECT_FALSE(r.cartan.holds);
  EXPECT_TRUE(r.unanimous());
}

TEST(CompoundMatrix, MultiplicativeAndDeterminant) {
  std::mt19937_64 rng(67);
  const Matrix a = random_sl(4, rng), b = random_sl(4, rng);
  for (int k = 1; k <= 3; ++k) {
    const Matrix lhs = compound_matrix(a * b, k);
    const Matrix rhs = compound_matrix(a, k) * compound_matrix(b, k);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10 * rhs.cwiseAbs().maxCoeff());
  }
  EXPECT_NEAR(compound_matrix(a, 4)(0, 0), a.determinant(), 1e-10);
}
