#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "td/orbit.hpp"
#include "td/patterson.hpp"
#include "td/types.hpp"

namespace tdtest {

using td::Matrix;

/// Gaussian matrix rescaled to det 1, flipping a column when det < 0.
/// Rejects samples with sigma_min / sigma_max below min_cond.
inline Matrix random_sl(int d, std::mt19937_64& rng, double min_cond = 1e-3) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = n(rng);
    double det = m.determinant();
    if (det < 0) {
      m.col(0) *= -1.0;
      det = -det;
    }
    if (det < 1e-6) continue;
    m /= std::pow(det, 1.0 / d);
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto s = svd.singularValues();
    if (s(d - 1) / s(0) >= min_cond) return m;
  }
}

inline Matrix random_orthogonal(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = n(rng);
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

inline td::PartialFlag random_flag(const td::RootSubset& theta, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const int d = theta.dim();
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = n(rng);
  return td::PartialFlag(theta, m);
}

/// Log singular values from Eigen's Jacobi SVD, descending.
inline Eigen::VectorXd log_sv(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().array().log();
}

inline td::RootSubset full(int d) { return td::RootSubset::full(d); }

/// Line in R^2 at angle t, as an SL(2) flag.
inline td::PartialFlag line_at(double t) {
  Matrix m(2, 2);
  m << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return td::PartialFlag(td::RootSubset(2, {1}), m);
}

/// Single flag atom in the middle of the widest gap of the limit sample of
/// an SL(2) ball: a measure that no deep shadow reaches.
inline td::AtomicMeasure gap_measure(const td::WordBall& ball) {
  const auto sample = td::limit_set_sample(ball, td::RootSubset(2, {1}));
  std::vector<double> t;
  for (const auto& f : sample.flags) {
    double a = std::atan2(f.frame()(1, 0), f.frame()(0, 0));
    if (a < 0) a += std::numbers::pi;
    if (a >= std::numbers::pi) a -= std::numbers::pi;
    t.push_back(a);
  }
  std::sort(t.begin(), t.end());
  double best = t.front() + std::numbers::pi - t.back(), mid = t.back() + 0.5 * best;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] - t[i - 1] > best) {
      best = t[i] - t[i - 1];
      mid = 0.5 * (t[i] + t[i - 1]);
    }
  }
  td::AtomicMeasure mu;
  mu.carrier = td::AtomicMeasure::Carrier::Flag;
  mu.dim = 2;
  mu.theta = td::RootSubset(2, {1});
  mu.phi = td::LinearFunctional::fundamental_weight(2, 1);
  mu.weights = {1.0};
  mu.words = {td::Word{}};
  mu.flags = {line_at(mid)};
  return mu;
}

}  // namespace tdtest
