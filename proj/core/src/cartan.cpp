#include "td/cartan.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace td {

namespace {

constexpr double kSingularFloor = 1e-300;

Vector singular_values(const Matrix& m) {
  if (m.rows() == 2) {
    // closed form on the rescaled matrix (squares would overflow past 1e154);
    // the smaller value is recomputed from the determinant
    const double scale = m.cwiseAbs().maxCoeff();
    if (!(scale > 0)) return Vector::Zero(2);
    const double a = m(0, 0) / scale, b = m(0, 1) / scale, c = m(1, 0) / scale, d = m(1, 1) / scale;
    const double s = a * a + b * b + c * c + d * d;
    const double det = std::abs(a * d - b * c);
    const double disc = std::sqrt(std::max(0.0, (s - 2 * det) * (s + 2 * det)));
    const double s1 = std::sqrt((s + disc) / 2);
    Vector out(2);
    out << scale * s1, (s1 > 0 ? scale * (det / s1) : 0.0);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

Matrix left_singular_vectors(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
  return svd.matrixU();
}

double log_volume(const Matrix& cols) {
  if (cols.cols() == 0) return 0.0;
  Eigen::HouseholderQR<Matrix> qr(cols);
  const Matrix& r = qr.matrixQR();
  double total = 0.0;
  for (int i = 0; i < cols.cols(); ++i) total += std::log(std::abs(r(i, i)));
  return total;
}

double abs_det_stacked(const Matrix& a, const Matrix& b) {
  Matrix m(a.rows(), a.cols() + b.cols());
  m << a, b;
  return std::abs(m.determinant());
}

void canonicalize_columns(Matrix& frame) {
  for (int j = 0; j < frame.cols(); ++j) {
    Eigen::Index arg = 0;
    frame.col(j).cwiseAbs().maxCoeff(&arg);
    if (frame(arg, j) < 0) frame.col(j) = -frame.col(j);
  }
}

// Top singular value of M^(2^power) in log scale, by normalized squaring.
double log_top_singular_of_power(Matrix m, int power) {
  double scale = m.cwiseAbs().maxCoeff();
  m /= scale;
  double log_scale = std::log(scale);
  for (int p = 0; p < power; ++p) {
    m = m * m;
    const double s = m.cwiseAbs().maxCoeff();
    m /= s;
    log_scale = 2 * log_scale + std::log(s);
  }
  return log_scale + std::log(singular_values(m)(0));
}

}  // namespace

CartanVector cartan_project(const Matrix& g, const Matrix& g_inverse) {
  const int d = static_cast<int>(g.rows());
  const Vector sg = singular_values(g);
  const Vector si = singular_values(g_inverse);
  // the smallest singular value is 1 / sigma_1(g^{-1}); sg(d-1) itself may
  // be pure rounding noise for long words
  if (!(sg(0) > 0) || !(1.0 / si(0) >= kSingularFloor)) {
    throw Error(ErrorCode::SingularMatrix, "smallest singular value below 1e-300");
  }
  Vector h(d);
  const int upper = d / 2;
  for (int i = 0; i < upper; ++i) h(i) = std::log(sg(i));
  for (int i = 0; i < upper; ++i) h(d - 1 - i) = -std::log(si(i));
  if (d % 2 == 1) {
    // middle entry from the trace-zero condition; reading it from either
    // factor directly would lose digits to the dominant singular value
    double rest = 0.0;
    for (int i = 0; i < d; ++i) {
      if (i != upper) rest += h(i);
    }
    h(upper) = -rest;
  }
  std::sort(h.data(), h.data() + d, std::greater<>());
  h.array() -= h.mean();
  return {h};
}

CartanVector cartan_project(const GroupElement& g) { return cartan_project(g.matrix(), g.inverse_matrix()); }

WeightVector weight_coords(const CartanVector& h, const RootSubset& theta) {
  WeightVector out{theta, {}};
  out.values.reserve(theta.size());
  double partial = 0.0;
  int i = 0;
  for (int k : theta.indices()) {
    for (; i < k; ++i) partial += h.entries(i);
    out.values.push_back(partial);
  }
  return out;
}

double simple_root(const CartanVector& h, int k) { return h.entries(k - 1) - h.entries(k); }

double min_root_gap(const CartanVector& h, const RootSubset& theta) {
  double m = std::numeric_limits<double>::infinity();
  for (int k : theta.indices()) m = std::min(m, simple_root(h, k));
  return m;
}

CartanVector opposition(const CartanVector& h) { return {-h.entries.reverse()}; }

LinearFunctional dual_functional(const LinearFunctional& phi) {
  if (!phi.theta.is_symmetric()) {
    throw Error(ErrorCode::NonSymmetricTheta, "dual functional needs a symmetric theta");
  }
  const int d = phi.theta.dim();
  LinearFunctional out = phi;
  for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
    out.coeffs[i] = phi.coeff(d - phi.theta.indices()[i]);
  }
  return out;
}

PartialFlag u_theta_unchecked(const GroupElement& g, const RootSubset& theta) {
  const int d = g.dim();
  if (d == 2) {
    // top eigenvector of g g^T from its entries
    const Matrix& m = g.matrix();
    const double p = m.row(0).squaredNorm(), r = m.row(1).squaredNorm(), q = m.row(0).dot(m.row(1));
    const double t = 0.5 * std::atan2(2 * q, p - r);
    Matrix frame(2, 2);
    frame << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    canonicalize_columns(frame);
    return PartialFlag::from_frame(theta, std::move(frame));
  }
  // Each side only resolves its own dominant half. For odd d the middle
  // vector is the complement of both: taken from either factor it would
  // carry an error of order eps * sigma_1 / (sigma_mid - sigma_next).
  const int h = d / 2;
  const Matrix top = left_singular_vectors(g.matrix()).leftCols(h);
  const Matrix bottom = left_singular_vectors(g.inverse_matrix().transpose()).leftCols(h);
  Matrix frame = assemble_frame(top, bottom);
  canonicalize_columns(frame);
  return PartialFlag::from_frame(theta, std::move(frame));
}

PartialFlag u_theta(const GroupElement& g, const RootSubset& theta, double gap_min) {
  const CartanVector kappa = cartan_project(g);
  for (int k : theta.indices()) {
    if (!(simple_root(kappa, k) > gap_min)) {
      throw Error(ErrorCode::DegenerateGap,
                  "alpha_" + std::to_string(k) + "(kappa(g)) = " + std::to_string(simple_root(kappa, k)));
    }
  }
  return u_theta_unchecked(g, theta);
}

WeightVector iwasawa_cocycle(const GroupElement& g, const PartialFlag& f) {
  const int d = g.dim();
  WeightVector out{f.theta(), {}};
  for (int j : f.theta().indices()) {
    if (2 * j <= d) {
      out.values.push_back(log_volume(g.matrix() * f.subspace(j)));
    } else {
      out.values.push_back(log_volume(g.inverse_matrix().transpose() * f.complement(j)));
    }
  }
  return out;
}

std::vector<double> transverse_volumes(const PartialFlag& f, const PartialFlag& g) {
  const int d = f.dim();
  std::vector<double> out;
  for (int j : f.theta().indices()) out.push_back(abs_det_stacked(f.subspace(j), g.subspace(d - j)));
  return out;
}

Transversality is_transverse(const PartialFlag& f, const PartialFlag& g, double tau) {
  if (!f.theta().is_symmetric()) {
    throw Error(ErrorCode::NonSymmetricTheta, "transversality needs a symmetric theta");
  }
  if (f.theta().empty()) return {true, 1.0};
  const auto vols = transverse_volumes(f, g);
  const double c = *std::min_element(vols.begin(), vols.end());
  return {c > tau, c};
}

WeightVector gromov_product(const PartialFlag& f, const PartialFlag& g, double tau) {
  const auto tr = is_transverse(f, g, tau);
  if (!tr.transverse) {
    throw Error(ErrorCode::NotTransverse, "conditioning " + std::to_string(tr.conditioning));
  }
  const int d = f.dim();
  WeightVector out{f.theta(), {}};
  for (int j : f.theta().indices()) {
    out.values.push_back(std::log(abs_det_stacked(f.subspace(d - j), g.subspace(j))));
  }
  return out;
}

double flag_distance(const PartialFlag& f, const PartialFlag& g) {
  if (f.dim() == 2 && !f.theta().empty()) {
    const Matrix& a = f.frame();
    const Matrix& b = g.frame();
    return std::asin(std::min(1.0, std::abs(a(0, 0) * b(1, 0) - a(1, 0) * b(0, 0))));
  }
  double worst = 0.0;
  for (int i : f.theta().indices()) {
    const Matrix u = f.subspace(i);
    const Matrix v = g.subspace(i);
    const Matrix resid = u - v * (v.transpose() * u);
    const double s = singular_values(resid)(0);
    worst = std::max(worst, std::asin(std::min(1.0, s)));
  }
  return worst;
}

namespace {

Vector sorted_log_moduli(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::EigenFailure, "eigenvalue solver did not converge");
  const auto ev = es.eigenvalues();
  Vector logs(ev.size());
  for (int i = 0; i < ev.size(); ++i) logs(i) = std::log(std::abs(ev(i)));
  std::sort(logs.data(), logs.data() + logs.size(), std::greater<>());
  return logs;
}

}  // namespace

CartanVector jordan_project(const GroupElement& g) {
  // Same split as cartan_project: small eigenvalues are read as inverses of
  // the large eigenvalues of g^{-1}.
  const int d = g.dim();
  const Vector top = sorted_log_moduli(g.matrix());
  const Vector bot = sorted_log_moduli(g.inverse_matrix());
  Vector h(d);
  const int upper = d / 2;
  for (int i = 0; i < upper; ++i) h(i) = top(i);
  for (int i = 0; i < upper; ++i) h(d - 1 - i) = -bot(i);
  if (d % 2 == 1) {
    double rest = 0.0;
    for (int i = 0; i < d; ++i) {
      if (i != upper) rest += h(i);
    }
    h(upper) = -rest;
  }
  std::sort(h.data(), h.data() + d, std::greater<>());
  h.array() -= h.mean();
  return {h};
}

PhiLength phi_length(const GroupElement& g, const LinearFunctional& phi, int power) {
  PhiLength out;
  out.value = phi(jordan_project(g));
  out.n = 1 << power;
  const int d = g.dim();
  double total = 0.0;
  for (std::size_t i = 0; i < phi.coeffs.size(); ++i) {
    const int k = phi.theta.indices()[i];
    if (phi.coeffs[i] == 0.0) continue;
    const Matrix c = 2 * k <= d ? compound_matrix(g.matrix(), k) : compound_matrix(g.inverse_matrix(), d - k);
    total += phi.coeffs[i] * log_top_singular_of_power(c, power);
  }
  out.power_estimate = total / out.n;
  return out;
}

double quint_gap_check(const GroupElement& g, const PartialFlag& f, double eps) {
  const int d = g.dim();
  const RootSubset sym = f.theta().symmetrized();
  const PartialFlag repelling = u_theta(g.inverse(), sym);
  double cond = 1.0;
  for (int j : f.theta().indices()) cond = std::min(cond, abs_det_stacked(f.subspace(j), repelling.subspace(d - j)));
  if (cond < eps) {
    throw Error(ErrorCode::PreconditionViolated,
                "flag too close to the non-transverse locus (conditioning " + std::to_string(cond) + ")");
  }
  const WeightVector b = iwasawa_cocycle(g, f);
  const WeightVector k = weight_coords(cartan_project(g), f.theta());
  return b.max_abs_diff(k);
}

Matrix compound_matrix(const Matrix& m, int k) {
  const int d = static_cast<int>(m.rows());
  std::vector<std::vector<int>> subsets;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == k) {
      subsets.push_back(cur);
      return;
    }
    for (int i = start; i < d; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  const int n = static_cast<int>(subsets.size());
  Matrix out(n, n);
  Matrix minor(k, k);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) minor(a, b) = m(subsets[r][a], subsets[c][b]);
      }
      out(r, c) = minor.determinant();
    }
  }
  return out;
}

namespace {

std::vector<PartialFlag> neighborhood(const PartialFlag& center, double radius) {
  // small rotations in every coordinate plane, both orientations
  std::vector<PartialFlag> out{center};
  const int d = center.dim();
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      for (double sgn : {-1.0, 1.0}) {
        Matrix rot = Matrix::Identity(d, d);
        const double t = sgn * radius;
        rot(a, a) = std::cos(t);
        rot(b, b) = std::cos(t);
        rot(a, b) = -std::sin(t);
        rot(b, a) = std::sin(t);
        out.emplace_back(center.theta(), rot * center.frame());
      }
    }
  }
  return out;
}

bool admissible(const PartialFlag& probe, const PartialFlag& avoid, double tau) {
  const auto vols = transverse_volumes(probe, avoid);
  return vols.empty() || *std::min_element(vols.begin(), vols.end()) >= tau;
}

}  // namespace

FlagConvergenceReport check_flag_convergence(std::span<const GroupElement> gs, const PartialFlag& f_plus,
                                             const PartialFlag& f_minus, std::span<const PartialFlag> probes,
                                             const FlagConvergenceOptions& opts) {
  const RootSubset& theta = f_plus.theta();
  if (!theta.is_symmetric()) throw Error(ErrorCode::NonSymmetricTheta, "flag convergence needs a symmetric theta");
  FlagConvergenceReport rep;
  const std::size_t n = gs.size();
  rep.tail_start = std::min(n ? n - 1 : 0, static_cast<std::size_t>(std::floor(n * (1.0 - opts.tail_fraction))));

  std::vector<const PartialFlag*> fwd_probes, bwd_probes;
  for (const auto& p : probes) {
    if (admissible(p, f_minus, opts.probe_tau)) fwd_probes.push_back(&p);
    if (admissible(p, f_plus, opts.probe_tau)) bwd_probes.push_back(&p);
  }
  const auto fwd_nbhd = fwd_probes.empty() ? std::vector<PartialFlag>{} : neighborhood(*fwd_probes.front(), opts.neighborhood);
  const auto bwd_nbhd = bwd_probes.empty() ? std::vector<PartialFlag>{} : neighborhood(*bwd_probes.front(), opts.neighborhood);

  double u_plus = 0, u_minus = 0, gap = std::numeric_limits<double>::infinity();
  double fwd = 0, bwd = 0, local = 0;
  for (std::size_t i = rep.tail_start; i < n; ++i) {
    const GroupElement& g = gs[i];
    const GroupElement gi = g.inverse();
    u_plus = std::max(u_plus, flag_distance(u_theta_unchecked(g, theta), f_plus));
    u_minus = std::max(u_minus, flag_distance(u_theta_unchecked(gi, theta), f_minus));
    gap = std::min(gap, min_root_gap(cartan_project(g), theta));
    for (const auto* p : fwd_probes) fwd = std::max(fwd, flag_distance(p->transformed(g), f_plus));
    for (const auto* p : bwd_probes) bwd = std::max(bwd, flag_distance(p->transformed(gi), f_minus));
    for (const auto& p : fwd_nbhd) local = std::max(local, flag_distance(p.transformed(g), f_plus));
    for (const auto& p : bwd_nbhd) local = std::max(local, flag_distance(p.transformed(gi), f_minus));
  }
  rep.tail_u_plus = u_plus;
  rep.tail_u_minus = u_minus;
  rep.tail_min_gap = gap;
  rep.cartan = {u_plus <= opts.distance_tol && u_minus <= opts.distance_tol && gap >= opts.gap_target,
                std::max(u_plus, u_minus)};
  rep.forward = {!fwd_probes.empty() && fwd <= opts.distance_tol, fwd};
  rep.backward = {!bwd_probes.empty() && bwd <= opts.distance_tol, bwd};
  rep.local = {!fwd_nbhd.empty() && !bwd_nbhd.empty() && local <= opts.distance_tol, local};
  return rep;
}

}  // namespace td
