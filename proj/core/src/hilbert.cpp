#include "td/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "td/cartan.hpp"

namespace td {

namespace {

constexpr double kBoundaryMargin = 1e-12;
constexpr double kOnBoundary = 1e-10;

double wrap_angle(double a) {
  a = std::fmod(std::abs(a), 2 * std::numbers::pi);
  return a > std::numbers::pi ? 2 * std::numbers::pi - a : a;
}

// Chord through p and q in terms of facet values: log f_j(q)/f_j(p) for the
// facet exited behind p plus log f_k(p)/f_k(q) for the one exited beyond q.
double chord_distance_from_values(const Vector& fp, const Vector& fq) {
  double behind = std::numeric_limits<double>::infinity(), ahead = behind;
  int j = -1, k = -1;
  for (int i = 0; i < fp.size(); ++i) {
    const double s = fq(i) - fp(i);
    if (s > 0) {
      const double t = fp(i) / s;
      if (t < behind) behind = t, j = i;
    } else if (s < 0) {
      const double t = fp(i) / -s;
      if (t < ahead) ahead = t, k = i;
    }
  }
  if (j < 0 || k < 0) throw Error(ErrorCode::ConfigError, "domain is not properly convex along this chord");
  return std::log(fq(j) / fp(j)) + std::log(fp(k) / fq(k));
}

double ball_busemann(const Vector& x, const Vector& xi) {
  // hyperbolic Busemann function in Klein coordinates, normalized at 0
  const double num = 1.0 - x.dot(xi);
  return 0.5 * std::log(num * num / (1.0 - x.squaredNorm()));
}

}  // namespace

ConvexDomain ConvexDomain::ball(int d0) {
  ConvexDomain o;
  o.kind_ = Kind::Ball;
  o.d0_ = d0;
  o.b0_ = Vector::Zero(d0);
  return o;
}

ConvexDomain ConvexDomain::simplex(int d0) {
  Matrix a = Matrix::Zero(d0 + 1, d0);
  Vector b = Vector::Zero(d0 + 1);
  a.topRows(d0) = Matrix::Identity(d0, d0);
  a.row(d0).setConstant(-1.0);
  b(d0) = 1.0;
  ConvexDomain o = polytope(a, b, Vector::Constant(d0, 1.0 / (d0 + 1)));
  o.kind_ = Kind::Simplex;
  return o;
}

ConvexDomain ConvexDomain::polytope(Matrix normals, Vector offsets, Vector basepoint) {
  ConvexDomain o;
  o.kind_ = Kind::Polytope;
  o.d0_ = static_cast<int>(normals.cols());
  o.a_ = std::move(normals);
  o.b_ = std::move(offsets);
  o.b0_ = std::move(basepoint);
  if (o.a_.rows() != o.b_.size() || o.b0_.size() != o.d0_) {
    throw Error(ErrorCode::ConfigError, "polytope data of inconsistent sizes");
  }
  if (!(o.margin(o.b0_) >= 1e-9)) throw Error(ErrorCode::ConfigError, "basepoint not strictly inside");
  return o;
}

Vector ConvexDomain::facet_values(const Vector& x) const {
  if (kind_ == Kind::Ball) return Vector::Constant(1, 1.0 - x.squaredNorm());
  return a_ * x + b_;
}

double ConvexDomain::margin(const Vector& x) const {
  if (kind_ == Kind::Ball) return 1.0 - x.norm();
  const Vector f = facet_values(x);
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < f.size(); ++i) m = std::min(m, f(i) / a_.row(i).norm());
  return m;
}

std::pair<double, double> ConvexDomain::chord(const Vector& p, const Vector& v) const {
  if (kind_ == Kind::Ball) {
    const double a = v.squaredNorm(), b = p.dot(v), c = p.squaredNorm() - 1.0;
    const double disc = std::sqrt(b * b - a * c);
    const double q = -(b + std::copysign(disc, b));
    double t1 = q / a, t2 = c / q;
    if (q == 0.0) t1 = -disc / a, t2 = disc / a;
    return {std::min(t1, t2), std::max(t1, t2)};
  }
  const Vector f = facet_values(p);
  const Vector s = a_ * v;
  double lo = -std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < f.size(); ++i) {
    if (s(i) > 0) lo = std::max(lo, -f(i) / s(i));
    if (s(i) < 0) hi = std::min(hi, f(i) / -s(i));
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::ConfigError, "domain is unbounded along this chord");
  }
  return {lo, hi};
}

double polytope_distance_from_values(const Vector& fp, const Vector& fq) {
  if ((fp - fq).cwiseAbs().maxCoeff() == 0.0) return 0.0;
  return chord_distance_from_values(fp, fq);
}

double hilbert_distance(const ConvexDomain& omega, const Vector& p, const Vector& q) {
  if (omega.margin(p) < kBoundaryMargin || omega.margin(q) < kBoundaryMargin) {
    throw Error(ErrorCode::PointOnBoundary, "point within 1e-12 of the boundary");
  }
  const Vector v = q - p;
  if (v.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  if (omega.kind() != ConvexDomain::Kind::Ball) {
    return chord_distance_from_values(omega.facet_values(p), omega.facet_values(q));
  }
  const auto [tm, tp] = omega.chord(p, v);
  return std::log((1.0 - tm) / -tm) + std::log(tp / (tp - 1.0));
}

BoundaryPoint boundary_point(const ConvexDomain& omega, const Vector& x) {
  BoundaryPoint out;
  out.x = x;
  if (omega.kind() == ConvexDomain::Kind::Ball) {
    out.residual = std::abs(x.norm() - 1.0);
    out.normal = x.normalized();
    out.smooth = out.residual <= kOnBoundary;
  } else {
    const Vector f = omega.facet_values(x);
    int on = 0;
    double worst = 0.0;
    double closest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < f.size(); ++i) {
      const double n = omega.normals().row(i).norm();
      const double v = f(i) / n;
      closest = std::min(closest, std::abs(v));
      worst = std::min(worst, v);
      if (std::abs(v) <= kOnBoundary) {
        ++on;
        out.normal = omega.normals().row(i).transpose() / n;
      }
    }
    out.residual = std::max(closest, -worst);
    out.smooth = on == 1 && worst >= -kOnBoundary;
  }
  if (out.residual > kOnBoundary) {
    throw Error(ErrorCode::PointOnBoundary,
                "point is not on the boundary (residual " + std::to_string(out.residual) + ")");
  }
  return out;
}

double segment_distance(const ConvexDomain& omega, const Vector& b, const Vector& p, const Vector& x) {
  const Vector v = x - b;
  // stay off the boundary point itself
  const double u_max = 1.0 - 1e-9;
  auto f = [&](double u) { return hilbert_distance(omega, p, b + u * v); };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = u_max;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-12) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::min({f1, f2, f(0.0)});
}

bool shadow_contains(const ConvexDomain& omega, const Vector& b, const Vector& p, double r, const Vector& x) {
  return segment_distance(omega, b, p, x) < r;
}

HorofunctionValue horofunction(const ConvexDomain& omega, const BoundaryPoint& y, const Vector& a,
                               const Vector& b) {
  if (!y.smooth) throw Error(ErrorCode::NotSmoothCertificate, "horofunction needs a C^1 boundary point");
  if (omega.kind() == ConvexDomain::Kind::Ball) {
    return {2.0 * (ball_busemann(a, y.x) - ball_busemann(b, y.x)), 0.0};
  }
  // Points x_eps = y + eps (b0 - y) carried by their facet values, which
  // stay accurate down to eps ~ 1e-300 (Hilbert distance ~ 690).
  Vector fy = omega.facet_values(y.x);
  for (int i = 0; i < fy.size(); ++i) {
    if (std::abs(fy(i)) <= kOnBoundary * omega.normals().row(i).norm()) fy(i) = 0.0;
  }
  const Vector fb0 = omega.facet_values(omega.basepoint());
  const Vector fa = omega.facet_values(a), fb = omega.facet_values(b);
  auto values_at = [&](double log_eps) {
    const double eps = std::exp(log_eps);
    return Vector((1.0 - eps) * fy + eps * fb0);
  };
  auto at_distance = [&](double t) {
    double lo = -650.0, hi = 0.0;  // distance decreases in eps
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (polytope_distance_from_values(fb0, values_at(mid)) > t) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const Vector fx = values_at(0.5 * (lo + hi));
    return polytope_distance_from_values(fx, fa) - polytope_distance_from_values(fx, fb);
  };
  const double f1 = at_distance(10.0), f2 = at_distance(20.0), f3 = at_distance(40.0);
  // f(t) = L + C u^{t/10}: (f2 - f3) / (f1 - f2) = u (1 + u)
  double value = f3;
  const double d12 = f1 - f2, d23 = f2 - f3;
  if (std::abs(d12) > 1e-15) {
    const double ratio = d23 / d12;
    if (ratio > 0 && ratio < 2) {
      const double u = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * ratio));
      const double c = d12 / (u - u * u);
      value = f3 - c * std::pow(u, 4);
    }
  }
  return {value, std::abs(value - f3)};
}

HopfVector hopf_coordinates(const ConvexDomain& omega, const Vector& p, const Vector& dir) {
  const auto [tm, tp] = omega.chord(p, dir);
  HopfVector h;
  h.x = boundary_point(omega, p + tm * dir);
  h.y = boundary_point(omega, p + tp * dir);
  h.s = horofunction(omega, h.y, omega.basepoint(), p).value;
  return h;
}

Vector flow_point(const ConvexDomain& omega, const Vector& p, const Vector& dir, double t) {
  const auto [tm, tp] = omega.chord(p, dir);
  // solve log((tau - tm) tp / ((-tm)(tp - tau))) = t for tau
  const double e = std::exp(t);
  const double tau = tm * tp * (1.0 - e) / (tp - tm * e);
  return p + tau * dir;
}

VisibilityReport visibility_check(const ConvexDomain& omega, const std::vector<BoundaryPoint>& sample) {
  VisibilityReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& x : sample) {
    if (!x.smooth) ++rep.non_smooth;
  }
  for (std::size_t i = 0; i < sample.size(); ++i) {
    for (std::size_t j = i + 1; j < sample.size(); ++j) {
      for (int k = 1; k <= 32; ++k) {
        const double u = k / 33.0;
        const Vector z = (1 - u) * sample[i].x + u * sample[j].x;
        rep.min_margin = std::min(rep.min_margin, omega.margin(z));
      }
    }
  }
  if (sample.size() < 2) rep.min_margin = 0.0;
  rep.pass = rep.min_margin > 0.0 && rep.non_smooth == 0;
  return rep;
}

Matrix klein_isometry(const Matrix& g) {
  Matrix h(3, 3);
  const Matrix basis[3] = {(Matrix(2, 2) << 1, 0, 0, -1).finished(), (Matrix(2, 2) << 0, 1, 1, 0).finished(),
                           Matrix::Identity(2, 2)};
  for (int c = 0; c < 3; ++c) {
    const Matrix s = g * basis[c] * g.transpose();
    h(0, c) = 0.5 * (s(0, 0) - s(1, 1));
    h(1, c) = s(0, 1);
    h(2, c) = 0.5 * (s(0, 0) + s(1, 1));
  }
  return h;
}

Vector klein_apply(const Matrix& h, const Vector& p) {
  const Vector w = h * Vector((Vector(3) << p(0), p(1), 1.0).finished());
  return Vector((Vector(2) << w(0) / w(2), w(1) / w(2)).finished());
}

Vector klein_orbit_point(const Matrix& g) {
  const Matrix s = g * g.transpose();
  const double z = 0.5 * (s(0, 0) + s(1, 1));
  return Vector((Vector(2) << 0.5 * (s(0, 0) - s(1, 1)) / z, s(0, 1) / z).finished());
}

Vector klein_boundary_point(const PartialFlag& f) {
  const double a = f.frame()(0, 0), b = f.frame()(1, 0);
  const double n = a * a + b * b;
  return Vector((Vector(2) << (a * a - b * b) / n, 2 * a * b / n).finished());
}

DiskPolar disk_polar(const Matrix& g, const Matrix& g_inverse) {
  const CartanVector k = cartan_project(g, g_inverse);
  const double p = g.row(0).squaredNorm(), q = g.row(0).dot(g.row(1)), r = g.row(1).squaredNorm();
  return {2.0 * simple_root(k, 1), std::atan2(2 * q, p - r)};
}

double disk_distance(const DiskPolar& p, const DiskPolar& q) {
  const double c = p.dist / 2, cc = q.dist / 2;
  const double half = std::sin(wrap_angle(p.angle - q.angle) / 2);
  const double sh = std::sinh((c - cc) / 2);
  const double v = sh * sh + std::sinh(c) * std::sinh(cc) * half * half;
  return 4.0 * std::asinh(std::sqrt(v));
}

double disk_segment_distance(const DiskPolar& p, const DiskPolar& q) {
  const double delta = wrap_angle(p.angle - q.angle);
  const double c = p.dist / 2;
  if (delta >= std::numbers::pi / 2) return p.dist;
  const double foot = std::atanh(std::tanh(c) * std::cos(delta));
  if (foot <= q.dist / 2) return 2.0 * std::asinh(std::sinh(c) * std::sin(delta));
  return disk_distance(p, q);
}

double disk_shadow_half_angle(double dist, double r) {
  if (dist < r) return std::numbers::pi;
  const double ratio = std::sinh(r / 2) / std::sinh(dist / 2);
  return ratio >= 1.0 ? std::numbers::pi / 2 : std::asin(ratio);
}

double coarse_additivity_check(const std::vector<std::pair<GroupElement, GroupElement>>& pairs,
                               const RootSubset& theta, double r) {
  std::string offending;
  double worst = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [g, h] = pairs[i];
    if (g.dim() == 2) {
      const double dist = disk_segment_distance(disk_polar(g.matrix(), g.inverse_matrix()),
                                                disk_polar(h.matrix(), h.inverse_matrix()));
      if (dist > r) {
        offending += (offending.empty() ? "" : ",") + std::to_string(i);
        continue;
      }
    }
    const WeightVector wh = weight_coords(cartan_project(h), theta);
    const WeightVector wg = weight_coords(cartan_project(g), theta);
    const WeightVector wgh = weight_coords(cartan_project(g.inverse() * h), theta);
    for (std::size_t j = 0; j < wh.values.size(); ++j) {
      worst = std::max(worst, std::abs(wh.values[j] - wg.values[j] - wgh.values[j]));
    }
  }
  if (!offending.empty()) {
    throw Error(ErrorCode::PreconditionViolated, "pairs not within r of the segment: " + offending);
  }
  return worst;
}

}  // namespace td
