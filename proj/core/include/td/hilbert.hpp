#pragma once

#include <vector>

#include "td/types.hpp"

namespace td {

/// A properly convex domain in an affine chart R^{d0}.
///
/// Polytopes are stored as facet functionals f_i(x) = a_i . x + b_i > 0.
/// Every distance on a polytope is computed from facet values, which stay
/// accurate arbitrarily close to the boundary as long as the values are.
class ConvexDomain {
 public:
  enum class Kind { Ball, Simplex, Polytope };

  /// Unit ball (Klein model), basepoint 0.
  static ConvexDomain ball(int d0);
  /// {x_i > 0, sum x_i < 1}, basepoint the barycenter.
  static ConvexDomain simplex(int d0);
  /// Throws ConfigError when the basepoint is not strictly inside.
  static ConvexDomain polytope(Matrix normals, Vector offsets, Vector basepoint);

  Kind kind() const { return kind_; }
  int dim() const { return d0_; }
  const Vector& basepoint() const { return b0_; }
  const Matrix& normals() const { return a_; }
  const Vector& offsets() const { return b_; }

  /// Facet values (polytopes) or 1 - |x|^2 (ball).
  Vector facet_values(const Vector& x) const;
  /// Distance-like interiority margin: 1 - |x| for the ball, min_i f_i(x)/|a_i|.
  double margin(const Vector& x) const;
  bool contains(const Vector& x, double tol = 0.0) const { return margin(x) > tol; }

  /// Parameters t- < 0 < t+ where p + t v leaves the domain.
  std::pair<double, double> chord(const Vector& p, const Vector& v) const;

 private:
  Kind kind_ = Kind::Ball;
  int d0_ = 0;
  Matrix a_;
  Vector b_;
  Vector b0_;
};

/// Cross-ratio distance log (|x-q||y-p|)/(|x-p||y-q|). Throws PointOnBoundary
/// when either point is within 1e-12 of the boundary.
double hilbert_distance(const ConvexDomain& omega, const Vector& p, const Vector& q);

/// Polytope distance from facet values alone (max over facet pairs of the
/// log ratio). Exposed for points given by their facet values.
double polytope_distance_from_values(const Vector& fp, const Vector& fq);

struct BoundaryPoint {
  Vector x;
  Vector normal;          // supporting hyperplane normal
  bool smooth = false;    // C^1 certificate
  double residual = 0.0;  // distance to the boundary equation
};

/// Validates x against the boundary (residual <= 1e-10) and attaches the
/// smoothness certificate: always smooth for the ball, smooth for polytopes
/// only in the relative interior of a facet.
BoundaryPoint boundary_point(const ConvexDomain& omega, const Vector& x);

/// x is in O_r(b, p) iff the segment [b, x) comes within r of p. Minimizes
/// along the chord by golden-section search (tolerance 1e-12 in the chord
/// parameter); relies on quasi-convexity of distance along segments.
bool shadow_contains(const ConvexDomain& omega, const Vector& b, const Vector& p, double r, const Vector& x);
/// The minimized distance itself.
double segment_distance(const ConvexDomain& omega, const Vector& b, const Vector& p, const Vector& x);

struct HorofunctionValue {
  double value = 0.0;
  double residual = 0.0;  // 0 for closed forms
};

/// h_y(a, b) = lim_{x -> y} d(x, a) - d(x, b). Closed form on the ball;
/// otherwise evaluated at points of [b0, y) with d(b0, x) in {10, 20, 40} and
/// extrapolated (geometric Richardson). Throws NotSmoothCertificate.
HorofunctionValue horofunction(const ConvexDomain& omega, const BoundaryPoint& y, const Vector& a,
                               const Vector& b);

struct HopfVector {
  BoundaryPoint x;  // backward endpoint
  BoundaryPoint y;  // forward endpoint
  double s = 0.0;
};

/// (v-, v+, h_{v+}(b0, p)) for the unit tangent vector at p in direction dir.
HopfVector hopf_coordinates(const ConvexDomain& omega, const Vector& p, const Vector& dir);
/// The point at Hilbert distance t from p along dir (negative t goes back).
Vector flow_point(const ConvexDomain& omega, const Vector& p, const Vector& dir, double t);

struct VisibilityReport {
  bool pass = false;
  double min_margin = 0.0;  // over 32 interior samples of every open segment
  std::size_t non_smooth = 0;
};

VisibilityReport visibility_check(const ConvexDomain& omega, const std::vector<BoundaryPoint>& sample);

// ---- Klein disk model for SL(2,R) presets ----------------------------------
//
// SL(2,R) acts on symmetric 2x2 matrices S = [[z+x, y], [y, z-x]] by
// S -> g S g^T, preserving z^2 - x^2 - y^2. In the chart z = 1 this is the
// Klein disk; b0 = the identity form = the center. The line at angle t in
// R^2 corresponds to the boundary point at angle 2t.

/// 3x3 matrix of the action on (x, y, z).
Matrix klein_isometry(const Matrix& g);
/// Applies a projective map to an affine point of the chart z = 1.
Vector klein_apply(const Matrix& h, const Vector& p);
/// g(b0) in the chart.
Vector klein_orbit_point(const Matrix& g);
/// Boundary point of a line flag in R^2.
Vector klein_boundary_point(const PartialFlag& f);

/// Orbit point in polar form: Hilbert distance from the center and angle.
/// Computed from singular data, so it stays exact far out where the affine
/// chart has run out of digits.
struct DiskPolar {
  double dist = 0.0;
  double angle = 0.0;
};
DiskPolar disk_polar(const Matrix& g, const Matrix& g_inverse);

/// Hilbert distance between two points given in polar form.
double disk_distance(const DiskPolar& p, const DiskPolar& q);
/// Hilbert distance from p to the segment [center, q].
double disk_segment_distance(const DiskPolar& p, const DiskPolar& q);
/// Half-width of the shadow O_r(center, p) as an angle on the boundary
/// circle (pi when p is within r of the center).
double disk_shadow_half_angle(double dist, double r);

/// Coarse additivity of Cartan projections along geodesic-aligned pairs.
/// Precondition per pair: d(g b0, [b0, h b0]) <= r in the Klein disk.
/// Returns the max over pairs and theta of the omega-coordinate deviation.
/// Throws PreconditionViolated listing offending pair indices.
double coarse_additivity_check(const std::vector<std::pair<GroupElement, GroupElement>>& pairs,
                               const RootSubset& theta, double r);

}  // namespace td
