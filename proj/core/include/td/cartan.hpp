#pragma once

#include <span>
#include <vector>

#include "td/types.hpp"

namespace td {

/// kappa(g): log singular values, non-increasing, summing to zero.
///
/// The upper half of the spectrum is read from g and the lower half from
/// g^{-1} (log sigma_{d+1-i}(g) = -log sigma_i(g^{-1})); this keeps every
/// entry accurate to working precision even when sigma_1/sigma_d ~ 1e15.
CartanVector cartan_project(const GroupElement& g);
CartanVector cartan_project(const Matrix& g, const Matrix& g_inverse);

/// values[k] = h_1 + ... + h_k for k in theta (the partial Cartan projection
/// in the coordinates all downstream code uses).
WeightVector weight_coords(const CartanVector& h, const RootSubset& theta);

/// alpha_k(H) = h_k - h_{k+1}.
double simple_root(const CartanVector& h, int k);
/// min_{k in theta} alpha_k(H).
double min_root_gap(const CartanVector& h, const RootSubset& theta);

/// iota(H) = (-h_d, ..., -h_1).
CartanVector opposition(const CartanVector& h);

/// phi o iota: coefficient of omega_k becomes that of omega_{d-k}.
LinearFunctional dual_functional(const LinearFunctional& phi);

/// U_theta(g): F^i spanned by the first i left singular vectors.
/// Throws DegenerateGap when alpha_k(kappa(g)) <= gap_min for some k in theta.
PartialFlag u_theta(const GroupElement& g, const RootSubset& theta, double gap_min = Tolerances{}.gap_min);
/// Same frame without the gap check (the flag is arbitrary inside a
/// degenerate singular-value cluster, but deterministic).
PartialFlag u_theta_unchecked(const GroupElement& g, const RootSubset& theta);

/// B_theta(g, F) in weight coordinates:
///   omega_j(B) = log ||(wedge^j g) v|| / ||v||, v spanning wedge^j F^j,
/// realized as 1/2 log det(M^T g^T g M) through a QR of g M (never forming
/// g^T g). For j > d/2 the dual expression on the complement with g^{-T}
/// is used instead.
WeightVector iwasawa_cocycle(const GroupElement& g, const PartialFlag& f);

struct Transversality {
  bool transverse = false;
  double conditioning = 0.0;  // min_j |det [F^j | G^{d-j}]|
};

/// F^j + G^{d-j} = R^d for every j in theta. Requires a symmetric theta.
Transversality is_transverse(const PartialFlag& f, const PartialFlag& g,
                             double tau = Tolerances{}.transverse);

/// |det [F^j | G^{d-j}]| for each j in theta (both frames orthonormal).
std::vector<double> transverse_volumes(const PartialFlag& f, const PartialFlag& g);

/// Gromov product [F, G]_theta in weight coordinates:
///   omega_j([F,G]) = log |det [F^{d-j} | G^j]|.
/// This satisfies [gF, gG] - [F, G] = -iota(B(g,F)) - B(g,G) and vanishes on
/// orthogonally complementary pairs. Throws NotTransverse.
WeightVector gromov_product(const PartialFlag& f, const PartialFlag& g,
                            double tau = Tolerances{}.transverse);

/// Largest principal angle between F^i and G^i, maximized over i in theta.
/// Takes values in [0, pi/2].
double flag_distance(const PartialFlag& f, const PartialFlag& g);
inline constexpr double kFlagDiameter = 1.5707963267948966;

struct PhiLength {
  double value = 0.0;           // phi(Jordan projection)
  double power_estimate = 0.0;  // phi(kappa(g^n)) / n
  int n = 0;
};

/// Jordan projection (sorted log-moduli of eigenvalues).
CartanVector jordan_project(const GroupElement& g);

/// l^phi(g) = phi(lambda(g)), cross-validated against phi(kappa(g^n))/n for
/// n = 2^power (repeated squaring on normalized exterior powers). The
/// power estimate differs from the length by O(1/n), hence the large default.
PhiLength phi_length(const GroupElement& g, const LinearFunctional& phi, int power = 30);

/// ||B_theta(g,F) - kappa_theta(g)||_inf. Throws PreconditionViolated when
/// F is within `eps` (transversality conditioning) of the locus of flags not
/// transverse to U(g^{-1}).
double quint_gap_check(const GroupElement& g, const PartialFlag& f, double eps);

/// k-th exterior power of a matrix in the lexicographic basis of k-subsets.
Matrix compound_matrix(const Matrix& m, int k);

struct FlagConvergenceReport {
  struct Verdict {
    bool holds = false;
    double tail_value = 0.0;  // worst tail distance (or smallest tail gap)
  };
  // (1) U(g_n) -> F+, U(g_n^{-1}) -> F-, min_alpha -> infinity
  Verdict cartan;
  // (2) g_n F -> F+ for probes off Z_{F-}
  Verdict forward;
  // (3) g_n^{-1} F -> F- for probes off Z_{F+}
  Verdict backward;
  // (4) convergence on a small open neighborhood of one probe each way
  Verdict local;
  double tail_u_plus = 0.0;
  double tail_u_minus = 0.0;
  double tail_min_gap = 0.0;
  std::size_t tail_start = 0;
  bool unanimous() const {
    return cartan.holds == forward.holds && forward.holds == backward.holds && backward.holds == local.holds;
  }
};

struct FlagConvergenceOptions {
  double distance_tol = 1e-4;  // flag distance counted as converged
  double gap_target = 9.0;     // ~ -log(distance_tol): alpha growth counted as divergent
  double probe_tau = 1e-3;     // probes must be at least this transverse
  double tail_fraction = 0.25;
  double neighborhood = 1e-3;  // radius of the open sets in condition (4)
};

/// Numerical checker for the equivalence of the four contraction conditions
/// for a sequence of group elements (KAK description vs. dynamics on flags).
FlagConvergenceReport check_flag_convergence(std::span<const GroupElement> gs, const PartialFlag& f_plus,
                                             const PartialFlag& f_minus, std::span<const PartialFlag> probes,
                                             const FlagConvergenceOptions& opts = {});

}  // namespace td
