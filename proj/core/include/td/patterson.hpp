#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "td/orbit.hpp"

namespace td {

/// Weight modifier h in Patterson's construction. h = 1 is the default;
/// the slowly varying family h(t) = max(1, log t)^p is for convergent-type
/// series.
struct HFunction {
  enum class Kind { ConstantOne, SlowlyVarying };
  Kind kind = Kind::ConstantOne;
  double p = 1.0;

  static HFunction constant_one() { return {}; }
  static HFunction slowly_varying(double p) { return {Kind::SlowlyVarying, p}; }

  double operator()(double t) const;
  /// log h(e^x), the form the weights use.
  double log_at_log(double x) const;
  /// Grid check of h(l s) <= s^eps h(l) for s > 1, l > lambda0 (s up to
  /// 1e6, l up to 1e12). Also checks monotonicity on the grid.
  bool slowly_varying_on_grid(double eps, double lambda0) const;
};

/// Finite atomic probability measure, carried either on group elements
/// (matrix and inverse stored flat) or on flags.
class AtomicMeasure {
 public:
  enum class Carrier { Group, Flag };

  Carrier carrier = Carrier::Group;
  int dim = 0;
  RootSubset theta;
  LinearFunctional phi;
  double s = 0.0;
  double beta = 0.0;  // dimension used in conformality checks; equals s
  std::vector<double> weights;
  /// One word per atom; for flag atoms, the word of the group element
  /// whose U_theta placed it there.
  std::vector<Word> words;
  std::vector<double> mats, invs;  // group carriers, column-major d*d blocks
  std::vector<PartialFlag> flags;  // flag carriers
  /// Mass removed by flag_pushforward (atoms without a defined flag),
  /// before renormalization.
  double dropped_mass = 0.0;

  std::size_t size() const { return weights.size(); }
  Eigen::Map<const Matrix> matrix(std::size_t i) const;
  Eigen::Map<const Matrix> inverse_matrix(std::size_t i) const;
  GroupElement element(std::size_t i) const;
  /// Compensated sum of the weights.
  double total() const;
};

/// Weights proportional to h(e^{phi(kappa(gamma))}) e^{-s phi(kappa(gamma))},
/// normalized. Throws NonSummable when the normalizer is not a finite
/// positive number.
AtomicMeasure patterson_measure(const WordBall& ball, const Matrix& kappas, const LinearFunctional& phi, double s,
                                const HFunction& h = {});
AtomicMeasure patterson_measure(const WordBall& ball, const LinearFunctional& phi, double s, const HFunction& h = {});

/// Moves each atom to U_theta(gamma). Atoms whose gap min_{k in theta}
/// alpha_k(kappa) is <= gap_min (the identity, elliptic elements) have no
/// flag; they are dropped and the rest renormalized.
AtomicMeasure flag_pushforward(const AtomicMeasure& mu, const RootSubset& theta,
                               double gap_min = Tolerances{}.gap_min);

/// Conditional measure on atoms whose word has length >= min_length. In
/// the weak-* limit s -> delta all mass escapes to infinity; at a fixed
/// truncation radius the outer shell is the finite stand-in for that.
AtomicMeasure shell(const AtomicMeasure& mu, int min_length);

/// g_* mu. Group carriers: atoms g eta with words reduce(w_g w_eta).
/// Flag carriers: atoms g F.
AtomicMeasure pushforward(const AtomicMeasure& mu, const GroupElement& g);

/// Half the l1 distance, matching atoms by word.
double total_variation(const AtomicMeasure& a, const AtomicMeasure& b);

/// Nearest-center partition of flag space under the flag metric.
struct FlagCells {
  std::vector<PartialFlag> centers;
  std::vector<Word> words;  // words of the centers, when built from a ball
  std::size_t locate(const PartialFlag& f) const;
  std::size_t size() const { return centers.size(); }
};
/// Voronoi cells of U_theta over the sphere of radius n (elements with a
/// defined flag).
FlagCells sphere_cells(const WordBall& ball, int n, const RootSubset& theta);

struct CellRow {
  std::size_t cell = 0;
  double pushed = 0.0;   // gamma_* mu (A)
  double density = 0.0;  // integral over A of exp(-beta phi(B(gamma^-1, .)))
  double rel_error = 0.0;
  bool skipped = false;  // below mass_floor
};

struct ConformalityReport {
  double max_rel_error = 0.0;
  std::vector<CellRow> rows;
  std::size_t skipped = 0;  // EmptyCell: reported, not thrown
};

/// Compares gamma_* mu(A) with the integral over A of
/// exp(-beta phi(B(gamma^-1, F))) d mu(F), atom by atom (Iwasawa cocycle,
/// pushed atoms gamma F). Relative error |pushed - density| / density over
/// cells where both sides reach mass_floor. mu must be flag-carried.
ConformalityReport conformality_check(const AtomicMeasure& mu, const GroupElement& gamma, const FlagCells& cells,
                                      double mass_floor = 1e-4);

// ---- shadows in the Klein disk (SL(2,R) presets) ---------------------------

struct ShadowRow {
  Word word;
  int length = 0;
  double mass = 0.0;   // mu(O_r(b0, gamma b0))
  double ratio = 0.0;  // mass * exp(beta phi(kappa(gamma)))
};

struct ShadowReport {
  double r = 0.0;
  std::vector<ShadowRow> rows;
  double min_ratio = 0.0, max_ratio = 0.0;
  double constant = 0.0;  // smallest C with every ratio in [1/C, C]
  bool pass = false;      // constant <= declared C
};

/// mu(O_r(b0, gamma b0)) for flag atoms: the boundary point of each flag
/// against the shadow arc. Group-carried measures are pushed to flags
/// first (U_theta of each atom; atoms without a flag are dropped).
ShadowReport shadow_lemma_check(const AtomicMeasure& mu, const std::vector<GroupElement>& gammas, double r,
                                double declared_c = 20.0);

/// Smallest r on the grid for which shadow_lemma_check passes (R0), or a
/// negative value when none does.
double calibrate_shadow_radius(const AtomicMeasure& mu, const std::vector<GroupElement>& gammas,
                               const std::vector<double>& grid, double declared_c = 20.0);

/// Deterministic sample of up to `per_length` elements of each word length
/// in [lo, hi].
std::vector<GroupElement> sample_by_length(const WordBall& ball, int lo, int hi, std::size_t per_length,
                                           std::uint64_t seed);

struct ConicalRow {
  int n = 0;
  double mass = 0.0;  // mass of the union of shadows of elements with |gamma| >= n
};

struct ConicalReport {
  std::vector<ConicalRow> rows;  // the N-schedule
  double estimate = 0.0;         // last row
};

/// Mass of the union over |gamma| >= N (gamma in the ball) of the shadow
/// arcs O_r(b0, gamma b0), for N in the schedule; the intersection over N
/// is approximated by the last entry. mu must be flag-carried in d = 2
/// (a group-carried measure is pushed to flags first).
ConicalReport conical_mass_estimate(const AtomicMeasure& mu, const WordBall& ball, double r,
                                    const std::vector<int>& schedule);

/// s_k = delta_hat (1 + 2^-k), k = 1..steps.
std::vector<double> s_schedule(double delta_hat, int steps);

// ---- serialization ----------------------------------------------------------

/// JSON with atoms as word + weight (17 significant digits); flag atoms
/// also carry their frames so the round trip is exact.
std::string to_json(const AtomicMeasure& mu);
/// Group carriers are rebuilt from the words over the given generators.
AtomicMeasure measure_from_json(const std::string& text, const std::vector<GroupElement>& generators);

}  // namespace td
