#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "td/patterson.hpp"

namespace td {

/// Bowen-Margulis-Sullivan density on pairs of flag atoms. x atoms come
/// from mubar (built with the dual functional), y atoms from mu; the
/// density is exp(-beta phi([xi_x, xi_y])) times both weights. It takes no
/// flow-time argument: translation invariance along the flow is structural.
struct BMSAssembly {
  AtomicMeasure mu, mubar;
  double beta = 0.0;
  LinearFunctional phi;
  /// Row-major mubar.size() x mu.size() table of exp(-beta phi([x, y]))
  /// (without weights), NaN for non-transverse pairs. Empty when the pair
  /// count exceeds the cap given to assemble_bms.
  std::vector<double> table;
};

BMSAssembly assemble_bms(AtomicMeasure mubar, AtomicMeasure mu, double beta, const LinearFunctional& phi,
                         std::size_t table_cap = std::size_t{1} << 20);

/// Throws NotTransverse when the two flags are not transverse.
double bms_density(const BMSAssembly& m, std::size_t x, std::size_t y);

/// The same density with the roles swapped: mu <-> mubar, phi -> phi o iota.
BMSAssembly swapped(const BMSAssembly& m);

struct InvarianceRow {
  std::size_t cell_x = 0, cell_y = 0;
  double original = 0.0;     // m(A x B)
  double transported = 0.0;  // m(gamma^-1 A x gamma^-1 B)
  double residual = 0.0;
};

struct InvarianceReport {
  double max_rel_error = 0.0;
  std::vector<InvarianceRow> rows;
  std::size_t skipped_pairs = 0;  // non-transverse bin pairs, left out on both sides
  std::size_t skipped_cells = 0;  // cell pairs below mass_floor
};

/// |gamma_* m (A x B) / m (A x B) - 1| over pairs of separated cells:
/// cells whose center words start with different letters (distinct cells
/// when the cells carry no words). The density blows up on the diagonal,
/// so adjacent cells would be dominated by near-diagonal pairs.
/// mass_floor is relative to the total over compared pairs.
///
/// Atom-level transport: an atom with word w moves to U(gamma w) evaluated
/// from the generators (atoms without a word move to gamma F). Pair sums run
/// over bins of atoms sharing a word prefix of length bin_depth, with the
/// density evaluated at the heaviest atom of each bin; the same bin density
/// is used on both sides. Pairs of bins with equal prefixes are excluded.
InvarianceReport invariance_residual(const BMSAssembly& m, const GroupElement& gamma,
                                     const std::vector<GroupElement>& generators, const FlagCells& cells,
                                     int bin_depth = 5, double mass_floor = 1e-4);

struct TrajectoryRow {
  double t = 0.0;
  std::string cell;  // word of the nearest orbit point
  bool reentry = false;
};

struct RecurrenceReport {
  double horizon = 0.0;
  double step = 0.0;
  double cell_radius = 0.0;  // 2 x max generator displacement
  int k_threshold = 0;       // re-entries needed to count as returning
  std::size_t samples = 0;
  std::size_t returning = 0;
  double return_fraction = 0.0;
  double escape_fraction = 0.0;
  double mean_reentries = 0.0;
  std::vector<int> reentries;  // per sample
  std::vector<TrajectoryRow> trajectory;  // first sample
  /// "consistent with conservative", "consistent with dissipative" or
  /// "inconclusive", always followed by the horizon.
  std::string verdict;
};

/// Samples atom pairs (x from mubar, y from mu) by weight and walks the
/// geodesic from the foot of b0 towards y for t in [0, horizon], tracking
/// the nearest orbit point by greedy descent over the generators. A
/// re-entry is a step inside the truncated Dirichlet cell of a new orbit
/// point. Klein-disk presets only.
RecurrenceReport recurrence_diagnostic(const GroupPreset& preset, const BMSAssembly& m, double horizon,
                                       std::size_t samples, std::uint64_t seed = 1, double step = 0.25);

/// t, cell_id, reentry.
std::string trajectory_csv(const RecurrenceReport& r);

}  // namespace td
