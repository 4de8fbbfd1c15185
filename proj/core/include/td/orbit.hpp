#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "td/presets.hpp"
#include "td/types.hpp"

namespace td {

struct DedupReport {
  std::size_t candidates = 0;  // products formed
  std::size_t merged = 0;      // candidates identified with a stored element
  std::size_t probes = 0;      // hash buckets inspected
  std::size_t near_misses = 0;  // entrywise matches rejected by the word test
  bool exact = false;          // integer mode
};

/// Breadth-first word ball of a finitely generated group.
///
/// Elements are stored flat: matrix and inverse in column-major blocks, plus
/// the BFS tree (parent, last letter). Words are rebuilt from the tree, so an
/// element's word always extends its parent's word by one letter.
class WordBall {
 public:
  int dim() const { return dim_; }
  int radius() const { return radius_; }
  std::size_t size() const { return parent_.size(); }

  Eigen::Map<const Matrix> matrix(std::size_t i) const;
  Eigen::Map<const Matrix> inverse_matrix(std::size_t i) const;
  GroupElement element(std::size_t i) const;
  Word word(std::size_t i) const;
  int length(std::size_t i) const { return length_[i]; }
  std::int64_t parent(std::size_t i) const { return parent_[i]; }
  int letter(std::size_t i) const { return letter_[i]; }

  /// Elements of word length n occupy [sphere_begin(n), sphere_end(n)).
  std::size_t sphere_begin(int n) const { return offsets_.at(static_cast<std::size_t>(n)); }
  std::size_t sphere_end(int n) const { return offsets_.at(static_cast<std::size_t>(n) + 1); }
  std::size_t sphere_size(int n) const { return sphere_end(n) - sphere_begin(n); }

  const std::vector<GroupElement>& generators() const { return generators_; }
  const DedupReport& dedup() const { return dedup_; }
  const std::string& preset_name() const { return preset_name_; }

  /// Ball of radius r <= radius() sharing storage order (a prefix).
  WordBall truncated(int r) const;

 private:
  friend class BallBuilder;
  friend WordBall load_ball(const std::filesystem::path&, std::uint64_t);
  friend void save_ball(const std::filesystem::path&, const WordBall&, std::uint64_t);

  int dim_ = 0;
  int radius_ = 0;
  std::string preset_name_;
  std::vector<GroupElement> generators_;
  std::vector<double> mats_;
  std::vector<double> invs_;
  std::vector<std::int64_t> parent_;
  std::vector<int> letter_;
  std::vector<int> length_;
  std::vector<std::size_t> offsets_;
  DedupReport dedup_;
};

/// Thrown when the ball outgrows its budget; carries what was built.
class BudgetExceededError : public Error {
 public:
  BudgetExceededError(WordBall partial, const std::string& what)
      : Error(ErrorCode::BudgetExceeded, what), partial_(std::move(partial)) {}
  const WordBall& partial() const { return partial_; }

 private:
  WordBall partial_;
};

/// Shortlex BFS over reduced words (letter order g1, g1^-1, g2, g2^-1, ...).
/// Duplicate candidates come from quantized hashing plus an entrywise test;
/// a candidate is merged only if the reduced word w'^-1 w, evaluated from
/// the generators, is +-I within dedup_identity. (Entries alone cannot
/// separate long words: distinct elements of a Schottky group can agree to
/// far below double precision.) Throws NonDiscreteSuspect when a free preset
/// produces a confirmed collision. For free presets (non-integer) the check
/// runs on words of length <= kFreeCheckRadius only; longer reduced words
/// are distinct by freeness and are stored without lookup.
inline constexpr int kFreeCheckRadius = 6;
WordBall enumerate_ball(const GroupPreset& preset, int radius, std::size_t budget = 5'000'000,
                        const Tolerances& tol = {});

/// Stable 64-bit key of (preset generators, radius, tolerances).
std::uint64_t ball_cache_key(const GroupPreset& preset, int radius, const Tolerances& tol);
void save_ball(const std::filesystem::path& path, const WordBall& ball, std::uint64_t key);
/// Throws IoError when the file is missing, corrupt, or has another key.
WordBall load_ball(const std::filesystem::path& path, std::uint64_t key);
/// enumerate_ball behind a file cache in `dir` (no caching when dir is empty).
WordBall enumerate_ball_cached(const GroupPreset& preset, int radius, const std::filesystem::path& dir,
                               std::size_t budget = 5'000'000, const Tolerances& tol = {});

/// Per-sphere Cartan data: column i holds kappa(element i).
Matrix ball_cartan(const WordBall& ball);

struct DivergenceRow {
  int n = 0;
  std::size_t count = 0;
  double min_gap = 0.0;  // min over the sphere of min_{k in theta} alpha_k
};

struct DivergenceReport {
  std::vector<DivergenceRow> rows;
  double slope = 0.0;      // fitted growth of min_gap per word-length step
  bool divergent = false;  // "divergent-consistent"
};

/// Verdict: over the outer half of the radii the sphere minima grow at
/// least `min_slope` per step (least squares) and end above where they
/// started. Linear growth in n is what a uniform gap bound predicts.
DivergenceReport divergence_diagnostic(const WordBall& ball, const RootSubset& theta, const Matrix& kappas,
                                       double min_slope = 0.05);
DivergenceReport divergence_diagnostic(const WordBall& ball, const RootSubset& theta);

struct ConditioningSummary {
  std::size_t pairs = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0;
};

struct LimitSetSample {
  std::vector<PartialFlag> flags;
  std::vector<Word> words;
  std::vector<double> weights;  // uniform
  /// Over pairs whose words start with different letters (they sit in
  /// different ping-pong blocks, which is where a uniform bound is expected).
  ConditioningSummary cross_cylinder;
};

/// U_theta of the outer sphere. Pair statistics use at most `max_pairs`
/// pairs chosen deterministically from `seed`.
LimitSetSample limit_set_sample(const WordBall& ball, const RootSubset& theta, std::size_t max_pairs = 20000,
                                std::uint64_t seed = 1);

/// A point of Gamma union Lambda_theta(Gamma).
using CompactPoint = std::variant<GroupElement, PartialFlag>;

/// m_theta(g) = exp(-min_{alpha in theta} alpha(kappa(g))).
double m_theta(const GroupElement& g, const RootSubset& theta);

/// The explicit metric on the compactification: discrete part weighted by
/// m_theta plus the flag distance rescaled to diameter 1.
double compactification_distance(const CompactPoint& a, const CompactPoint& b, const RootSubset& theta,
                                 const Tolerances& tol = {});

/// Per-sphere statistics as CSV (n, count, min_gap, max_gap, mean_omega1).
std::string sphere_stats_csv(const WordBall& ball, const RootSubset& theta, const Matrix& kappas);

}  // namespace td
