#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "td/orbit.hpp"

namespace td {

/// phi(kappa(gamma)) for every column of a kappa table.
std::vector<double> phi_values(const Matrix& kappas, const LinearFunctional& phi);

/// Compensated (Neumaier) sum of e^{-s v} over the values; includes whatever
/// the values contain (the identity contributes e^0 = 1).
double poincare_partial(std::span<const double> values, double s);
double poincare_partial(const WordBall& ball, const LinearFunctional& phi, double s);

struct SeriesOptions {
  double window_lo = 0.2;  // regression window, percentiles of observed values
  double window_hi = 0.8;
  /// Restrict the regression to values below the smallest value on the outer
  /// sphere, where the count N(T) is complete.
  bool cap_at_complete = true;
  std::vector<double> s_factors = {0.9, 1.0, 1.1};  // partial sums at s = f * delta_hat
  std::size_t max_count_rows = 400;                  // N(T) table size
};

struct SeriesEstimate {
  LinearFunctional phi;
  std::vector<int> radii;
  std::vector<double> s_values;
  std::vector<std::vector<double>> partial_sums;  // [s index][radius index]
  std::vector<double> count_t, count_n;           // N(T) = #{phi(kappa) < T}
  std::vector<double> sphere_sums;                // S_n(delta_hat), n = 0..R
  std::vector<double> delta_by_radius;            // bisection estimate at each radius
  double delta_hat = 0.0;                         // sphere-ratio bisection
  double delta_regression = 0.0;                  // slope of log N(T)
  double band = 0.0;                              // |regression - bisection|
  double t_complete = 0.0;
  double phi_min_direction = 0.0;  // min of phi over outer-sphere unit directions
  bool possibly_infinite = false;  // phi not positive on the sampled cone
};

/// Two estimators of the critical exponent:
///  * bisection for S_R(s) = S_{R-1}(s), S_n the sphere sums (the exponent at
///    which the outer spheres stop growing), reported as delta_hat;
///  * least-squares slope of log N(T) against T over the percentile window.
/// The band is their spread. Throws InsufficientGrowth (with the counts in
/// the message) when there is too little data to regress.
SeriesEstimate critical_exponent(const WordBall& ball, const Matrix& kappas, const LinearFunctional& phi,
                                 const SeriesOptions& opts = {});
SeriesEstimate critical_exponent(const WordBall& ball, const LinearFunctional& phi, const SeriesOptions& opts = {});

/// Bisection estimate from per-sphere values only.
double sphere_ratio_exponent(const WordBall& ball, std::span<const double> values, int radius);

enum class DivergenceType { DivergentConsistent, ConvergentConsistent, Inconclusive };
std::string to_string(DivergenceType t);

/// Heuristic: slope p of log S_n(delta_hat) against log n over the outer half
/// of the spheres. p > -0.5: partial sums grow without bound at delta_hat;
/// p < -1.5: they plateau; otherwise, or with fewer than 3 spheres, no call.
DivergenceType divergence_type(const SeriesEstimate& est);

struct LimitConeSample {
  RootSubset theta;
  std::vector<std::vector<double>> directions;  // unit vectors in weight coordinates
  std::vector<double> mean;
  double spread = 0.0;  // max angle to the mean direction
  std::vector<double> coord_min, coord_max;
};

LimitConeSample limit_cone_sample(const WordBall& ball, const Matrix& kappas, const RootSubset& theta);
/// min over the sample of phi(direction); positive means phi > 0 on the cone proxy.
double cone_positivity(const LimitConeSample& cone, const LinearFunctional& phi);

struct ManhattanRow {
  double lambda = 0.0;
  double delta_hat = 0.0;
  double band = 0.0;
};

struct ManhattanReport {
  double delta1 = 0.0, delta2 = 0.0;  // exponents used to normalize phi1, phi2
  std::vector<ManhattanRow> rows;
  bool at_most_one = false;      // every value <= 1 + band
  bool midpoint_concave = false;  // over adjacent triples, within bands
  double length_probe = 0.0;      // max |l^{psi1} - l^{psi2}| over sampled elements
};

/// psi_i = delta_hat(phi_i) phi_i, then delta_hat(lambda psi1 + (1-lambda) psi2).
ManhattanReport manhattan_experiment(const WordBall& ball, const Matrix& kappas, const LinearFunctional& phi1,
                                     const LinearFunctional& phi2, const std::vector<double>& lambdas,
                                     std::size_t probe_samples = 100, std::uint64_t seed = 1);

struct EntropyDropReport {
  SeriesEstimate full;
  SeriesEstimate sub;
  double gap = 0.0;
  double band = 0.0;       // full.band + sub.band
  double hausdorff = 0.0;  // directed: full limit sample -> subgroup limit sample
  int sub_radius = 0;
};

/// Subgroup generated by words in the preset generators; each group is
/// enumerated in its own word metric. sub_radius <= 0 picks the largest
/// radius (up to 400) whose subgroup ball is no larger than the full ball,
/// so a cyclic subgroup is followed much further out than the full group.
EntropyDropReport entropy_drop_experiment(const GroupPreset& preset, const WordBall& full_ball,
                                          const Matrix& full_kappas, const std::vector<Word>& subgroup,
                                          const LinearFunctional& phi, int sub_radius = 0);
EntropyDropReport entropy_drop_experiment(const GroupPreset& preset, const std::vector<Word>& subgroup,
                                          const LinearFunctional& phi, int radius, int sub_radius = 0);

struct ExhaustionRow {
  std::string name;
  double delta_hat = 0.0;
  double band = 0.0;
  int radius = 0;
};

struct ExhaustionReport {
  std::vector<ExhaustionRow> rows;  // the chain, then the full group
  double full_delta = 0.0, full_band = 0.0;
  bool monotone = false;    // non-decreasing within bands
  double final_gap = 0.0;   // full - last subgroup
};

/// delta_hat along a chain of named subgroups of the preset (increasing).
ExhaustionReport exhaustion_experiment(const GroupPreset& preset, const WordBall& full_ball,
                                       const Matrix& full_kappas, const std::vector<std::string>& chain,
                                       const LinearFunctional& phi);

/// max over words of |delta1 l^{phi1}(rho1(w)) - delta2 l^{phi2}(rho2(w))|.
double length_rigidity_compare(const GroupPreset& a, const GroupPreset& b, const LinearFunctional& phi1,
                               const LinearFunctional& phi2, double delta1, double delta2,
                               const std::vector<Word>& words);

/// Evaluates a word over a preset's generators, carrying the inverse.
GroupElement evaluate(const GroupPreset& p, const Word& w);

}  // namespace td
