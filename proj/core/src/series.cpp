#include "td/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "td/cartan.hpp"

namespace td {

namespace {

// Neumaier's compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// log sum_{i in [b, e)} exp(-s v_i)
double log_sum_exp(std::span<const double> v, std::size_t b, std::size_t e, double s) {
  if (b >= e) return -std::numeric_limits<double>::infinity();
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = b; i < e; ++i) shift = std::max(shift, -s * v[i]);
  CompensatedSum acc;
  for (std::size_t i = b; i < e; ++i) acc.add(std::exp(-s * v[i] - shift));
  return shift + std::log(acc.value());
}

double bisect_sphere_ratio(const WordBall& ball, std::span<const double> values, int r) {
  if (r < 1) throw Error(ErrorCode::InsufficientGrowth, "radius must be at least 1");
  const std::size_t ob = ball.sphere_begin(r), oe = ball.sphere_end(r);
  const std::size_t ib = ball.sphere_begin(r - 1), ie = ball.sphere_end(r - 1);
  if (ob == oe) throw Error(ErrorCode::InsufficientGrowth, "outer sphere is empty");
  auto f = [&](double s) { return log_sum_exp(values, ob, oe, s) - log_sum_exp(values, ib, ie, s); };
  if (!(f(0.0) > 0.0)) return 0.0;  // spheres not growing: subexponential
  double lo = 0.0, hi = 1.0;
  int doublings = 0;
  while (f(hi) > 0.0) {
    lo = hi;
    hi *= 2;
    if (++doublings > 60) {
      throw Error(ErrorCode::InsufficientGrowth, "sphere sums still growing at s = " + std::to_string(hi));
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

std::vector<PartialFlag> outer_flags(const WordBall& ball, const RootSubset& theta, std::size_t cap) {
  const int r = ball.radius();
  const std::size_t b = ball.sphere_begin(r), n = ball.sphere_size(r);
  const std::size_t stride = std::max<std::size_t>(1, (n + cap - 1) / cap);
  std::vector<PartialFlag> out;
  for (std::size_t i = 0; i < n; i += stride) out.push_back(u_theta_unchecked(ball.element(b + i), theta));
  return out;
}

}  // namespace

std::vector<double> phi_values(const Matrix& kappas, const LinearFunctional& phi) {
  std::vector<double> out(static_cast<std::size_t>(kappas.cols()));
  for (Eigen::Index i = 0; i < kappas.cols(); ++i) out[static_cast<std::size_t>(i)] = phi(CartanVector{kappas.col(i)});
  return out;
}

double poincare_partial(std::span<const double> values, double s) {
  CompensatedSum acc;
  for (double v : values) acc.add(std::exp(-s * v));
  return acc.value();
}

double poincare_partial(const WordBall& ball, const LinearFunctional& phi, double s) {
  const auto v = phi_values(ball_cartan(ball), phi);
  return poincare_partial(v, s);
}

double sphere_ratio_exponent(const WordBall& ball, std::span<const double> values, int radius) {
  return bisect_sphere_ratio(ball, values, radius);
}

SeriesEstimate critical_exponent(const WordBall& ball, const Matrix& kappas, const LinearFunctional& phi,
                                 const SeriesOptions& opts) {
  const int r = ball.radius();
  if (r < 2) throw Error(ErrorCode::InsufficientGrowth, "need radius >= 2, got " + std::to_string(r));
  const auto values = phi_values(kappas, phi);

  SeriesEstimate est;
  est.phi = phi;
  est.delta_hat = bisect_sphere_ratio(ball, values, r);
  for (int k = 1; k <= r; ++k) {
    est.radii.push_back(k);
    est.delta_by_radius.push_back(bisect_sphere_ratio(ball, values, k));
  }

  // direction positivity over the outer sphere
  est.phi_min_direction = std::numeric_limits<double>::infinity();
  est.t_complete = std::numeric_limits<double>::infinity();
  for (std::size_t i = ball.sphere_begin(r); i < ball.sphere_end(r); ++i) {
    const double norm = kappas.col(static_cast<Eigen::Index>(i)).norm();
    if (norm > 0) est.phi_min_direction = std::min(est.phi_min_direction, values[i] / norm);
    est.t_complete = std::min(est.t_complete, values[i]);
  }
  est.possibly_infinite = !(est.phi_min_direction > 0.0);

  // count regression
  std::vector<double> sorted;
  for (double v : values) {
    if (!opts.cap_at_complete || v < est.t_complete) sorted.push_back(v);
  }
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const auto lo = static_cast<std::size_t>(std::floor(opts.window_lo * static_cast<double>(m)));
  const auto hi = std::min(m, static_cast<std::size_t>(std::ceil(opts.window_hi * static_cast<double>(m))));
  std::vector<double> xs, ys;
  const std::size_t step = std::max<std::size_t>(1, (hi - lo) / 4000);
  for (std::size_t i = lo; i < hi; i += step) {
    xs.push_back(sorted[i]);
    ys.push_back(std::log(static_cast<double>(i + 1)));
  }
  if (xs.size() < 5 || !(xs.back() > xs.front())) {
    std::ostringstream msg;
    msg << m << " values below T_complete = " << est.t_complete << ", " << xs.size() << " in the window";
    throw Error(ErrorCode::InsufficientGrowth, msg.str());
  }
  est.delta_regression = fit_slope(xs, ys);
  est.band = std::abs(est.delta_regression - est.delta_hat);

  const std::size_t rows = std::min(opts.max_count_rows, m);
  for (std::size_t k = 0; k < rows; ++k) {
    const std::size_t i = rows > 1 ? k * (m - 1) / (rows - 1) : 0;
    est.count_t.push_back(sorted[i]);
    est.count_n.push_back(static_cast<double>(i + 1));
  }

  for (int n = 0; n <= r; ++n) {
    CompensatedSum acc;
    for (std::size_t i = ball.sphere_begin(n); i < ball.sphere_end(n); ++i) acc.add(std::exp(-est.delta_hat * values[i]));
    est.sphere_sums.push_back(acc.value());
  }
  for (double f : opts.s_factors) {
    const double s = f * est.delta_hat;
    est.s_values.push_back(s);
    std::vector<double> partial;
    CompensatedSum acc;
    for (int n = 0; n <= r; ++n) {
      for (std::size_t i = ball.sphere_begin(n); i < ball.sphere_end(n); ++i) acc.add(std::exp(-s * values[i]));
      if (n >= 1) partial.push_back(acc.value());
    }
    est.partial_sums.push_back(std::move(partial));
  }
  return est;
}

SeriesEstimate critical_exponent(const WordBall& ball, const LinearFunctional& phi, const SeriesOptions& opts) {
  return critical_exponent(ball, ball_cartan(ball), phi, opts);
}

std::string to_string(DivergenceType t) {
  switch (t) {
    case DivergenceType::DivergentConsistent:
      return "divergent-consistent (heuristic)";
    case DivergenceType::ConvergentConsistent:
      return "convergent-consistent (heuristic)";
    case DivergenceType::Inconclusive:
      break;
  }
  return "inconclusive (heuristic)";
}

DivergenceType divergence_type(const SeriesEstimate& est) {
  const int r = static_cast<int>(est.sphere_sums.size()) - 1;
  std::vector<double> xs, ys;
  for (int n = std::max(1, r / 2); n <= r; ++n) {
    const double s = est.sphere_sums[static_cast<std::size_t>(n)];
    if (!(s > 0)) continue;
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(s));
  }
  if (xs.size() < 3) return DivergenceType::Inconclusive;
  const double p = fit_slope(xs, ys);
  if (p > -0.5) return DivergenceType::DivergentConsistent;
  if (p < -1.5) return DivergenceType::ConvergentConsistent;
  return DivergenceType::Inconclusive;
}

LimitConeSample limit_cone_sample(const WordBall& ball, const Matrix& kappas, const RootSubset& theta) {
  LimitConeSample out;
  out.theta = theta;
  const int r = ball.radius();
  const std::size_t k = theta.size();
  out.mean.assign(k, 0.0);
  out.coord_min.assign(k, std::numeric_limits<double>::infinity());
  out.coord_max.assign(k, -std::numeric_limits<double>::infinity());
  for (std::size_t i = ball.sphere_begin(r); i < ball.sphere_end(r); ++i) {
    const WeightVector w = weight_coords({kappas.col(static_cast<Eigen::Index>(i))}, theta);
    double norm = 0;
    for (double x : w.values) norm += x * x;
    norm = std::sqrt(norm);
    if (!(norm > 0)) continue;
    std::vector<double> dir(k);
    for (std::size_t j = 0; j < k; ++j) {
      dir[j] = w.values[j] / norm;
      out.mean[j] += dir[j];
      out.coord_min[j] = std::min(out.coord_min[j], dir[j]);
      out.coord_max[j] = std::max(out.coord_max[j], dir[j]);
    }
    out.directions.push_back(std::move(dir));
  }
  double mnorm = 0;
  for (double x : out.mean) mnorm += x * x;
  mnorm = std::sqrt(mnorm);
  if (mnorm > 0) {
    for (double& x : out.mean) x /= mnorm;
  }
  for (const auto& dir : out.directions) {
    double dot = 0;
    for (std::size_t j = 0; j < k; ++j) dot += dir[j] * out.mean[j];
    // angle via the chord, which is accurate for tiny angles
    double chord = 0;
    for (std::size_t j = 0; j < k; ++j) chord += (dir[j] - out.mean[j]) * (dir[j] - out.mean[j]);
    const double angle = dot >= 0 ? 2 * std::asin(std::min(1.0, std::sqrt(chord) / 2)) : std::acos(std::max(-1.0, dot));
    out.spread = std::max(out.spread, angle);
  }
  return out;
}

double cone_positivity(const LimitConeSample& cone, const LinearFunctional& phi) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& dir : cone.directions) {
    double v = 0;
    for (std::size_t j = 0; j < dir.size(); ++j) v += phi.coeff(cone.theta.indices()[j]) * dir[j];
    best = std::min(best, v);
  }
  return best;
}

ManhattanReport manhattan_experiment(const WordBall& ball, const Matrix& kappas, const LinearFunctional& phi1,
                                     const LinearFunctional& phi2, const std::vector<double>& lambdas,
                                     std::size_t probe_samples, std::uint64_t seed) {
  ManhattanReport rep;
  rep.delta1 = critical_exponent(ball, kappas, phi1).delta_hat;
  rep.delta2 = critical_exponent(ball, kappas, phi2).delta_hat;
  if (!(rep.delta1 > 0) || !(rep.delta2 > 0)) {
    throw Error(ErrorCode::InsufficientGrowth, "Manhattan curve needs positive exponents at both ends");
  }
  const LinearFunctional psi1 = phi1.scaled(rep.delta1);
  const LinearFunctional psi2 = phi2.scaled(rep.delta2);
  rep.at_most_one = true;
  for (double lambda : lambdas) {
    const SeriesEstimate est = critical_exponent(ball, kappas, combine(psi1, psi2, lambda));
    rep.rows.push_back({lambda, est.delta_hat, est.band});
    if (est.delta_hat > 1 + est.band + 1e-12) rep.at_most_one = false;
  }
  rep.midpoint_concave = true;
  for (std::size_t i = 1; i + 1 < rep.rows.size(); ++i) {
    const auto &a = rep.rows[i - 1], &b = rep.rows[i], &c = rep.rows[i + 1];
    const double w = (b.lambda - a.lambda) / (c.lambda - a.lambda);
    const double chord = (1 - w) * a.delta_hat + w * c.delta_hat;
    if (b.delta_hat < chord - std::max({a.band, b.band, c.band}) - 1e-12) rep.midpoint_concave = false;
  }
  if (ball.size() > 1) {
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < probe_samples; ++k) {
      const std::size_t i = 1 + rng() % (ball.size() - 1);
      // eigenvalues of a long conjugate lose ~eps * |conjugator|^2; use the short representative
      const Word w = cyclic_reduce(ball.word(i));
      const CartanVector lam = jordan_project(GroupElement::from_pair(
          evaluate_word(w, ball.generators()), evaluate_word(invert_word(w), ball.generators()), w));
      rep.length_probe = std::max(rep.length_probe, std::abs(psi1(lam) - psi2(lam)));
    }
  }
  return rep;
}

GroupElement evaluate(const GroupPreset& p, const Word& w) {
  GroupElement g = GroupElement::identity(p.generators.front().dim());
  for (int letter : w) {
    const auto& gen = p.generators.at(static_cast<std::size_t>(std::abs(letter)) - 1);
    g = g * (letter > 0 ? gen : gen.inverse());
  }
  return GroupElement::from_pair(g.matrix(), g.inverse_matrix(), w);
}

namespace {

int auto_sub_radius(const GroupPreset& sub, std::size_t full_size) {
  // largest radius whose ball is no bigger than the full one, so both
  // estimates see comparable data
  constexpr int kMaxRadius = 400;
  int r = 2;
  while (r < kMaxRadius) {
    try {
      if (enumerate_ball(sub, r + 1, full_size).size() > full_size) break;
    } catch (const BudgetExceededError&) {
      break;
    }
    ++r;
  }
  return r;
}

}  // namespace

EntropyDropReport entropy_drop_experiment(const GroupPreset& preset, const WordBall& full_ball,
                                          const Matrix& full_kappas, const std::vector<Word>& subgroup,
                                          const LinearFunctional& phi, int sub_radius) {
  EntropyDropReport rep;
  rep.full = critical_exponent(full_ball, full_kappas, phi);
  const GroupPreset sub = subgroup_preset(preset, subgroup, preset.name + "-sub", preset.free);
  if (sub_radius <= 0) {
    sub_radius = auto_sub_radius(sub, full_ball.size());
  }
  rep.sub_radius = sub_radius;
  const WordBall sub_ball = enumerate_ball(sub, sub_radius);
  rep.sub = critical_exponent(sub_ball, phi);
  rep.gap = rep.full.delta_hat - rep.sub.delta_hat;
  rep.band = rep.full.band + rep.sub.band;

  constexpr std::size_t kCap = 1000;
  const auto a = outer_flags(full_ball, preset.theta, kCap);
  const auto b = outer_flags(sub_ball, preset.theta, kCap);
  for (const auto& x : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& y : b) best = std::min(best, flag_distance(x, y));
    rep.hausdorff = std::max(rep.hausdorff, best);
  }
  return rep;
}

EntropyDropReport entropy_drop_experiment(const GroupPreset& preset, const std::vector<Word>& subgroup,
                                          const LinearFunctional& phi, int radius, int sub_radius) {
  const WordBall full = enumerate_ball(preset, radius);
  return entropy_drop_experiment(preset, full, ball_cartan(full), subgroup, phi, sub_radius);
}

ExhaustionReport exhaustion_experiment(const GroupPreset& preset, const WordBall& full_ball,
                                       const Matrix& full_kappas, const std::vector<std::string>& chain,
                                       const LinearFunctional& phi) {
  ExhaustionReport rep;
  const SeriesEstimate full = critical_exponent(full_ball, full_kappas, phi);
  rep.full_delta = full.delta_hat;
  rep.full_band = full.band;
  for (const auto& name : chain) {
    const auto it = preset.subgroups.find(name);
    if (it == preset.subgroups.end()) throw Error(ErrorCode::ConfigError, "unknown subgroup " + name);
    const EntropyDropReport drop = entropy_drop_experiment(preset, full_ball, full_kappas, it->second, phi, 0);
    rep.rows.push_back({name, drop.sub.delta_hat, drop.sub.band, drop.sub_radius});
  }
  rep.rows.push_back({"full", full.delta_hat, full.band, full_ball.radius()});
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    if (rep.rows[i].delta_hat < rep.rows[i - 1].delta_hat - std::max(rep.rows[i].band, rep.rows[i - 1].band)) {
      rep.monotone = false;
    }
  }
  const auto& last_sub = rep.rows.size() > 1 ? rep.rows[rep.rows.size() - 2] : rep.rows.back();
  rep.final_gap = rep.full_delta - last_sub.delta_hat;
  return rep;
}

double length_rigidity_compare(const GroupPreset& a, const GroupPreset& b, const LinearFunctional& phi1,
                               const LinearFunctional& phi2, double delta1, double delta2,
                               const std::vector<Word>& words) {
  if (a.generators.size() != b.generators.size()) {
    throw Error(ErrorCode::ConfigError, "presets do not share an alphabet");
  }
  double worst = 0.0;
  for (const auto& w : words) {
    const Word c = cyclic_reduce(w);
    const double l1 = phi1(jordan_project(evaluate(a, c)));
    const double l2 = phi2(jordan_project(evaluate(b, c)));
    worst = std::max(worst, std::abs(delta1 * l1 - delta2 * l2));
  }
  return worst;
}

}  // namespace td
