#include "td/patterson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <unordered_map>

#include <json.hpp>

#include "td/cartan.hpp"
#include "td/hilbert.hpp"

namespace td {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::string word_key(const Word& w) {
  return {reinterpret_cast<const char*>(w.data()), w.size() * sizeof(int)};
}

Word concat_reduce(const Word& a, const Word& b) {
  Word w = a;
  w.insert(w.end(), b.begin(), b.end());
  return free_reduce(w);
}

double wrap_2pi(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0 ? a + kTwoPi : a;
}

double line_angle_of(const PartialFlag& f) { return std::atan2(f.frame()(1, 0), f.frame()(0, 0)); }

// Nearest center for lines in R^2 given by angles (distance |sin(t - c)|).
std::size_t locate_line(const std::vector<double>& centers, double t) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const double dd = std::abs(std::sin(t - centers[k]));
    if (dd < bd) {
      bd = dd;
      best = k;
    }
  }
  return best;
}

void finish_rows(ConformalityReport& rep, const std::vector<CompensatedSum>& pushed,
                 const std::vector<CompensatedSum>& density, double mass_floor) {
  for (std::size_t c = 0; c < pushed.size(); ++c) {
    CellRow row{c, pushed[c].value(), density[c].value(), 0.0, false};
    if (row.pushed < mass_floor || row.density < mass_floor) {
      row.skipped = true;
      ++rep.skipped;
    } else {
      row.rel_error = std::abs(row.pushed - row.density) / row.density;
      rep.max_rel_error = std::max(rep.max_rel_error, row.rel_error);
    }
    rep.rows.push_back(row);
  }
}

}  // namespace

double HFunction::operator()(double t) const {
  if (kind == Kind::ConstantOne) return 1.0;
  return std::pow(std::max(1.0, std::log(t)), p);
}

double HFunction::log_at_log(double x) const {
  if (kind == Kind::ConstantOne) return 0.0;
  return p * std::log(std::max(1.0, x));
}

bool HFunction::slowly_varying_on_grid(double eps, double lambda0) const {
  double prev = -std::numeric_limits<double>::infinity();
  for (double ll = std::log(lambda0); ll <= std::log(1e12); ll += 0.25) {
    const double hl = log_at_log(ll);
    if (hl < prev) return false;
    prev = hl;
    for (double ls = 0.01; ls <= std::log(1e6); ls += 0.25) {
      if (log_at_log(ll + ls) > eps * ls + hl + 1e-12) return false;
    }
  }
  return true;
}

Eigen::Map<const Matrix> AtomicMeasure::matrix(std::size_t i) const {
  const auto b = static_cast<std::size_t>(dim) * dim;
  return {mats.data() + i * b, dim, dim};
}

Eigen::Map<const Matrix> AtomicMeasure::inverse_matrix(std::size_t i) const {
  const auto b = static_cast<std::size_t>(dim) * dim;
  return {invs.data() + i * b, dim, dim};
}

GroupElement AtomicMeasure::element(std::size_t i) const {
  return GroupElement::from_pair(matrix(i), inverse_matrix(i), words.empty() ? Word{} : words[i]);
}

double AtomicMeasure::total() const {
  CompensatedSum acc;
  for (double w : weights) acc.add(w);
  return acc.value();
}

AtomicMeasure patterson_measure(const WordBall& ball, const Matrix& kappas, const LinearFunctional& phi, double s,
                                const HFunction& h) {
  AtomicMeasure mu;
  mu.carrier = AtomicMeasure::Carrier::Group;
  mu.dim = ball.dim();
  mu.theta = phi.theta;
  mu.phi = phi;
  mu.s = s;
  mu.beta = s;
  const std::size_t n = ball.size();
  std::vector<double> logw(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = phi(CartanVector{kappas.col(static_cast<Eigen::Index>(i))});
    logw[i] = h.log_at_log(v) - s * v;
    top = std::max(top, logw[i]);
  }
  if (!std::isfinite(top)) throw Error(ErrorCode::NonSummable, "non-finite log-weight");
  CompensatedSum z;
  mu.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    mu.weights[i] = std::exp(logw[i] - top);
    z.add(mu.weights[i]);
  }
  const double total = z.value();
  if (!(total > 0) || !std::isfinite(total)) throw Error(ErrorCode::NonSummable, "normalizer not finite");
  for (double& w : mu.weights) w /= total;

  const std::size_t b = static_cast<std::size_t>(mu.dim) * mu.dim;
  mu.mats.resize(n * b);
  mu.invs.resize(n * b);
  mu.words.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Map<Matrix>(mu.mats.data() + i * b, mu.dim, mu.dim) = ball.matrix(i);
    Eigen::Map<Matrix>(mu.invs.data() + i * b, mu.dim, mu.dim) = ball.inverse_matrix(i);
    // parents precede children, so words extend already-built ones
    if (i > 0) {
      mu.words[i] = mu.words[static_cast<std::size_t>(ball.parent(i))];
      mu.words[i].push_back(ball.letter(i));
    }
  }
  return mu;
}

AtomicMeasure patterson_measure(const WordBall& ball, const LinearFunctional& phi, double s, const HFunction& h) {
  return patterson_measure(ball, ball_cartan(ball), phi, s, h);
}

AtomicMeasure flag_pushforward(const AtomicMeasure& mu, const RootSubset& theta, double gap_min) {
  if (mu.carrier == AtomicMeasure::Carrier::Flag) return mu;
  AtomicMeasure out;
  out.carrier = AtomicMeasure::Carrier::Flag;
  out.dim = mu.dim;
  out.theta = theta;
  out.phi = mu.phi;
  out.s = mu.s;
  out.beta = mu.beta;
  CompensatedSum kept, dropped;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const GroupElement g = mu.element(i);
    if (!(min_root_gap(cartan_project(g), theta) > gap_min)) {
      dropped.add(mu.weights[i]);
      continue;
    }
    out.flags.push_back(u_theta_unchecked(g, theta));
    out.words.push_back(mu.words.empty() ? Word{} : mu.words[i]);
    out.weights.push_back(mu.weights[i]);
    kept.add(mu.weights[i]);
  }
  const double total = kept.value();
  if (!(total > 0)) throw Error(ErrorCode::NonSummable, "no atom has a defined flag");
  for (double& w : out.weights) w /= total;
  out.dropped_mass = mu.dropped_mass + dropped.value();
  return out;
}

AtomicMeasure shell(const AtomicMeasure& mu, int min_length) {
  AtomicMeasure out = mu;
  out.weights.clear();
  out.words.clear();
  out.mats.clear();
  out.invs.clear();
  out.flags.clear();
  const std::size_t b = static_cast<std::size_t>(mu.dim) * mu.dim;
  CompensatedSum kept, dropped;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (static_cast<int>(mu.words.at(i).size()) < min_length) {
      dropped.add(mu.weights[i]);
      continue;
    }
    out.weights.push_back(mu.weights[i]);
    out.words.push_back(mu.words[i]);
    kept.add(mu.weights[i]);
    if (mu.carrier == AtomicMeasure::Carrier::Flag) {
      out.flags.push_back(mu.flags[i]);
    } else {
      out.mats.insert(out.mats.end(), mu.mats.begin() + static_cast<std::ptrdiff_t>(i * b),
                      mu.mats.begin() + static_cast<std::ptrdiff_t>((i + 1) * b));
      out.invs.insert(out.invs.end(), mu.invs.begin() + static_cast<std::ptrdiff_t>(i * b),
                      mu.invs.begin() + static_cast<std::ptrdiff_t>((i + 1) * b));
    }
  }
  const double total = kept.value();
  if (!(total > 0)) throw Error(ErrorCode::NonSummable, "shell is empty");
  for (double& w : out.weights) w /= total;
  out.dropped_mass = mu.dropped_mass + dropped.value();
  return out;
}

AtomicMeasure pushforward(const AtomicMeasure& mu, const GroupElement& g) {
  AtomicMeasure out = mu;
  for (auto& w : out.words) w = concat_reduce(g.word(), w);
  if (mu.carrier == AtomicMeasure::Carrier::Flag) {
    for (auto& f : out.flags) f = f.transformed(g);
    return out;
  }
  const std::size_t b = static_cast<std::size_t>(mu.dim) * mu.dim;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    Eigen::Map<Matrix>(out.mats.data() + i * b, mu.dim, mu.dim) = g.matrix() * mu.matrix(i);
    Eigen::Map<Matrix>(out.invs.data() + i * b, mu.dim, mu.dim) = mu.inverse_matrix(i) * g.inverse_matrix();
  }
  return out;
}

double total_variation(const AtomicMeasure& a, const AtomicMeasure& b) {
  std::unordered_map<std::string, double> diff;
  diff.reserve(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[word_key(a.words.at(i))] += a.weights[i];
  for (std::size_t i = 0; i < b.size(); ++i) diff[word_key(b.words.at(i))] -= b.weights[i];
  CompensatedSum acc;
  for (const auto& [k, v] : diff) acc.add(std::abs(v));
  return acc.value() / 2;
}

std::size_t FlagCells::locate(const PartialFlag& f) const {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const double d = flag_distance(f, centers[k]);
    if (d < bd) {
      bd = d;
      best = k;
    }
  }
  return best;
}

FlagCells sphere_cells(const WordBall& ball, int n, const RootSubset& theta) {
  FlagCells cells;
  for (std::size_t i = ball.sphere_begin(n); i < ball.sphere_end(n); ++i) {
    const GroupElement g = ball.element(i);
    if (!(min_root_gap(cartan_project(g), theta) > Tolerances{}.gap_min)) continue;
    cells.centers.push_back(u_theta_unchecked(g, theta));
    cells.words.push_back(ball.word(i));
  }
  if (cells.centers.empty()) throw Error(ErrorCode::EmptyCell, "no flags on sphere " + std::to_string(n));
  return cells;
}

ConformalityReport conformality_check(const AtomicMeasure& mu, const GroupElement& gamma, const FlagCells& cells,
                                      double mass_floor) {
  if (mu.carrier != AtomicMeasure::Carrier::Flag) {
    throw Error(ErrorCode::PreconditionViolated, "conformality_check needs a flag-carried measure");
  }
  ConformalityReport rep;
  const std::size_t nc = cells.size();
  std::vector<CompensatedSum> pushed(nc), density(nc);
  const double beta = mu.beta;
  const GroupElement ginv = gamma.inverse();

  if (mu.dim == 2) {
    // lines as angles; B(g, [v]) = log |g v| for a unit vector v
    std::vector<double> centers;
    for (const auto& c : cells.centers) centers.push_back(line_angle_of(c));
    const double c1 = mu.phi.coeff(1);
    const Matrix& g = gamma.matrix();
    const Matrix& gi = ginv.matrix();
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const double x = mu.flags[i].frame()(0, 0), y = mu.flags[i].frame()(1, 0);
      const double px = g(0, 0) * x + g(0, 1) * y, py = g(1, 0) * x + g(1, 1) * y;
      pushed[locate_line(centers, std::atan2(py, px))].add(mu.weights[i]);
      const double qx = gi(0, 0) * x + gi(0, 1) * y, qy = gi(1, 0) * x + gi(1, 1) * y;
      const double b = c1 * std::log(std::hypot(qx, qy));
      density[locate_line(centers, std::atan2(y, x))].add(mu.weights[i] * std::exp(-beta * b));
    }
    finish_rows(rep, pushed, density, mass_floor);
    return rep;
  }

  for (std::size_t i = 0; i < mu.size(); ++i) {
    const PartialFlag& f = mu.flags[i];
    pushed[cells.locate(f.transformed(gamma))].add(mu.weights[i]);
    const double b = mu.phi(iwasawa_cocycle(ginv, f));
    density[cells.locate(f)].add(mu.weights[i] * std::exp(-beta * b));
  }
  finish_rows(rep, pushed, density, mass_floor);
  return rep;
}

namespace {

struct PolarAtoms {
  std::vector<double> angle;     // boundary angle in [0, 2 pi), sorted
  std::vector<std::size_t> order;
  std::vector<double> prefix;  // prefix[k] = mass of the first k sorted atoms
};

PolarAtoms polar_atoms(const AtomicMeasure& mu) {
  if (mu.dim != 2 || mu.carrier != AtomicMeasure::Carrier::Flag) {
    throw Error(ErrorCode::ConfigError, "shadow computations need a flag-carried SL(2,R) measure");
  }
  PolarAtoms out;
  std::vector<double> raw(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) raw[i] = wrap_2pi(2 * line_angle_of(mu.flags[i]));
  out.order.resize(mu.size());
  for (std::size_t i = 0; i < out.order.size(); ++i) out.order[i] = i;
  std::sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
  out.angle.resize(mu.size());
  out.prefix.assign(mu.size() + 1, 0.0);
  CompensatedSum acc;
  for (std::size_t k = 0; k < out.order.size(); ++k) {
    out.angle[k] = raw[out.order[k]];
    acc.add(mu.weights[out.order[k]]);
    out.prefix[k + 1] = acc.value();
  }
  return out;
}

// Sorted positions with angle in [a, b] for 0 <= a <= b <= 2 pi.
std::pair<std::size_t, std::size_t> angle_range(const PolarAtoms& p, double a, double b) {
  const auto lo = std::lower_bound(p.angle.begin(), p.angle.end(), a) - p.angle.begin();
  const auto hi = std::upper_bound(p.angle.begin(), p.angle.end(), b) - p.angle.begin();
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

// Intervals of [0, 2 pi) covered by the arc center +- half.
void arc_pieces(double center, double half, std::vector<std::pair<double, double>>& out) {
  if (half >= std::numbers::pi) {
    out.emplace_back(0.0, kTwoPi);
    return;
  }
  const double a = wrap_2pi(center - half);
  const double b = a + 2 * half;
  if (b <= kTwoPi) {
    out.emplace_back(a, b);
  } else {
    out.emplace_back(a, kTwoPi);
    out.emplace_back(0.0, b - kTwoPi);
  }
}

double shadow_mass(const PolarAtoms& atoms, const GroupElement& gamma, double r) {
  const DiskPolar pg = disk_polar(gamma.matrix(), gamma.inverse_matrix());
  std::vector<std::pair<double, double>> pieces;
  arc_pieces(pg.angle, disk_shadow_half_angle(pg.dist, r), pieces);
  CompensatedSum acc;
  for (const auto& [a, b] : pieces) {
    const auto [lo, hi] = angle_range(atoms, a, b);
    acc.add(atoms.prefix[hi] - atoms.prefix[lo]);
  }
  return acc.value();
}

AtomicMeasure as_disk_flags(const AtomicMeasure& mu) {
  return mu.carrier == AtomicMeasure::Carrier::Flag ? mu : flag_pushforward(mu, RootSubset(2, {1}));
}

}  // namespace

ShadowReport shadow_lemma_check(const AtomicMeasure& mu, const std::vector<GroupElement>& gammas, double r,
                                double declared_c) {
  ShadowReport rep;
  rep.r = r;
  const PolarAtoms atoms = polar_atoms(as_disk_flags(mu));
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_ratio = 0.0;
  for (const auto& g : gammas) {
    ShadowRow row;
    row.word = g.word();
    row.length = static_cast<int>(g.word().size());
    row.mass = shadow_mass(atoms, g, r);
    row.ratio = row.mass * std::exp(mu.beta * mu.phi(cartan_project(g)));
    rep.min_ratio = std::min(rep.min_ratio, row.ratio);
    rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    rep.rows.push_back(std::move(row));
  }
  rep.constant = rep.rows.empty() ? 0.0 : std::max(rep.max_ratio, 1.0 / rep.min_ratio);
  rep.pass = !rep.rows.empty() && rep.min_ratio > 0 && rep.constant <= declared_c;
  return rep;
}

double calibrate_shadow_radius(const AtomicMeasure& mu, const std::vector<GroupElement>& gammas,
                               const std::vector<double>& grid, double declared_c) {
  for (double r : grid) {
    if (shadow_lemma_check(mu, gammas, r, declared_c).pass) return r;
  }
  return -1.0;
}

std::vector<GroupElement> sample_by_length(const WordBall& ball, int lo, int hi, std::size_t per_length,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GroupElement> out;
  for (int n = std::max(0, lo); n <= std::min(hi, ball.radius()); ++n) {
    const std::size_t size = ball.sphere_size(n);
    if (size == 0 || per_length == 0) continue;
    if (size <= per_length) {
      for (std::size_t i = ball.sphere_begin(n); i < ball.sphere_end(n); ++i) out.push_back(ball.element(i));
      continue;
    }
    const std::size_t stride = size / per_length;
    for (std::size_t k = 0; k < per_length; ++k) {
      out.push_back(ball.element(ball.sphere_begin(n) + k * stride + rng() % stride));
    }
  }
  return out;
}

ConicalReport conical_mass_estimate(const AtomicMeasure& mu, const WordBall& ball, double r,
                                    const std::vector<int>& schedule) {
  const PolarAtoms atoms = polar_atoms(as_disk_flags(mu));
  std::vector<DiskPolar> centers(ball.size());
  for (std::size_t i = 0; i < ball.size(); ++i) centers[i] = disk_polar(ball.matrix(i), ball.inverse_matrix(i));

  ConicalReport rep;
  for (int n : schedule) {
    std::vector<std::pair<double, double>> pieces;
    for (int len = std::max(0, n); len <= ball.radius(); ++len) {
      for (std::size_t i = ball.sphere_begin(len); i < ball.sphere_end(len); ++i) {
        arc_pieces(centers[i].angle, disk_shadow_half_angle(centers[i].dist, r), pieces);
      }
    }
    std::sort(pieces.begin(), pieces.end());
    CompensatedSum acc;
    double cur_a = 0, cur_b = -1;
    auto flush = [&] {
      if (cur_b < cur_a) return;
      const auto [lo, hi] = angle_range(atoms, cur_a, cur_b);
      acc.add(atoms.prefix[hi] - atoms.prefix[lo]);
    };
    for (const auto& [a, b] : pieces) {
      if (a > cur_b) {
        flush();
        cur_a = a;
        cur_b = b;
      } else {
        cur_b = std::max(cur_b, b);
      }
    }
    flush();
    rep.rows.push_back({n, std::min(1.0, acc.value())});
  }
  if (!rep.rows.empty()) rep.estimate = rep.rows.back().mass;
  return rep;
}

std::vector<double> s_schedule(double delta_hat, int steps) {
  std::vector<double> out;
  for (int k = 1; k <= steps; ++k) out.push_back(delta_hat * (1 + std::ldexp(1.0, -k)));
  return out;
}

std::string to_json(const AtomicMeasure& mu) {
  nlohmann::ordered_json j;
  j["carrier"] = mu.carrier == AtomicMeasure::Carrier::Group ? "group" : "flag";
  j["dim"] = mu.dim;
  j["theta"] = mu.theta.indices();
  j["phi"] = {{"theta", mu.phi.theta.indices()}, {"coeffs", mu.phi.coeffs}};
  j["s"] = mu.s;
  j["beta"] = mu.beta;
  j["dropped_mass"] = mu.dropped_mass;
  auto& atoms = j["atoms"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    nlohmann::ordered_json a;
    a["word"] = mu.words.empty() ? Word{} : mu.words[i];
    a["weight"] = mu.weights[i];
    if (mu.carrier == AtomicMeasure::Carrier::Flag) {
      const Matrix& f = mu.flags[i].frame();
      a["frame"] = std::vector<double>(f.data(), f.data() + f.size());
    }
    atoms.push_back(std::move(a));
  }
  return j.dump();
}

AtomicMeasure measure_from_json(const std::string& text, const std::vector<GroupElement>& generators) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  try {
    AtomicMeasure mu;
    mu.carrier = j.at("carrier").get<std::string>() == "flag" ? AtomicMeasure::Carrier::Flag
                                                              : AtomicMeasure::Carrier::Group;
    mu.dim = j.at("dim").get<int>();
    mu.theta = RootSubset(mu.dim, j.at("theta").get<std::vector<int>>());
    mu.phi.theta = RootSubset(mu.dim, j.at("phi").at("theta").get<std::vector<int>>());
    mu.phi.coeffs = j.at("phi").at("coeffs").get<std::vector<double>>();
    mu.s = j.at("s").get<double>();
    mu.beta = j.at("beta").get<double>();
    mu.dropped_mass = j.at("dropped_mass").get<double>();
    const std::size_t b = static_cast<std::size_t>(mu.dim) * mu.dim;
    for (const auto& a : j.at("atoms")) {
      Word w = a.at("word").get<Word>();
      mu.weights.push_back(a.at("weight").get<double>());
      if (mu.carrier == AtomicMeasure::Carrier::Flag) {
        const auto v = a.at("frame").get<std::vector<double>>();
        if (v.size() != b) throw Error(ErrorCode::ParseError, "frame has the wrong size");
        mu.flags.push_back(PartialFlag::from_frame(mu.theta, Eigen::Map<const Matrix>(v.data(), mu.dim, mu.dim)));
      } else {
        GroupElement g = GroupElement::identity(mu.dim);
        for (int letter : w) {
          const auto idx = static_cast<std::size_t>(std::abs(letter));
          if (letter == 0 || idx > generators.size()) throw Error(ErrorCode::ParseError, "word letter out of range");
          const auto& gen = generators[idx - 1];
          g = g * (letter > 0 ? gen : gen.inverse());
        }
        mu.mats.insert(mu.mats.end(), g.matrix().data(), g.matrix().data() + b);
        mu.invs.insert(mu.invs.end(), g.inverse_matrix().data(), g.inverse_matrix().data() + b);
      }
      mu.words.push_back(std::move(w));
    }
    return mu;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace td
