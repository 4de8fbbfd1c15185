#include "td/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_map>

#include "td/cartan.hpp"

namespace td {

namespace {

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

void require_flags(const AtomicMeasure& m, const char* which) {
  if (m.carrier != AtomicMeasure::Carrier::Flag) {
    throw Error(ErrorCode::PreconditionViolated, std::string(which) + " must be flag-carried");
  }
}

// exp(-beta phi([F, G])), NaN when not transverse.
double pair_density(const PartialFlag& f, const PartialFlag& g, double beta, const LinearFunctional& phi,
                    double tau) {
  const auto tr = is_transverse(f, g, tau);
  if (!tr.transverse) return std::numeric_limits<double>::quiet_NaN();
  return std::exp(-beta * phi(gromov_product(f, g, tau)));
}

// log sigma_1 of a 2x2 matrix, rescaled so the squares cannot overflow.
double log_sigma1(const Matrix& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  const Matrix n = m / scale;
  const double s = n.squaredNorm();
  const double det = std::abs(n.determinant());
  const double disc = std::sqrt(std::max(0.0, (s - 2 * det) * (s + 2 * det)));
  return std::log(scale) + 0.5 * std::log((s + disc) / 2);
}

std::string word_label(const Word& w) {
  if (w.empty()) return "e";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(w[i]);
  }
  return out;
}

}  // namespace

BMSAssembly assemble_bms(AtomicMeasure mubar, AtomicMeasure mu, double beta, const LinearFunctional& phi,
                         std::size_t table_cap) {
  require_flags(mu, "mu");
  require_flags(mubar, "mubar");
  if (mu.dim != mubar.dim) throw Error(ErrorCode::PreconditionViolated, "mu and mubar live in different dimensions");
  BMSAssembly m;
  m.mu = std::move(mu);
  m.mubar = std::move(mubar);
  m.beta = beta;
  m.phi = phi;
  const std::size_t nx = m.mubar.size(), ny = m.mu.size();
  if (nx * ny <= table_cap) {
    const double tau = Tolerances{}.transverse;
    m.table.resize(nx * ny);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t y = 0; y < ny; ++y) {
        m.table[x * ny + y] = pair_density(m.mubar.flags[x], m.mu.flags[y], beta, phi, tau);
      }
    }
  }
  return m;
}

double bms_density(const BMSAssembly& m, std::size_t x, std::size_t y) {
  double e;
  if (!m.table.empty()) {
    e = m.table.at(x * m.mu.size() + y);
  } else {
    e = pair_density(m.mubar.flags.at(x), m.mu.flags.at(y), m.beta, m.phi, Tolerances{}.transverse);
  }
  if (std::isnan(e)) throw Error(ErrorCode::NotTransverse, "atoms " + std::to_string(x) + ", " + std::to_string(y));
  return e * m.mubar.weights[x] * m.mu.weights[y];
}

BMSAssembly swapped(const BMSAssembly& m) {
  BMSAssembly out;
  out.mu = m.mubar;
  out.mubar = m.mu;
  out.beta = m.beta;
  out.phi = dual_functional(m.phi);
  if (!m.table.empty()) {
    const std::size_t nx = m.mubar.size(), ny = m.mu.size();
    out.table.resize(nx * ny);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t y = 0; y < ny; ++y) out.table[y * nx + x] = m.table[x * ny + y];
    }
  }
  return out;
}

namespace {

// Atoms grouped by word prefix, with where each atom sits before and after
// transport.
struct Binned {
  std::vector<std::size_t> rep;  // heaviest atom of each bin
  // per bin: (cell, weight) before and after transport
  std::vector<std::vector<std::pair<std::size_t, double>>> before, after;
};

std::string prefix_key(const Word& w, int depth) {
  const std::size_t len = std::min<std::size_t>(w.size(), static_cast<std::size_t>(depth));
  return {reinterpret_cast<const char*>(w.data()), len * sizeof(int)};
}

void add_to(std::vector<std::pair<std::size_t, double>>& v, std::size_t cell, double w) {
  for (auto& [c, x] : v) {
    if (c == cell) {
      x += w;
      return;
    }
  }
  v.emplace_back(cell, w);
}

Binned bin_atoms(const AtomicMeasure& mu, const GroupElement& gamma, const std::vector<GroupElement>& gens,
                 const FlagCells& cells, int depth) {
  Binned b;
  std::unordered_map<std::string, std::size_t> index;
  const RootSubset& theta = mu.theta;
  const bool has_words = mu.words.size() == mu.size();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Word& w = has_words ? mu.words[i] : Word{};
    PartialFlag moved;
    if (!w.empty()) {
      Word gw = gamma.word();
      gw.insert(gw.end(), w.begin(), w.end());
      gw = free_reduce(gw);
      const GroupElement g =
          GroupElement::from_pair(evaluate_word(gw, gens), evaluate_word(invert_word(gw), gens), gw);
      // no flag after transport: left out on both sides
      if (!(min_root_gap(cartan_project(g), theta) > Tolerances{}.gap_min)) continue;
      moved = u_theta_unchecked(g, theta);
    } else {
      moved = mu.flags[i].transformed(gamma);
    }

    std::size_t bin = b.rep.size();  // atoms without a word get their own bin
    if (!w.empty()) bin = index.emplace(prefix_key(w, depth), b.rep.size()).first->second;
    if (bin == b.rep.size()) {
      b.rep.push_back(i);
      b.before.emplace_back();
      b.after.emplace_back();
    } else if (mu.weights[i] > mu.weights[b.rep[bin]]) {
      b.rep[bin] = i;
    }
    add_to(b.before[bin], cells.locate(mu.flags[i]), mu.weights[i]);
    add_to(b.after[bin], cells.locate(moved), mu.weights[i]);
  }
  return b;
}

}  // namespace

InvarianceReport invariance_residual(const BMSAssembly& m, const GroupElement& gamma,
                                     const std::vector<GroupElement>& generators, const FlagCells& cells,
                                     int bin_depth, double mass_floor) {
  if (gamma.word().empty() && !gamma.matrix().isIdentity(0.0)) {
    throw Error(ErrorCode::PreconditionViolated, "gamma needs its word for atom-level transport");
  }
  const Binned bx = bin_atoms(m.mubar, gamma, generators, cells, bin_depth);
  const Binned by = bin_atoms(m.mu, gamma, generators, cells, bin_depth);
  const std::size_t nc = cells.size();
  std::vector<CompensatedSum> orig(nc * nc), moved(nc * nc);
  InvarianceReport rep;
  const double tau = Tolerances{}.transverse;
  for (std::size_t a = 0; a < bx.rep.size(); ++a) {
    const std::size_t xa = bx.rep[a];
    const Word& wa = m.mubar.words.empty() ? Word{} : m.mubar.words[xa];
    for (std::size_t b = 0; b < by.rep.size(); ++b) {
      const std::size_t yb = by.rep[b];
      const Word& wb = m.mu.words.empty() ? Word{} : m.mu.words[yb];
      if (!wa.empty() && !wb.empty() && prefix_key(wa, bin_depth) == prefix_key(wb, bin_depth)) continue;
      const double e = pair_density(m.mubar.flags[xa], m.mu.flags[yb], m.beta, m.phi, tau);
      if (std::isnan(e)) {
        ++rep.skipped_pairs;
        continue;
      }
      for (const auto& [ca, wxa] : bx.before[a]) {
        for (const auto& [cb, wyb] : by.before[b]) orig[ca * nc + cb].add(e * wxa * wyb);
      }
      for (const auto& [ca, wxa] : bx.after[a]) {
        for (const auto& [cb, wyb] : by.after[b]) moved[ca * nc + cb].add(e * wxa * wyb);
      }
    }
  }
  auto separated = [&](std::size_t ca, std::size_t cb) {
    if (ca == cb) return false;
    if (cells.words.size() != nc || cells.words[ca].empty() || cells.words[cb].empty()) return true;
    return cells.words[ca].front() != cells.words[cb].front();
  };
  // normalize both sides by the compared total so the floor is a fraction
  CompensatedSum total;
  for (std::size_t ca = 0; ca < nc; ++ca) {
    for (std::size_t cb = 0; cb < nc; ++cb) {
      if (separated(ca, cb)) total.add(orig[ca * nc + cb].value());
    }
  }
  const double z = total.value();
  if (!(z > 0)) throw Error(ErrorCode::NonSummable, "BMS pair mass is zero");
  for (std::size_t ca = 0; ca < nc; ++ca) {
    for (std::size_t cb = 0; cb < nc; ++cb) {
      if (!separated(ca, cb)) continue;
      InvarianceRow row{ca, cb, orig[ca * nc + cb].value() / z, moved[ca * nc + cb].value() / z, 0.0};
      if (row.original < mass_floor || row.transported < mass_floor) {
        ++rep.skipped_cells;
        continue;
      }
      row.residual = std::abs(row.transported / row.original - 1.0);
      rep.max_rel_error = std::max(rep.max_rel_error, row.residual);
      rep.rows.push_back(row);
    }
  }
  return rep;
}

RecurrenceReport recurrence_diagnostic(const GroupPreset& preset, const BMSAssembly& m, double horizon,
                                       std::size_t samples, std::uint64_t seed, double step) {
  if (preset.domain != "klein-disk" || m.mu.dim != 2) {
    throw Error(ErrorCode::PreconditionViolated, "recurrence diagnostic needs a Klein-disk preset");
  }
  if (!(horizon > 0) || !(step > 0)) throw Error(ErrorCode::ConfigError, "horizon and step must be positive");

  std::vector<GroupElement> letters;
  double max_disp = 0.0;
  for (const auto& g : preset.generators) {
    letters.push_back(g);
    letters.push_back(g.inverse());
    max_disp = std::max(max_disp, 4 * log_sigma1(g.matrix()));
  }
  for (std::size_t k = 0; k < letters.size(); ++k) {
    const int idx = static_cast<int>(k / 2) + 1;
    letters[k] = GroupElement::from_pair(letters[k].matrix(), letters[k].inverse_matrix(),
                                         Word{k % 2 ? -idx : idx});
  }

  RecurrenceReport rep;
  rep.horizon = horizon;
  rep.step = step;
  rep.cell_radius = 2 * max_disp;
  rep.k_threshold = std::max(1, static_cast<int>(std::ceil(horizon / rep.cell_radius)));

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick_x(m.mubar.weights.begin(), m.mubar.weights.end());
  std::discrete_distribution<std::size_t> pick_y(m.mu.weights.begin(), m.mu.weights.end());
  const double tau = Tolerances{}.transverse;
  const int steps = static_cast<int>(std::floor(horizon / step + 1e-9));

  std::size_t attempts = 0;
  while (rep.reentries.size() < samples && attempts < 100 * samples + 100) {
    ++attempts;
    const std::size_t x = pick_x(rng);
    const std::size_t y = pick_y(rng);
    const Matrix& fx = m.mubar.flags[x].frame();
    const Matrix& fy = m.mu.flags[y].frame();
    Eigen::Vector2d vx(fx(0, 0), fx(1, 0)), vy(fy(0, 0), fy(1, 0));
    double det = vy(0) * vx(1) - vy(1) * vx(0);
    if (std::abs(det) <= tau) continue;
    if (det < 0) {
      vx = -vx;
      det = -det;
    }
    // g maps the standard geodesic (e2 -> e1) onto (x -> y); the symmetric
    // scaling puts g b0 at the foot of b0.
    Matrix g(2, 2);
    g.col(0) = vy / std::sqrt(det);
    g.col(1) = vx / std::sqrt(det);

    const bool log_this = rep.reentries.empty();
    GroupElement cur = GroupElement::identity(2);
    Word last_cell;
    bool have_last = false;
    int count = 0;
    for (int k = 0; k <= steps; ++k) {
      const double t = k * step;
      Matrix a = Matrix::Zero(2, 2);
      a(0, 0) = std::exp(t / 4);
      a(1, 1) = std::exp(-t / 4);
      const Matrix pt = g * a;
      auto dist = [&](const GroupElement& h) { return 4 * log_sigma1(h.inverse_matrix() * pt); };
      double best = dist(cur);
      for (bool moved = true; moved;) {
        moved = false;
        for (const auto& l : letters) {
          GroupElement cand = cur * l;
          Word w = free_reduce(cand.word());
          cand = GroupElement::from_pair(cand.matrix(), cand.inverse_matrix(), w);
          const double d = dist(cand);
          if (d < best - 1e-12) {
            best = d;
            cur = cand;
            moved = true;
          }
        }
      }
      const bool inside = best <= rep.cell_radius;
      bool reentry = false;
      if (inside) {
        if (have_last && cur.word() != last_cell) reentry = true;
        last_cell = cur.word();
        have_last = true;
      }
      if (reentry) ++count;
      if (log_this) rep.trajectory.push_back({t, word_label(cur.word()), reentry});
    }
    rep.reentries.push_back(count);
  }

  rep.samples = rep.reentries.size();
  double sum = 0.0;
  for (int c : rep.reentries) {
    sum += c;
    if (c >= rep.k_threshold) ++rep.returning;
  }
  if (rep.samples > 0) {
    rep.return_fraction = static_cast<double>(rep.returning) / static_cast<double>(rep.samples);
    rep.escape_fraction = 1.0 - rep.return_fraction;
    rep.mean_reentries = sum / static_cast<double>(rep.samples);
  }
  std::ostringstream v;
  if (rep.return_fraction >= 0.9) {
    v << "consistent with conservative";
  } else if (rep.escape_fraction >= 0.9) {
    v << "consistent with dissipative";
  } else {
    v << "inconclusive";
  }
  v << " (horizon " << horizon << ")";
  rep.verdict = v.str();
  return rep;
}

std::string trajectory_csv(const RecurrenceReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "t,cell_id,reentry\n";
  for (const auto& row : r.trajectory) out << row.t << ',' << row.cell << ',' << (row.reentry ? 1 : 0) << '\n';
  return out.str();
}

}  // namespace td
