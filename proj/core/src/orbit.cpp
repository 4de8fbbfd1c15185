#include "td/orbit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_map>

#include "td/cartan.hpp"

namespace td {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void fnv_mix(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= kFnvPrime;
  }
}

double scale_of(const double* m, int n) {
  double s = 1.0;
  for (int i = 0; i < n; ++i) s = std::max(s, std::abs(m[i]));
  return s;
}

// +1 or -1 so that sign * m has its first significant entry positive.
double canonical_sign(const double* m, int n, double threshold) {
  for (int i = 0; i < n; ++i) {
    if (std::abs(m[i]) > threshold) return m[i] > 0 ? 1.0 : -1.0;
  }
  return 1.0;
}

}  // namespace

Eigen::Map<const Matrix> WordBall::matrix(std::size_t i) const {
  const auto n = static_cast<std::size_t>(dim_) * dim_;
  return {mats_.data() + i * n, dim_, dim_};
}

Eigen::Map<const Matrix> WordBall::inverse_matrix(std::size_t i) const {
  const auto n = static_cast<std::size_t>(dim_) * dim_;
  return {invs_.data() + i * n, dim_, dim_};
}

Word WordBall::word(std::size_t i) const {
  Word w(static_cast<std::size_t>(length_[i]));
  std::int64_t j = static_cast<std::int64_t>(i);
  for (int pos = length_[i] - 1; pos >= 0; --pos) {
    w[static_cast<std::size_t>(pos)] = letter_[static_cast<std::size_t>(j)];
    j = parent_[static_cast<std::size_t>(j)];
  }
  return w;
}

GroupElement WordBall::element(std::size_t i) const {
  return GroupElement::from_pair(matrix(i), inverse_matrix(i), word(i));
}

WordBall WordBall::truncated(int r) const {
  if (r >= radius_) return *this;
  WordBall out;
  out.dim_ = dim_;
  out.radius_ = r;
  out.preset_name_ = preset_name_;
  out.generators_ = generators_;
  const std::size_t n = sphere_end(r);
  const auto block = static_cast<std::size_t>(dim_) * dim_;
  out.mats_.assign(mats_.begin(), mats_.begin() + static_cast<std::ptrdiff_t>(n * block));
  out.invs_.assign(invs_.begin(), invs_.begin() + static_cast<std::ptrdiff_t>(n * block));
  out.parent_.assign(parent_.begin(), parent_.begin() + static_cast<std::ptrdiff_t>(n));
  out.letter_.assign(letter_.begin(), letter_.begin() + static_cast<std::ptrdiff_t>(n));
  out.length_.assign(length_.begin(), length_.begin() + static_cast<std::ptrdiff_t>(n));
  out.offsets_.assign(offsets_.begin(), offsets_.begin() + r + 2);
  out.dedup_ = dedup_;
  return out;
}

class BallBuilder {
 public:
  BallBuilder(const GroupPreset& preset, const Tolerances& tol) : preset_(preset), tol_(tol) {
    if (preset.generators.empty()) throw Error(ErrorCode::ConfigError, "preset has no generators");
    d_ = preset.generators.front().dim();
    block_ = static_cast<std::size_t>(d_) * d_;
    for (std::size_t k = 0; k < preset.generators.size(); ++k) {
      const auto& g = preset.generators[k];
      if (g.dim() != d_) throw Error(ErrorCode::ConfigError, "generators of mixed dimension");
      const int idx = static_cast<int>(k) + 1;
      letters_.push_back(idx);
      letters_.push_back(-idx);
      mats_.push_back(g.matrix());
      mats_.push_back(g.inverse_matrix());
      invs_.push_back(g.inverse_matrix());
      invs_.push_back(g.matrix());
    }
    ball_.dim_ = d_;
    ball_.preset_name_ = preset.name;
    for (const auto& g : preset.generators) ball_.generators_.push_back(g);
    ball_.dedup_.exact = preset.integer;
    key_entries_ = static_cast<int>(std::min<std::size_t>(4, block_));
  }

  WordBall run(int radius, std::size_t budget) {
    if (radius < 0) throw Error(ErrorCode::ConfigError, "radius must be non-negative");
    const Matrix id = Matrix::Identity(d_, d_);
    push(id.data(), id.data(), -1, 0, 0);
    ball_.offsets_ = {0, 1};
    Matrix prod(d_, d_), prod_inv(d_, d_);
    for (int n = 1; n <= radius; ++n) {
      const std::size_t begin = ball_.offsets_[static_cast<std::size_t>(n) - 1];
      const std::size_t end = ball_.offsets_[static_cast<std::size_t>(n)];
      // reduced words of a free preset are distinct elements; the collision
      // check only runs where it can still resolve them
      const bool lookup = !preset_.free || preset_.integer || n <= kFreeCheckRadius;
      index_ = lookup;
      for (std::size_t i = begin; i < end; ++i) {
        const int last = ball_.letter_[i];
        for (std::size_t l = 0; l < letters_.size(); ++l) {
          if (n > 1 && letters_[l] == -last) continue;
          prod.noalias() = ball_.matrix(i) * mats_[l];
          prod_inv.noalias() = invs_[l] * ball_.inverse_matrix(i);
          ++ball_.dedup_.candidates;
          const auto hit = lookup ? find(prod.data(), prod_inv.data(), i, letters_[l]) : std::nullopt;
          if (hit) {
            ++ball_.dedup_.merged;
            if (preset_.free) {
              throw Error(ErrorCode::NonDiscreteSuspect,
                          "free preset '" + preset_.name + "': word of length " + std::to_string(n) +
                              " coincides with element " + std::to_string(*hit));
            }
            continue;
          }
          if (ball_.size() >= budget) {
            ball_.radius_ = n - 1;
            ball_.offsets_.resize(static_cast<std::size_t>(n) + 1);
            truncate_to(ball_.offsets_[static_cast<std::size_t>(n)]);
            throw BudgetExceededError(std::move(ball_), "ball exceeds budget of " + std::to_string(budget) +
                                                            " elements at radius " + std::to_string(n));
          }
          push(prod.data(), prod_inv.data(), static_cast<std::int64_t>(i), letters_[l], n);
        }
      }
      ball_.offsets_.push_back(ball_.size());
    }
    ball_.radius_ = radius;
    return std::move(ball_);
  }

 private:
  void truncate_to(std::size_t n) {
    ball_.mats_.resize(n * block_);
    ball_.invs_.resize(n * block_);
    ball_.parent_.resize(n);
    ball_.letter_.resize(n);
    ball_.length_.resize(n);
  }

  void push(const double* m, const double* inv, std::int64_t parent, int letter, int length) {
    const std::size_t idx = ball_.size();
    ball_.mats_.insert(ball_.mats_.end(), m, m + block_);
    ball_.invs_.insert(ball_.invs_.end(), inv, inv + block_);
    ball_.parent_.push_back(parent);
    ball_.letter_.push_back(letter);
    ball_.length_.push_back(length);
    if (index_) {
      for (std::uint64_t k : keys(m, false)) table_.emplace(k, idx);
    }
  }

  // Hash keys of the quantized (sign-canonical) leading entries. With
  // `probe` set, cells adjacent to near-boundary values are included so
  // that matrices within the confirmation tolerance always share a key.
  std::vector<std::uint64_t> keys(const double* m, bool probe) const {
    const int n = static_cast<int>(block_);
    std::vector<std::int64_t> cells(static_cast<std::size_t>(key_entries_));
    std::vector<int> alt(static_cast<std::size_t>(key_entries_), 0);
    if (preset_.integer) {
      const double sgn = d_ % 2 == 0 ? canonical_sign(m, n, 0.5) : 1.0;
      for (int i = 0; i < key_entries_; ++i) {
        const double v = sgn * m[i];
        if (std::abs(v) > 4503599627370496.0) {
          throw Error(ErrorCode::PreconditionViolated, "integer entries exceed the exact double range");
        }
        cells[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::llround(v));
      }
    } else {
      const double q = tol_.dedup_quantum * scale_of(m, n);
      const double sgn = d_ % 2 == 0 ? canonical_sign(m, n, q) : 1.0;
      const double margin = 2 * tol_.dedup_confirm / tol_.dedup_quantum;
      for (int i = 0; i < key_entries_; ++i) {
        const double x = sgn * m[i] / q;
        const double f = std::floor(x);
        cells[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(f);
        if (probe) {
          if (x - f < margin) alt[static_cast<std::size_t>(i)] = -1;
          if (f + 1 - x < margin) alt[static_cast<std::size_t>(i)] = 1;
        }
      }
    }
    std::vector<std::uint64_t> out;
    std::vector<int> active;
    for (int i = 0; i < key_entries_; ++i) {
      if (alt[static_cast<std::size_t>(i)] != 0) active.push_back(i);
    }
    const std::size_t combos = std::size_t{1} << active.size();
    for (std::size_t mask = 0; mask < combos; ++mask) {
      std::uint64_t h = kFnvOffset;
      for (int i = 0; i < key_entries_; ++i) {
        std::int64_t c = cells[static_cast<std::size_t>(i)];
        const auto it = std::find(active.begin(), active.end(), i);
        if (it != active.end() && (mask >> (it - active.begin())) & 1u) c += alt[static_cast<std::size_t>(i)];
        fnv_mix(h, static_cast<std::uint64_t>(c));
      }
      out.push_back(h);
    }
    return out;
  }

  // Entrywise comparison relative to each entry, with a floor of
  // `nondiscrete` times the matrix scale (accumulated rounding is of that
  // order in every entry). A tolerance relative to the largest entry alone
  // is not enough: far out, elements are nearly rank one and distinct ones
  // can differ only in their small entries. Inverses are compared as well.
  bool same(const double* a, const double* a_inv, std::size_t j) const {
    const double* b = ball_.mats_.data() + j * block_;
    const double* b_inv = ball_.invs_.data() + j * block_;
    const int n = static_cast<int>(block_);
    auto close = [&](const double* x, const double* y, double sgn) {
      if (preset_.integer) {
        for (int i = 0; i < n; ++i) {
          if (std::abs(x[i] - sgn * y[i]) > 0.5) return false;
        }
        return true;
      }
      const double floor = tol_.nondiscrete * std::max(scale_of(x, n), scale_of(y, n));
      for (int i = 0; i < n; ++i) {
        const double tol = tol_.dedup_confirm * std::max(std::abs(x[i]), std::abs(y[i])) + floor;
        if (std::abs(x[i] - sgn * y[i]) > tol) return false;
      }
      return true;
    };
    auto both = [&](double sgn) { return close(a, b, sgn) && close(a_inv, b_inv, sgn); };
    return both(1.0) || (d_ % 2 == 0 && both(-1.0));
  }

  // The element reached by (parent, letter) times the inverse of stored
  // element j, evaluated as a freely reduced word.
  bool word_identity(std::size_t j, std::size_t parent, int letter) const {
    if (preset_.integer) return true;  // entries are exact
    Word w = invert_word(ball_.word(j));
    Word c = ball_.word(parent);
    c.push_back(letter);
    w.insert(w.end(), c.begin(), c.end());
    w = free_reduce(w);
    if (w.empty()) return true;
    Matrix h = Matrix::Identity(d_, d_);
    for (int x : w) h = h * mats_[static_cast<std::size_t>(2 * (std::abs(x) - 1) + (x < 0 ? 1 : 0))];
    const Matrix id = Matrix::Identity(d_, d_);
    double e = (h - id).cwiseAbs().maxCoeff();
    if (d_ % 2 == 0) e = std::min(e, (h + id).cwiseAbs().maxCoeff());
    return e <= tol_.dedup_identity;
  }

  std::optional<std::size_t> find(const double* m, const double* m_inv, std::size_t parent, int letter) {
    for (std::uint64_t k : keys(m, true)) {
      auto [lo, hi] = table_.equal_range(k);
      ++ball_.dedup_.probes;
      for (auto it = lo; it != hi; ++it) {
        if (!same(m, m_inv, it->second)) continue;
        if (word_identity(it->second, parent, letter)) return it->second;
        ++ball_.dedup_.near_misses;
      }
    }
    return std::nullopt;
  }

  const GroupPreset& preset_;
  Tolerances tol_;
  int d_ = 0;
  std::size_t block_ = 0;
  int key_entries_ = 0;
  std::vector<int> letters_;
  std::vector<Matrix> mats_;
  std::vector<Matrix> invs_;
  std::unordered_multimap<std::uint64_t, std::size_t> table_;
  bool index_ = true;
  WordBall ball_;
};

WordBall enumerate_ball(const GroupPreset& preset, int radius, std::size_t budget, const Tolerances& tol) {
  return BallBuilder(preset, tol).run(radius, budget);
}

std::uint64_t ball_cache_key(const GroupPreset& preset, int radius, const Tolerances& tol) {
  std::uint64_t h = kFnvOffset;
  for (char c : preset.name) fnv_mix(h, static_cast<unsigned char>(c));
  for (const auto& g : preset.generators) {
    for (int i = 0; i < g.matrix().size(); ++i) fnv_mix(h, std::bit_cast<std::uint64_t>(g.matrix().data()[i]));
  }
  fnv_mix(h, static_cast<std::uint64_t>(radius));
  fnv_mix(h, std::bit_cast<std::uint64_t>(tol.dedup_quantum));
  fnv_mix(h, std::bit_cast<std::uint64_t>(tol.dedup_confirm));
  fnv_mix(h, std::bit_cast<std::uint64_t>(tol.nondiscrete));
  fnv_mix(h, std::bit_cast<std::uint64_t>(tol.dedup_identity));
  fnv_mix(h, preset.integer ? 1u : 0u);
  return h;
}

namespace {

constexpr char kMagic[8] = {'T', 'D', 'B', 'A', 'L', 'L', '0', '1'};

template <class T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void write_vec(std::ostream& os, const std::vector<T>& v) {
  write_pod(os, static_cast<std::uint64_t>(v.size()));
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error(ErrorCode::IoError, "truncated ball cache");
  return v;
}

template <class T>
std::vector<T> read_vec(std::istream& is) {
  const auto n = read_pod<std::uint64_t>(is);
  if (n > (std::uint64_t{1} << 34)) throw Error(ErrorCode::IoError, "corrupt ball cache");
  std::vector<T> v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (!is) throw Error(ErrorCode::IoError, "truncated ball cache");
  return v;
}

}  // namespace

void save_ball(const std::filesystem::path& path, const WordBall& ball, std::uint64_t key) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  os.write(kMagic, sizeof(kMagic));
  write_pod(os, key);
  write_pod(os, static_cast<std::int32_t>(ball.dim_));
  write_pod(os, static_cast<std::int32_t>(ball.radius_));
  write_vec(os, std::vector<char>(ball.preset_name_.begin(), ball.preset_name_.end()));
  write_pod(os, static_cast<std::uint64_t>(ball.generators_.size()));
  for (const auto& g : ball.generators_) {
    write_vec(os, std::vector<double>(g.matrix().data(), g.matrix().data() + g.matrix().size()));
    write_vec(os, std::vector<double>(g.inverse_matrix().data(), g.inverse_matrix().data() + g.matrix().size()));
    write_vec(os, g.word());
  }
  write_vec(os, ball.mats_);
  write_vec(os, ball.invs_);
  write_vec(os, ball.parent_);
  write_vec(os, ball.letter_);
  write_vec(os, ball.length_);
  write_vec(os, ball.offsets_);
  write_pod(os, ball.dedup_);
  if (!os) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

WordBall load_ball(const std::filesystem::path& path, std::uint64_t key) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw Error(ErrorCode::IoError, "not a ball cache");
  if (read_pod<std::uint64_t>(is) != key) throw Error(ErrorCode::IoError, "ball cache key mismatch");
  WordBall b;
  b.dim_ = read_pod<std::int32_t>(is);
  b.radius_ = read_pod<std::int32_t>(is);
  const auto name = read_vec<char>(is);
  b.preset_name_.assign(name.begin(), name.end());
  const auto ngen = read_pod<std::uint64_t>(is);
  for (std::uint64_t i = 0; i < ngen; ++i) {
    const auto m = read_vec<double>(is);
    const auto inv = read_vec<double>(is);
    const auto w = read_vec<int>(is);
    if (m.size() != static_cast<std::size_t>(b.dim_) * b.dim_ || inv.size() != m.size()) {
      throw Error(ErrorCode::IoError, "corrupt generator in ball cache");
    }
    b.generators_.push_back(GroupElement::from_pair(Eigen::Map<const Matrix>(m.data(), b.dim_, b.dim_),
                                                    Eigen::Map<const Matrix>(inv.data(), b.dim_, b.dim_), w));
  }
  b.mats_ = read_vec<double>(is);
  b.invs_ = read_vec<double>(is);
  b.parent_ = read_vec<std::int64_t>(is);
  b.letter_ = read_vec<int>(is);
  b.length_ = read_vec<int>(is);
  b.offsets_ = read_vec<std::size_t>(is);
  b.dedup_ = read_pod<DedupReport>(is);
  const std::size_t n = b.parent_.size();
  if (b.mats_.size() != n * b.dim_ * b.dim_ || b.invs_.size() != b.mats_.size() || b.letter_.size() != n ||
      b.length_.size() != n || b.offsets_.size() != static_cast<std::size_t>(b.radius_) + 2 ||
      b.offsets_.back() != n) {
    throw Error(ErrorCode::IoError, "inconsistent ball cache");
  }
  return b;
}

WordBall enumerate_ball_cached(const GroupPreset& preset, int radius, const std::filesystem::path& dir,
                               std::size_t budget, const Tolerances& tol) {
  if (dir.empty()) return enumerate_ball(preset, radius, budget, tol);
  const std::uint64_t key = ball_cache_key(preset, radius, tol);
  std::ostringstream name;
  name << preset.name << "-r" << radius << "-" << std::hex << key << ".ball";
  const auto path = dir / name.str();
  if (std::filesystem::exists(path)) {
    try {
      return load_ball(path, key);
    } catch (const Error&) {
      // stale or damaged: rebuild below
    }
  }
  WordBall ball = enumerate_ball(preset, radius, budget, tol);
  std::filesystem::create_directories(dir);
  save_ball(path, ball, key);
  return ball;
}

Matrix ball_cartan(const WordBall& ball) {
  Matrix out(ball.dim(), static_cast<Eigen::Index>(ball.size()));
  for (std::size_t i = 0; i < ball.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = cartan_project(ball.matrix(i), ball.inverse_matrix(i)).entries;
  }
  return out;
}

DivergenceReport divergence_diagnostic(const WordBall& ball, const RootSubset& theta, const Matrix& kappas,
                                       double min_slope) {
  DivergenceReport rep;
  for (int n = 0; n <= ball.radius(); ++n) {
    DivergenceRow row{n, ball.sphere_size(n), std::numeric_limits<double>::infinity()};
    for (std::size_t i = ball.sphere_begin(n); i < ball.sphere_end(n); ++i) {
      row.min_gap = std::min(row.min_gap, min_root_gap({kappas.col(static_cast<Eigen::Index>(i))}, theta));
    }
    if (row.count == 0) row.min_gap = 0.0;
    rep.rows.push_back(row);
  }
  const int start = std::max(1, ball.radius() / 2);
  if (ball.radius() - start < 1) return rep;
  // least-squares slope of the sphere minima against n over the outer half
  double sn = 0, sy = 0, snn = 0, sny = 0, m = 0;
  for (int n = start; n <= ball.radius(); ++n) {
    const auto& row = rep.rows[static_cast<std::size_t>(n)];
    if (row.count == 0) return rep;
    sn += n;
    sy += row.min_gap;
    snn += double(n) * n;
    sny += n * row.min_gap;
    m += 1;
  }
  const double slope = (m * sny - sn * sy) / (m * snn - sn * sn);
  rep.slope = slope;
  rep.divergent = slope >= min_slope && rep.rows.back().min_gap > rep.rows[static_cast<std::size_t>(start)].min_gap;
  return rep;
}

DivergenceReport divergence_diagnostic(const WordBall& ball, const RootSubset& theta) {
  return divergence_diagnostic(ball, theta, ball_cartan(ball));
}

LimitSetSample limit_set_sample(const WordBall& ball, const RootSubset& theta, std::size_t max_pairs,
                                std::uint64_t seed) {
  LimitSetSample out;
  const int r = ball.radius();
  for (std::size_t i = ball.sphere_begin(r); i < ball.sphere_end(r); ++i) {
    out.flags.push_back(u_theta(ball.element(i), theta));
    out.words.push_back(ball.word(i));
  }
  const std::size_t n = out.flags.size();
  out.weights.assign(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  if (n < 2 || !theta.is_symmetric()) return out;

  std::vector<double> conds;
  auto add = [&](std::size_t i, std::size_t j) {
    if (out.words[i].empty() || out.words[j].empty() || out.words[i][0] == out.words[j][0]) return;
    conds.push_back(is_transverse(out.flags[i], out.flags[j], 0.0).conditioning);
  };
  if (n * (n - 1) / 2 <= max_pairs) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) add(i, j);
    }
  } else {
    std::mt19937_64 rng(seed);
    for (std::size_t t = 0; t < max_pairs; ++t) {
      const std::size_t i = rng() % n, j = rng() % n;
      if (i != j) add(i, j);
    }
  }
  if (conds.empty()) return out;
  std::sort(conds.begin(), conds.end());
  auto quant = [&](double q) { return conds[static_cast<std::size_t>(q * static_cast<double>(conds.size() - 1))]; };
  out.cross_cylinder = {conds.size(), conds.front(), quant(0.25), quant(0.5), quant(0.75)};
  return out;
}

double m_theta(const GroupElement& g, const RootSubset& theta) {
  return std::exp(-std::max(0.0, min_root_gap(cartan_project(g), theta)));
}

double compactification_distance(const CompactPoint& a, const CompactPoint& b, const RootSubset& theta,
                                 const Tolerances& tol) {
  if (!theta.is_symmetric()) throw Error(ErrorCode::NonSymmetricTheta, "compactification needs a symmetric theta");
  auto flag_of = [&](const CompactPoint& p) {
    if (const auto* g = std::get_if<GroupElement>(&p)) return u_theta_unchecked(*g, theta);
    return std::get<PartialFlag>(p);
  };
  const PartialFlag fa = flag_of(a), fb = flag_of(b);
  const double flag_term = flag_distance(fa, fb) / kFlagDiameter;
  const auto* ga = std::get_if<GroupElement>(&a);
  const auto* gb = std::get_if<GroupElement>(&b);
  if (ga && gb) {
    const double scale = std::max({1.0, ga->matrix().cwiseAbs().maxCoeff(), gb->matrix().cwiseAbs().maxCoeff()});
    const double diff = std::min((ga->matrix() - gb->matrix()).cwiseAbs().maxCoeff(),
                                 ga->dim() % 2 == 0 ? (ga->matrix() + gb->matrix()).cwiseAbs().maxCoeff()
                                                    : std::numeric_limits<double>::infinity());
    if (diff <= tol.dedup_confirm * scale) return 0.0;
    return std::max(m_theta(*ga, theta), m_theta(*gb, theta)) + flag_term;
  }
  if (ga) return m_theta(*ga, theta) + flag_term;
  if (gb) return m_theta(*gb, theta) + flag_term;
  return flag_term;
}

std::string sphere_stats_csv(const WordBall& ball, const RootSubset& theta, const Matrix& kappas) {
  std::ostringstream os;
  os.precision(17);
  os << "n,count,min_gap,max_gap,mean_omega1\n";
  for (int n = 0; n <= ball.radius(); ++n) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    for (std::size_t i = ball.sphere_begin(n); i < ball.sphere_end(n); ++i) {
      const CartanVector k{kappas.col(static_cast<Eigen::Index>(i))};
      const double gap = min_root_gap(k, theta);
      lo = std::min(lo, gap);
      hi = std::max(hi, gap);
      sum += k.entries(0);
    }
    const auto c = ball.sphere_size(n);
    os << n << ',' << c << ',' << (c ? lo : 0.0) << ',' << (c ? hi : 0.0) << ','
       << (c ? sum / static_cast<double>(c) : 0.0) << '\n';
  }
  return os.str();
}

}  // namespace td
