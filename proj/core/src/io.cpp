#include "td/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

namespace td {

namespace {

using json = nlohmann::ordered_json;

std::vector<std::string> tokens(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double to_double(const std::string& s, int line) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": not a number: '" + s + "'");
  }
  return v;
}

int to_int(const std::string& s, int line) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": not an integer: '" + s + "'");
  }
  return v;
}

json spec_json(const GeneratorSpec& s) {
  json gens = json::array();
  for (const auto& g : s.generators) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < g.cols(); ++j) row.push_back(g(i, j));
      rows.push_back(row);
    }
    gens.push_back(rows);
  }
  return json{{"dim", s.dim}, {"theta", s.theta}, {"functionals", s.functionals}, {"generators", gens}};
}

GeneratorSpec spec_from(const json& j) {
  GeneratorSpec s;
  s.dim = j.at("dim").get<int>();
  s.theta = j.value("theta", std::vector<int>{});
  s.functionals = j.value("functionals", std::vector<std::vector<double>>{});
  for (const auto& rows : j.at("generators")) {
    Matrix m(s.dim, s.dim);
    if (static_cast<int>(rows.size()) != s.dim) throw Error(ErrorCode::ConfigError, "generator has wrong row count");
    for (int i = 0; i < s.dim; ++i) {
      if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != s.dim) {
        throw Error(ErrorCode::ConfigError, "generator has wrong column count");
      }
      for (int k = 0; k < s.dim; ++k) m(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
    }
    s.generators.push_back(std::move(m));
  }
  return s;
}

}  // namespace

GeneratorSpec parse_generator_spec(const std::string& text) {
  GeneratorSpec spec;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = tokens(line);
    if (t.empty()) continue;
    const std::string& key = t[0];
    auto need_dim = [&] {
      if (spec.dim <= 0) throw Error(ErrorCode::ParseError, "line " + std::to_string(n) + ": '" + key + "' before dim");
    };
    if (key == "dim") {
      if (t.size() != 2) throw Error(ErrorCode::ParseError, "line " + std::to_string(n) + ": dim takes one value");
      spec.dim = to_int(t[1], n);
      if (spec.dim < 2) throw Error(ErrorCode::ParseError, "line " + std::to_string(n) + ": dim must be >= 2");
    } else if (key == "theta") {
      need_dim();
      spec.theta.clear();
      for (std::size_t i = 1; i < t.size(); ++i) spec.theta.push_back(to_int(t[i], n));
    } else if (key == "phi") {
      std::vector<double> c;
      for (std::size_t i = 1; i < t.size(); ++i) c.push_back(to_double(t[i], n));
      spec.functionals.push_back(std::move(c));
    } else if (key == "gen") {
      need_dim();
      const auto want = static_cast<std::size_t>(spec.dim) * static_cast<std::size_t>(spec.dim);
      if (t.size() - 1 != want) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(n) + ": gen needs " + std::to_string(want) +
                                               " entries, got " + std::to_string(t.size() - 1));
      }
      Matrix m(spec.dim, spec.dim);
      for (int i = 0; i < spec.dim; ++i) {
        for (int k = 0; k < spec.dim; ++k) m(i, k) = to_double(t[1 + static_cast<std::size_t>(i * spec.dim + k)], n);
      }
      spec.generators.push_back(std::move(m));
    } else {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(n) + ": unknown keyword '" + key + "'");
    }
  }
  if (spec.dim <= 0) throw Error(ErrorCode::ParseError, "missing dim");
  if (spec.generators.empty()) throw Error(ErrorCode::ParseError, "no generators");
  return spec;
}

std::string format_generator_spec(const GeneratorSpec& spec) {
  std::ostringstream out;
  out << "dim " << spec.dim << '\n';
  if (!spec.theta.empty()) {
    out << "theta";
    for (int k : spec.theta) out << ' ' << k;
    out << '\n';
  }
  for (const auto& f : spec.functionals) {
    out << "phi";
    for (double c : f) out << ' ' << format_number(c);
    out << '\n';
  }
  for (const auto& g : spec.generators) {
    out << "gen";
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      for (Eigen::Index k = 0; k < g.cols(); ++k) out << ' ' << format_number(g(i, k));
    }
    out << '\n';
  }
  return out.str();
}

Matrix parse_matrix(const std::string& text) {
  const auto t = tokens(text);
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(t.size()))));
  if (d < 2 || static_cast<std::size_t>(d * d) != t.size()) {
    throw Error(ErrorCode::ConfigError, "matrix needs d*d entries (d >= 2), got " + std::to_string(t.size()));
  }
  Matrix m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int k = 0; k < d; ++k) m(i, k) = to_double(t[static_cast<std::size_t>(i * d + k)], 1);
  }
  return m;
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["generators"] = c.inline_spec ? spec_json(*c.inline_spec) : json(nullptr);
  j["theta"] = c.theta;
  j["functionals"] = c.functionals;
  j["radii"] = c.radii;
  j["tolerances"] = json{{"det", c.tol.det},
                         {"word", c.tol.word},
                         {"gap_min", c.tol.gap_min},
                         {"transverse", c.tol.transverse},
                         {"dedup_quantum", c.tol.dedup_quantum},
                         {"dedup_confirm", c.tol.dedup_confirm},
                         {"nondiscrete", c.tol.nondiscrete},
                         {"dedup_identity", c.tol.dedup_identity}};
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["lambdas"] = c.lambdas;
  j["subgroup"] = c.subgroup;
  j["r"] = c.r;
  j["horizon"] = c.horizon;
  j["samples"] = c.samples;
  j["s_factor"] = c.s_factor;
  // 17 significant digits: doubles survive the round trip
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("config is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  static const std::set<std::string> known = {"preset", "generators", "theta",   "functionals", "radii",
                                              "tolerances", "seed",   "out_dir", "lambdas",     "subgroup",
                                              "r",      "horizon",    "samples", "s_factor"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw Error(ErrorCode::ConfigError, "unknown config key '" + k + "'");
  }
  ExperimentConfig c;
  try {
    c.preset = j.value("preset", std::string{});
    if (j.contains("generators") && !j["generators"].is_null()) c.inline_spec = spec_from(j["generators"]);
    c.theta = j.value("theta", std::vector<int>{});
    c.functionals = j.value("functionals", std::vector<std::vector<double>>{});
    c.radii = j.value("radii", std::vector<int>{});
    if (j.contains("tolerances")) {
      const auto& t = j["tolerances"];
      static const std::set<std::string> tk = {"det",           "word",          "gap_min",     "transverse",
                                               "dedup_quantum", "dedup_confirm", "nondiscrete", "dedup_identity"};
      for (const auto& [k, v] : t.items()) {
        if (!tk.count(k)) throw Error(ErrorCode::ConfigError, "unknown tolerance '" + k + "'");
      }
      c.tol.det = t.value("det", c.tol.det);
      c.tol.word = t.value("word", c.tol.word);
      c.tol.gap_min = t.value("gap_min", c.tol.gap_min);
      c.tol.transverse = t.value("transverse", c.tol.transverse);
      c.tol.dedup_quantum = t.value("dedup_quantum", c.tol.dedup_quantum);
      c.tol.dedup_confirm = t.value("dedup_confirm", c.tol.dedup_confirm);
      c.tol.nondiscrete = t.value("nondiscrete", c.tol.nondiscrete);
      c.tol.dedup_identity = t.value("dedup_identity", c.tol.dedup_identity);
    }
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out_dir", std::string{});
    c.lambdas = j.value("lambdas", std::vector<double>{});
    c.subgroup = j.value("subgroup", std::string{});
    c.r = j.value("r", c.r);
    c.horizon = j.value("horizon", c.horizon);
    c.samples = j.value("samples", c.samples);
    c.s_factor = j.value("s_factor", c.s_factor);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad config value: ") + e.what());
  }
  return c;
}

GroupPreset resolve_preset(const ExperimentConfig& c) {
  GroupPreset p;
  if (c.inline_spec) {
    const GeneratorSpec& s = *c.inline_spec;
    p.name = "inline";
    p.description = "generators from the config";
    bool integer = true;
    for (std::size_t i = 0; i < s.generators.size(); ++i) {
      const Matrix& g = s.generators[i];
      if (g.rows() != s.dim || g.cols() != s.dim) throw Error(ErrorCode::ConfigError, "generator has wrong shape");
      integer = integer && (g.array() == g.array().round()).all() && std::abs(std::abs(g.determinant()) - 1) < 1e-12;
      p.generators.emplace_back(g, Word{static_cast<int>(i) + 1});
    }
    if (integer) {
      for (const auto& g : p.generators) integer = integer && (g.inverse_matrix().array() == g.inverse_matrix().array().round()).all();
    }
    p.integer = integer;
    p.theta = s.theta.empty() ? RootSubset::full(s.dim) : RootSubset(s.dim, s.theta);
    p.domain = s.dim == 2 ? "klein-disk" : "";
  } else {
    if (c.preset.empty()) throw Error(ErrorCode::ConfigError, "no preset and no inline generators");
    p = make_preset(c.preset);
  }
  if (!c.theta.empty()) {
    const int d = p.generators.front().dim();
    for (int k : c.theta) {
      if (k < 1 || k >= d) throw Error(ErrorCode::ConfigError, "theta index " + std::to_string(k) + " out of range");
    }
    p.theta = RootSubset(d, c.theta);
  }
  return p;
}

LinearFunctional resolve_functional(const ExperimentConfig& c, const GroupPreset& p, std::size_t i) {
  const int d = p.theta.dim();
  const std::vector<std::vector<double>>* fs = &c.functionals;
  if (fs->empty() && c.inline_spec) fs = &c.inline_spec->functionals;
  if (i < fs->size()) {
    const auto& coeffs = (*fs)[i];
    if (coeffs.size() != p.theta.size()) {
      throw Error(ErrorCode::ConfigError, "functional has " + std::to_string(coeffs.size()) +
                                              " coefficients, theta has " + std::to_string(p.theta.size()));
    }
    return {p.theta, coeffs};
  }
  if (p.theta.empty()) throw Error(ErrorCode::ConfigError, "empty theta");
  const auto& idx = p.theta.indices();
  return LinearFunctional::fundamental_weight(d, idx[std::min(i, idx.size() - 1)]);
}

std::string format_number(double x) {
  char buf[32];
  if (x == 0.0) x = 0.0;  // no "-0" in tables
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace td
