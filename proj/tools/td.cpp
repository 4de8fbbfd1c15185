// td: command-line workbench over the td core library.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "td/cartan.hpp"
#include "td/flow.hpp"
#include "td/io.hpp"
#include "td/orbit.hpp"
#include "td/patterson.hpp"
#include "td/series.hpp"

namespace fs = std::filesystem;
using namespace td;

namespace {

std::string fmt(double x) { return format_number(x); }

std::string word_string(const Word& w) {
  if (w.empty()) return "e";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(w[i]);
  }
  return out;
}

struct Output {
  std::string name;
  std::string content;
};

class Run {
 public:
  Run(std::string command, ExperimentConfig cfg)
      : command_(std::move(command)), cfg_(std::move(cfg)), start_(std::chrono::steady_clock::now()) {}

  const ExperimentConfig& config() const { return cfg_; }

  // The first table is also printed to stdout.
  void add(std::string name, std::string content) { outputs_.push_back({std::move(name), std::move(content)}); }

  void finish() {
    if (!outputs_.empty()) std::cout << outputs_.front().content;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (cfg_.out_dir.empty()) {
      std::cerr << "config: " << config_to_json(cfg_) << '\n';
      return;
    }
    fs::create_directories(cfg_.out_dir);
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& o : outputs_) {
      write(fs::path(cfg_.out_dir) / o.name, o.content);
      files.push_back(o.name);
    }
    write(fs::path(cfg_.out_dir) / "config.json", config_to_json(cfg_) + "\n");
    nlohmann::ordered_json m;
    m["command"] = command_;
    m["version"] = kVersion;
    m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    m["config"] = nlohmann::ordered_json::parse(config_to_json(cfg_));
    m["files"] = files;
    m["wall_clock_seconds"] = wall;
    write(fs::path(cfg_.out_dir) / "manifest.json", m.dump(2) + "\n");
  }

 private:
  static void write(const fs::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    f << s;
  }

  std::string command_;
  ExperimentConfig cfg_;
  std::chrono::steady_clock::time_point start_;
  std::vector<Output> outputs_;
};

int radius_or(const ExperimentConfig& c, int fallback) { return c.radii.empty() ? fallback : c.radii.back(); }

fs::path cache_dir() {
  const char* env = std::getenv("TD_CACHE_DIR");
  return env ? fs::path(env) : fs::path{};
}

WordBall ball_for(const GroupPreset& p, int radius, const ExperimentConfig& c) {
  return enumerate_ball_cached(p, radius, cache_dir(), 5'000'000, c.tol);
}

void require_symmetric(const GroupPreset& p) {
  if (!p.theta.is_symmetric()) {
    throw Error(ErrorCode::NonSymmetricTheta, "theta must be invariant under k -> d - k");
  }
}

void require_disk(const GroupPreset& p, const std::string& cmd) {
  if (p.domain != "klein-disk") {
    throw Error(ErrorCode::ConfigError, cmd + " needs a Klein-disk preset (SL(2,R)); " + p.name + " is not one");
  }
}

std::vector<GroupElement> generator_letters(const GroupPreset& p) {
  std::vector<GroupElement> out;
  for (std::size_t i = 0; i < p.generators.size(); ++i) {
    const auto& g = p.generators[i];
    const int k = static_cast<int>(i) + 1;
    out.push_back(GroupElement::from_pair(g.matrix(), g.inverse_matrix(), {k}));
    out.push_back(GroupElement::from_pair(g.inverse_matrix(), g.matrix(), {-k}));
  }
  return out;
}

// Flag measure on the outer sphere at s = s_factor * delta_hat.
AtomicMeasure shell_measure(const WordBall& ball, const Matrix& kappas, const GroupPreset& p,
                            const LinearFunctional& phi, double s) {
  return flag_pushforward(shell(patterson_measure(ball, kappas, phi, s), ball.radius()), p.theta);
}

// ---- commands ---------------------------------------------------------------

void cmd_presets(Run& run) {
  std::ostringstream os;
  os << "name,dim,theta,generators,domain,free,description\n";
  for (const auto& name : preset_names()) {
    const auto p = make_preset(name);
    std::string theta;
    for (int k : p.theta.indices()) theta += (theta.empty() ? "" : " ") + std::to_string(k);
    os << name << ',' << p.generators.front().dim() << ',' << theta << ',' << p.generators.size() << ','
       << (p.domain.empty() ? "-" : p.domain) << ',' << (p.free ? 1 : 0) << ",\"" << p.description << "\"\n";
  }
  run.add("presets.csv", os.str());
}

void cmd_ball(Run& run) {
  const auto& c = run.config();
  const auto p = resolve_preset(c);
  const auto ball = ball_for(p, radius_or(c, 8), c);
  const Matrix kappas = ball_cartan(ball);
  run.add("spheres.csv", sphere_stats_csv(ball, p.theta, kappas));
  const auto& d = ball.dedup();
  std::ostringstream os;
  os << "preset,radius,elements,merged,near_misses\n"
     << p.name << ',' << ball.radius() << ',' << ball.size() << ',' << d.merged << ',' << d.near_misses << '\n';
  run.add("ball.csv", os.str());
  const auto div = divergence_diagnostic(ball, p.theta, kappas);
  std::ostringstream dv;
  dv << "n,count,min_gap\n";
  for (const auto& r : div.rows) dv << r.n << ',' << r.count << ',' << fmt(r.min_gap) << '\n';
  dv << "# slope " << fmt(div.slope) << ", " << (div.divergent ? "divergent-consistent" : "no call") << '\n';
  run.add("divergence.csv", dv.str());
}

void kappa_header(std::ostringstream& os, int d, const RootSubset& theta) {
  os << "index,word,word_length";
  for (int i = 1; i <= d; ++i) os << ",kappa_" << i;
  for (int k : theta.indices()) os << ",omega_" << k;
  os << ",phi\n";
}

void kappa_row(std::ostringstream& os, std::size_t i, const Word& w, const CartanVector& k, const RootSubset& theta,
               const LinearFunctional& phi) {
  os << i << ',' << word_string(w) << ',' << w.size();
  for (int j = 0; j < k.dim(); ++j) os << ',' << fmt(k[j]);
  const auto wc = weight_coords(k, theta);
  for (double v : wc.values) os << ',' << fmt(v);
  os << ',' << fmt(phi(k)) << '\n';
}

void cmd_kappa(Run& run, const std::string& matrix) {
  const auto& c = run.config();
  std::ostringstream os;
  if (!matrix.empty()) {
    const GroupElement g(parse_matrix(matrix));
    const int d = g.dim();
    const RootSubset theta = c.theta.empty() ? RootSubset::full(d) : RootSubset(d, c.theta);
    if (!theta.is_symmetric()) throw Error(ErrorCode::NonSymmetricTheta, "theta must be invariant under k -> d - k");
    const LinearFunctional phi =
        c.functionals.empty() ? LinearFunctional::fundamental_weight(d, theta.indices().front())
                              : LinearFunctional{theta, c.functionals.front()};
    kappa_header(os, d, theta);
    kappa_row(os, 0, {}, cartan_project(g), theta, phi);
    run.add("kappa.csv", os.str());
    return;
  }
  const auto p = resolve_preset(c);
  require_symmetric(p);
  const auto phi = resolve_functional(c, p);
  const auto ball = ball_for(p, radius_or(c, 3), c);
  const Matrix kappas = ball_cartan(ball);
  kappa_header(os, ball.dim(), p.theta);
  for (std::size_t i = 0; i < ball.size(); ++i) {
    kappa_row(os, i, ball.word(i), CartanVector{kappas.col(static_cast<Eigen::Index>(i))}, p.theta, phi);
  }
  run.add("kappa.csv", os.str());
}

void cmd_delta(Run& run) {
  const auto& c = run.config();
  const auto p = resolve_preset(c);
  require_symmetric(p);
  const auto ball = ball_for(p, radius_or(c, 10), c);
  const Matrix kappas = ball_cartan(ball);
  const std::size_t nf = std::max<std::size_t>(1, c.functionals.size());
  std::ostringstream sum, partial, counts, byr;
  sum << "functional,delta_hat,delta_regression,band,t_complete,divergence\n";
  partial << "functional,s,radius,partial_sum\n";
  counts << "functional,T,N(T)\n";
  byr << "functional,radius,delta_hat\n";
  for (std::size_t f = 0; f < nf; ++f) {
    const auto phi = resolve_functional(c, p, f);
    const auto est = critical_exponent(ball, kappas, phi);
    sum << f << ',' << fmt(est.delta_hat) << ',' << fmt(est.delta_regression) << ',' << fmt(est.band) << ','
        << fmt(est.t_complete) << ',' << to_string(divergence_type(est)) << '\n';
    for (std::size_t si = 0; si < est.s_values.size(); ++si) {
      for (std::size_t ri = 0; ri < est.radii.size(); ++ri) {
        partial << f << ',' << fmt(est.s_values[si]) << ',' << est.radii[ri] << ','
                << fmt(est.partial_sums[si][ri]) << '\n';
      }
    }
    for (std::size_t k = 0; k < est.count_t.size(); ++k) {
      counts << f << ',' << fmt(est.count_t[k]) << ',' << fmt(est.count_n[k]) << '\n';
    }
    for (std::size_t k = 0; k < est.radii.size(); ++k) {
      byr << f << ',' << est.radii[k] << ',' << fmt(est.delta_by_radius[k]) << '\n';
    }
  }
  run.add("delta.csv", sum.str());
  run.add("partial_sums.csv", partial.str());
  run.add("counts.csv", counts.str());
  run.add("delta_by_radius.csv", byr.str());
}

void cmd_patterson(Run& run) {
  const auto& c = run.config();
  const auto p = resolve_preset(c);
  require_symmetric(p);
  const auto phi = resolve_functional(c, p);
  const auto ball = ball_for(p, radius_or(c, 10), c);
  const Matrix kappas = ball_cartan(ball);
  const auto est = critical_exponent(ball, kappas, phi);
  const double s = c.s_factor * est.delta_hat;
  if (!(s > est.delta_hat - est.band)) {
    throw Error(ErrorCode::ConfigError, "s = " + fmt(s) + " is below delta_hat - band");
  }

  // schedule s_k = delta_hat (1 + 2^-k): total variation between successive measures
  std::ostringstream sched;
  sched << "k,s,tv_distance\n";
  const auto ss = s_schedule(est.delta_hat, 6);
  AtomicMeasure prev = patterson_measure(ball, kappas, phi, ss.front());
  sched << 1 << ',' << fmt(ss.front()) << ",\n";
  for (std::size_t k = 1; k < ss.size(); ++k) {
    AtomicMeasure cur = patterson_measure(ball, kappas, phi, ss[k]);
    sched << k + 1 << ',' << fmt(ss[k]) << ',' << fmt(total_variation(prev, cur)) << '\n';
    prev = std::move(cur);
  }

  const auto mu = patterson_measure(ball, kappas, phi, s);
  std::ostringstream conf;
  conf << "gamma,cell,pushed,density,residual,skipped\n";
  const auto flags = shell_measure(ball, kappas, p, phi, s);
  const auto cells = sphere_cells(ball, std::min(2, ball.radius()), p.theta);
  for (const auto& g : generator_letters(p)) {
    const auto rep = conformality_check(flags, g, cells);
    for (const auto& row : rep.rows) {
      conf << word_string(g.word()) << ',' << row.cell << ',' << fmt(row.pushed) << ',' << fmt(row.density) << ','
           << fmt(row.rel_error) << ',' << (row.skipped ? 1 : 0) << '\n';
    }
  }
  run.add("conformality.csv", conf.str());
  run.add("schedule.csv", sched.str());
  run.add("measure.json", to_json(mu) + "\n");
}

void cmd_shadow_check(Run& run, double declared_c) {
  const auto& c = run.config();
  const auto p = resolve_preset(c);
  require_disk(p, "shadow-check");
  const auto phi = resolve_functional(c, p);
  const auto ball = ball_for(p, radius_or(c, 12), c);
  const Matrix kappas = ball_cartan(ball);
  const auto est = critical_exponent(ball, kappas, phi);
  const auto mu = shell_measure(ball, kappas, p, phi, c.s_factor * est.delta_hat);
  const auto gammas = sample_by_length(ball, std::min(4, ball.radius()), std::max(0, ball.radius() - 2), 20, c.seed);
  double r0 = -1.0, r = c.r;
  if (r < 0) {
    r0 = calibrate_shadow_radius(mu, gammas, {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0}, declared_c);
    if (r0 < 0) throw Error(ErrorCode::PreconditionViolated, "no shadow radius on the grid passes");
    r = r0 + 1.0;
  }
  const auto rep = shadow_lemma_check(mu, gammas, r, declared_c);
  std::ostringstream rows, summary, con;
  rows << "word,length,mass,ratio\n";
  for (const auto& row : rep.rows) {
    rows << word_string(row.word) << ',' << row.length << ',' << fmt(row.mass) << ',' << fmt(row.ratio) << '\n';
  }
  summary << "r,R0,min_ratio,max_ratio,constant,declared_C,pass\n"
          << fmt(r) << ',' << fmt(r0) << ',' << fmt(rep.min_ratio) << ',' << fmt(rep.max_ratio) << ','
          << fmt(rep.constant) << ',' << fmt(declared_c) << ',' << (rep.pass ? 1 : 0) << '\n';
  std::vector<int> schedule;
  for (int n = 2; n <= ball.radius(); n += 2) schedule.push_back(n);
  const auto cm = conical_mass_estimate(mu, ball, r, schedule);
  con << "N,conical_mass\n";
  for (const auto& row : cm.rows) con << row.n << ',' << fmt(row.mass) << '\n';
  run.add("shadow_summary.csv", summary.str());
  run.add("shadows.csv", rows.str());
  run.add("conical.csv", con.str());
}

void cmd_manhattan(Run& run) {
  const auto& c = run.config();
  const auto p = resolve_preset(c);
  require_symmetric(p);
  if (p.theta.size() < 2 && c.functionals.size() < 2) {
    throw Error(ErrorCode::ConfigError, "manhattan needs two functionals (theta with two indices, or --phi twice)");
  }
  const auto phi1 = resolve_functional(c, p, 0);
  const auto phi2 = resolve_functional(c, p, 1);
  std::vector<double> lambdas = c.lambdas;
  if (lambdas.empty()) lambdas = {0.0, 0.25, 0.5, 0.75, 1.0};
  const auto ball = ball_for(p, radius_or(c, 8), c);
  const Matrix kappas = ball_cartan(ball);
  const auto rep = manhattan_experiment(ball, kappas, phi1, phi2, lambdas, 100, c.seed);
  std::ostringstream os, summary;
  os << "lambda,delta_hat,band\n";
  for (const auto& row : rep.rows) os << fmt(row.lambda) << ',' << fmt(row.delta_hat) << ',' << fmt(row.band) << '\n';
  summary << "delta_phi1,delta_phi2,at_most_one,midpoint_concave,length_probe\n"
          << fmt(rep.delta1) << ',' << fmt(rep.delta2) << ',' << (rep.at_most_one ? 1 : 0) << ','
          << (rep.midpoint_concave ? 1 : 0) << ',' << fmt(rep.length_probe) << '\n';
  run.add("manhattan.csv", os.str());
  run.add("manhattan_summary.csv", summary.str());
}

void cmd_entropy_drop(Run& run) {
  const auto& c = run.config();
  const auto p = resolve_preset(c);
  require_symmetric(p);
  const auto phi = resolve_functional(c, p);
  const std::string name = c.subgroup.empty() ? "a" : c.subgroup;
  const auto it = p.subgroups.find(name);
  if (it == p.subgroups.end()) throw Error(ErrorCode::ConfigError, "preset " + p.name + " has no subgroup '" + name + "'");
  const auto ball = ball_for(p, radius_or(c, 10), c);
  const Matrix kappas = ball_cartan(ball);
  const auto rep = entropy_drop_experiment(p, ball, kappas, it->second, phi);
  std::ostringstream os;
  os << "group,delta_hat,band,radius\n"
     << p.name << ',' << fmt(rep.full.delta_hat) << ',' << fmt(rep.full.band) << ',' << ball.radius() << '\n'
     << name << ',' << fmt(rep.sub.delta_hat) << ',' << fmt(rep.sub.band) << ',' << rep.sub_radius << '\n';
  std::ostringstream gap;
  gap << "gap,band,hausdorff\n" << fmt(rep.gap) << ',' << fmt(rep.band) << ',' << fmt(rep.hausdorff) << '\n';
  run.add("entropy_drop.csv", os.str());
  run.add("entropy_gap.csv", gap.str());
}

void cmd_flow(Run& run) {
  const auto& c = run.config();
  const auto p = resolve_preset(c);
  require_disk(p, "flow");
  const auto phi = resolve_functional(c, p);
  const auto ball = ball_for(p, radius_or(c, 8), c);
  const Matrix kappas = ball_cartan(ball);
  const auto est = critical_exponent(ball, kappas, phi);
  const double s = c.s_factor * est.delta_hat;
  const auto mu = shell_measure(ball, kappas, p, phi, s);
  const auto mubar = shell_measure(ball, kappas, p, dual_functional(phi), s);
  const auto m = assemble_bms(mubar, mu, s, phi, 0);
  const auto cells = sphere_cells(ball, std::min(2, ball.radius()), p.theta);

  std::ostringstream inv;
  inv << "gamma,cell_x,cell_y,original,transported,residual\n";
  std::vector<GroupElement> gens = p.generators;
  for (const auto& g : generator_letters(p)) {
    const auto rep = invariance_residual(m, g, gens, cells);
    for (const auto& row : rep.rows) {
      inv << word_string(g.word()) << ',' << row.cell_x << ',' << row.cell_y << ',' << fmt(row.original) << ','
          << fmt(row.transported) << ',' << fmt(row.residual) << '\n';
    }
  }
  const auto rec = recurrence_diagnostic(p, m, c.horizon, c.samples, c.seed);
  std::ostringstream rs;
  rs << "horizon,samples,cell_radius,k_threshold,return_fraction,mean_reentries,verdict\n"
     << fmt(rec.horizon) << ',' << rec.samples << ',' << fmt(rec.cell_radius) << ',' << rec.k_threshold << ','
     << fmt(rec.return_fraction) << ',' << fmt(rec.mean_reentries) << ",\"" << rec.verdict << "\"\n";
  run.add("recurrence.csv", rs.str());
  run.add("invariance.csv", inv.str());
  run.add("trajectory.csv", trajectory_csv(rec));
}

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ConfigError:
    case ErrorCode::ParseError:
    case ErrorCode::NonSymmetricTheta:
    case ErrorCode::IoError:
      return 2;
    default:
      return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"td: Patterson-Sullivan workbench for transverse subgroups of SL(d,R)"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string preset, config_file, generators_file, out_dir;
  int radius = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<int> theta;
  std::vector<std::string> phis;
  Tolerances tol_cli;
  std::vector<std::pair<std::string, double*>> tol_flags = {
      {"det", &tol_cli.det},
      {"word", &tol_cli.word},
      {"gap-min", &tol_cli.gap_min},
      {"transverse", &tol_cli.transverse},
      {"dedup-quantum", &tol_cli.dedup_quantum},
      {"dedup-confirm", &tol_cli.dedup_confirm},
      {"nondiscrete", &tol_cli.nondiscrete},
      {"dedup-identity", &tol_cli.dedup_identity},
  };
  std::vector<CLI::Option*> tol_opts;

  app.add_option("--preset", preset, "named preset (see `td presets`)");
  app.add_option("--config", config_file, "experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--generators", generators_file, "generator file (dim/theta/phi/gen lines)")->check(CLI::ExistingFile);
  app.add_option("--radius", radius, "word-length radius");
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out_dir, "output directory (tables, config echo, manifest)");
  app.add_option("--theta", theta, "root subset, e.g. --theta 1 2")->expected(1, -1);
  app.add_option("--phi", phis, "functional coefficients on theta, e.g. --phi \"1 0\"; repeat for a second one");
  for (auto& [name, ptr] : tol_flags) tol_opts.push_back(app.add_option("--tol-" + name, *ptr, "tolerance override"));

  auto* presets_cmd = app.add_subcommand("presets", "list presets");
  auto* ball_cmd = app.add_subcommand("ball", "enumerate a word ball; sphere statistics");
  auto* kappa_cmd = app.add_subcommand("kappa", "Cartan projections of a ball or of one matrix");
  std::string matrix;
  kappa_cmd->add_option("--matrix", matrix, "one matrix, d*d entries row-major");
  auto* delta_cmd = app.add_subcommand("delta", "critical exponent estimates");
  auto* patterson_cmd = app.add_subcommand("patterson", "Patterson measure, schedule and conformality");
  double s_factor = 1.0;
  patterson_cmd->add_option("--s-factor", s_factor, "s = factor * delta_hat");
  auto* shadow_cmd = app.add_subcommand("shadow-check", "shadow lemma ratios and conical mass (Klein disk)");
  double shadow_r = -1.0, declared_c = 20.0;
  shadow_cmd->add_option("--r", shadow_r, "shadow radius (default: calibrated R0 + 1)");
  shadow_cmd->add_option("--C", declared_c, "declared constant");
  auto* manhattan_cmd = app.add_subcommand("manhattan", "delta_hat along lambda psi1 + (1 - lambda) psi2");
  std::vector<double> lambdas;
  manhattan_cmd->add_option("--lambdas", lambdas, "comma-separated lambdas")->delimiter(',');
  auto* entropy_cmd = app.add_subcommand("entropy-drop", "delta_hat of a subgroup against the full group");
  std::string subgroup;
  entropy_cmd->add_option("--subgroup", subgroup, "named subgroup of the preset");
  auto* flow_cmd = app.add_subcommand("flow", "BMS invariance and recurrence (Klein disk)");
  double horizon = 50.0;
  std::size_t samples = 200;
  flow_cmd->add_option("--horizon", horizon, "flow time");
  flow_cmd->add_option("--samples", samples, "atom pairs");

  try {
    app.parse(argc, argv);
    seed_set = seed_opt->count() > 0;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg;
    if (!config_file.empty()) {
      std::ifstream f(config_file);
      std::stringstream ss;
      ss << f.rdbuf();
      cfg = config_from_json(ss.str());
    }
    if (!generators_file.empty()) {
      std::ifstream f(generators_file);
      std::stringstream ss;
      ss << f.rdbuf();
      cfg.inline_spec = parse_generator_spec(ss.str());
      cfg.preset.clear();
    }
    if (!preset.empty()) {
      cfg.preset = preset;
      cfg.inline_spec.reset();
    }
    if (radius >= 0) cfg.radii = {radius};
    if (seed_set) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!theta.empty()) cfg.theta = theta;
    if (!phis.empty()) {
      cfg.functionals.clear();
      for (const auto& s : phis) {
        std::vector<double> coeffs;
        std::istringstream is(s);
        for (std::string tok; is >> tok;) {
          try {
            coeffs.push_back(std::stod(tok));
          } catch (const std::exception&) {
            throw Error(ErrorCode::ConfigError, "--phi: not a number: '" + tok + "'");
          }
        }
        cfg.functionals.push_back(std::move(coeffs));
      }
    }
    for (std::size_t i = 0; i < tol_opts.size(); ++i) {
      if (tol_opts[i]->count() == 0) continue;
      const double v = *tol_flags[i].second;
      if (!(v > 0)) throw Error(ErrorCode::ConfigError, "--tol-" + tol_flags[i].first + " must be positive");
      Tolerances& t = cfg.tol;
      double* dst[] = {&t.det, &t.word, &t.gap_min, &t.transverse, &t.dedup_quantum, &t.dedup_confirm, &t.nondiscrete,
                       &t.dedup_identity};
      *dst[i] = v;
    }
    if (patterson_cmd->count("--s-factor")) cfg.s_factor = s_factor;
    if (shadow_cmd->count("--r")) cfg.r = shadow_r;
    if (!lambdas.empty()) cfg.lambdas = lambdas;
    if (!subgroup.empty()) cfg.subgroup = subgroup;
    if (flow_cmd->count("--horizon")) cfg.horizon = horizon;
    if (flow_cmd->count("--samples")) cfg.samples = samples;
    if (!(cfg.s_factor > 0)) throw Error(ErrorCode::ConfigError, "s_factor must be positive");

    const bool needs_group = !(*presets_cmd) && !(*kappa_cmd && !matrix.empty());
    if (needs_group && cfg.preset.empty() && !cfg.inline_spec) {
      throw Error(ErrorCode::ConfigError, "give --preset, --generators or a config with one of them");
    }

    const std::string name = app.get_subcommands().front()->get_name();
    Run run(name, cfg);
    if (*presets_cmd) cmd_presets(run);
    if (*ball_cmd) cmd_ball(run);
    if (*kappa_cmd) cmd_kappa(run, matrix);
    if (*delta_cmd) cmd_delta(run);
    if (*patterson_cmd) cmd_patterson(run);
    if (*shadow_cmd) cmd_shadow_check(run, declared_c);
    if (*manhattan_cmd) cmd_manhattan(run);
    if (*entropy_cmd) cmd_entropy_drop(run);
    if (*flow_cmd) cmd_flow(run);
    run.finish();
  } catch (const Error& e) {
    std::cerr << "td: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "td: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
