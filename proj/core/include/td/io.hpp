#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "td/presets.hpp"

namespace td {

inline constexpr const char* kVersion = "0.1.0";

/// Contents of a generator file.
///
///   # comment
///   dim 2
///   theta 1
///   phi 1            coefficients on the fundamental weights of theta
///   gen 4 0 0 0.25   d*d entries, row-major
///
/// Keywords may come in any order except that dim precedes everything that
/// depends on it. Several phi and gen lines are allowed.
struct GeneratorSpec {
  int dim = 0;
  std::vector<int> theta;
  std::vector<std::vector<double>> functionals;
  std::vector<Matrix> generators;
};

/// Throws ParseError with the offending line number.
GeneratorSpec parse_generator_spec(const std::string& text);
std::string format_generator_spec(const GeneratorSpec& spec);

/// Whitespace- or comma-separated d*d numbers, row-major (d inferred).
Matrix parse_matrix(const std::string& text);

/// Everything one run needs. Round-trips through JSON losslessly.
struct ExperimentConfig {
  std::string preset;                       // empty when generators are inline
  std::optional<GeneratorSpec> inline_spec;  // inline generators
  std::vector<int> theta;                    // empty: the preset's theta
  std::vector<std::vector<double>> functionals;  // empty: omega_1 (or omega_1, omega_2 where needed)
  std::vector<int> radii;                    // empty: the command's default
  Tolerances tol;
  std::uint64_t seed = 1;
  std::string out_dir;  // empty: stdout only
  std::vector<double> lambdas;
  std::string subgroup;
  double r = -1.0;       // shadow radius; negative: calibrate
  double horizon = 50.0;
  std::size_t samples = 200;
  double s_factor = 1.0;
};

std::string config_to_json(const ExperimentConfig& c);
/// Throws ConfigError on unknown keys or wrong types.
ExperimentConfig config_from_json(const std::string& text);

/// Preset named by the config, or one built from its inline generators.
/// theta overrides are validated against the dimension (ConfigError).
GroupPreset resolve_preset(const ExperimentConfig& c);

/// The i-th functional of the config on the preset's theta (omega_1 of the
/// first theta index by default).
LinearFunctional resolve_functional(const ExperimentConfig& c, const GroupPreset& p, std::size_t i = 0);

/// Fixed-format number for CSV output (17 significant digits).
std::string format_number(double x);

}  // namespace td
