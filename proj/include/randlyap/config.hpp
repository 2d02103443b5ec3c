#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "randlyap/circle_map.hpp"
#include "randlyap/regions.hpp"

namespace randlyap {

struct MapConfig {
  std::string psi = "sin";  // sin | fourier
  std::vector<double> psi_cos;
  std::vector<double> psi_sin;
  double L = 10.0;
  double a = 0.0;
  bool standard_map = false;
};

struct NoiseConfig {
  double epsilon = 0.01;
  std::uint64_t seed = 1;
};

struct ChainConfig {
  std::size_t burn_in = 1000;
  std::size_t n_steps = 100000;
  std::size_t n_replicas = 16;
  std::size_t renorm_every = 25;
  std::string method = "norm";  // norm | furstenberg | inverse | both | all
  std::size_t grid = 32;
  std::size_t n_samples = 100000;
};

struct RegionsConfig {
  double c = 0.005;
  double c0 = 0.2;
  std::optional<double> p;  // defaults to (1 - alpha) / 4
  double beta = 0.5;
  GNVersion version = GNVersion::thm2;
  std::size_t N = 6;
  double alpha = 0.5;
};

struct SweepConfig {
  std::vector<double> L;
  std::vector<double> epsilon;
};

struct H3ScanConfig {
  std::vector<double> c{0.2, 0.1, 0.05, 0.02, 0.01};
  std::size_t n_a = 1024;
};

struct OutputConfig {
  std::string path;
  std::string format = "csv";  // csv | json
};

struct ExperimentConfig {
  MapConfig map;
  NoiseConfig noise;
  ChainConfig chain;
  RegionsConfig regions;
  SweepConfig sweep;
  H3ScanConfig h3scan;
  OutputConfig output;

  /// Source line of each key set from a file (0 for defaults and overrides).
  std::map<std::string, int> lines;

  double p() const { return regions.p.value_or(0.25 * (1.0 - regions.alpha)); }
  RegionParams region_params() const;
  CircleMap build_map() const;
  /// Same map with L replaced (sweeps).
  CircleMap build_map(double L) const;
};

/// Every accepted dotted key, in canonical order.
const std::vector<std::string>& config_keys();

/// Parses a YAML document; nested mappings are flattened to dotted keys.
ExperimentConfig load_config_string(const std::string& yaml);
ExperimentConfig load_config_file(const std::string& path);

/// Applies "key=value"; the value is parsed as a YAML scalar or flow sequence.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

/// Range checks; throws ConfigError naming the key and its source line.
void validate(const ExperimentConfig& cfg);

/// Canonical JSON of every field except output.* (which does not affect results).
nlohmann::json canonical_json(const ExperimentConfig& cfg);

/// FNV-1a 64 of the canonical JSON and the tool version, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

std::string tool_version();

}  // namespace randlyap
