#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "randlyap/config.hpp"
#include "randlyap/parallel.hpp"
#include "randlyap/torus.hpp"

namespace randlyap {

using Cell = std::variant<std::string, double, std::int64_t, std::uint64_t, bool>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

/// %.17g, with nan / inf / -inf spelled out.
std::string format_double(double v);
/// RFC 4180 with a header row; a manifest_hash column is appended to every row.
std::string to_csv(const Table& t, const std::string& manifest_hash);
/// {"manifest_hash": ..., "rows": [{column: value, ...}, ...]}
nlohmann::json to_json(const Table& t, const std::string& manifest_hash);

struct SuiteResult {
  std::string suite;
  bool pass = false;
  std::string first_failure;
  nlohmann::json report = nlohmann::json::object();
  Table table;  // check, observed, bound, pass (per-case rows for the cone suite)
};

/// Collects named checks and the first failing one.
class CheckList {
 public:
  void add(const std::string& name, double observed, double bound, bool pass);
  void add(const std::string& name, double observed, const std::string& bound, bool pass);
  void fill(SuiteResult& r) const;

 private:
  Table table_{{"check", "observed", "bound", "pass"}, {}};
  std::string first_failure_;
  bool pass_ = true;
};

/// Determinant of dH from central differences of the factorization H = Psi o T,
/// where T(w) = (y1, y2, y3) is unit lower triangular and Psi(y1, y2, y3) =
/// (x3, y3, theta3) is evaluated by composing the projective action.
double fd_det_dH(const CircleMap& map, ProjPoint q0, NoiseTriple w, double h = 1e-6);
/// fd_det_dH over steps h_max / 2^k, returning the estimate that agrees best
/// with both neighbours (the plateau between truncation and rounding error).
double fd_det_dH_adaptive(const CircleMap& map, ProjPoint q0, NoiseTriple w, double h_max = 1e-3,
                          int halvings = 14);

/// Nondegenerate sample of (q0, w) for the density checks: |f''(x0 + w1)| >= 1e-3
/// and |tan theta_i| in [1e-3, 1e3] along the three steps.
bool density_sample_ok(const CircleMap& map, ProjPoint q0, NoiseTriple w);

struct DensitySizes {
  std::size_t n_det = 1000;
  std::size_t n_jacobian = 10000;
  std::size_t n_unimodular = 100000;
};

/// det dH closed form vs oracle, rho consistency, Jacobian vs differences, |det dF| = 1.
SuiteResult suite_density(const ExperimentConfig& cfg, const DensitySizes& sizes, Exec exec = Exec::parallel);
/// Preimage enumeration recovers the generating triple; at most M2 preimages.
SuiteResult suite_preimages(const ExperimentConfig& cfg, std::size_t n, Exec exec = Exec::parallel);
/// Pushforward uniformity, ergodic average, Markov property.
SuiteResult suite_stationarity(const ExperimentConfig& cfg, std::size_t n_points, std::size_t n_steps,
                               Exec exec = Exec::parallel);
/// Word cases (a)-(f) plus the case (a) minimal-L scan.
SuiteResult suite_cones(const ExperimentConfig& cfg, std::size_t n_per_case, Exec exec = Exec::parallel);
SuiteResult suite_grammar(const ExperimentConfig& cfg, std::size_t n_orbits, Exec exec = Exec::parallel);
SuiteResult suite_lemma53(const ExperimentConfig& cfg, std::size_t n, Exec exec = Exec::parallel);
SuiteResult suite_propertyB(const ExperimentConfig& cfg, std::size_t n_blocks, Exec exec = Exec::parallel);

struct ConcentrationSizes {
  std::vector<std::size_t> N{2, 4, 8, 16};
  std::size_t n_gn = 1000000;
  std::size_t n_measure = 2000000;
};
/// Affine growth of Leb(G_N^c) in N and stability of the fitted concentration constant across L.
SuiteResult suite_concentration(const ExperimentConfig& cfg, const ConcentrationSizes& sizes,
                                Exec exec = Exec::parallel);

const std::vector<std::string>& suite_names();
/// Dispatches by name with sample counts taken from the config.
SuiteResult run_suite(const ExperimentConfig& cfg, const std::string& name, Exec exec = Exec::parallel);

/// One row per (L, epsilon, method) cell of the sweep.
Table cmd_le(const ExperimentConfig& cfg, Exec exec = Exec::parallel);
/// Rows (L, c, a, holds, worst_distance, pass_fraction) over an n_a-point grid of a.
Table cmd_h3scan(const ExperimentConfig& cfg);

struct ReportOutput {
  nlohmann::json summary;
  Table histogram;  // ix, iy, itheta, count
};
/// Structure constants, hypotheses, empirical projective measure and its
/// diagnostics for the configured map.
ReportOutput cmd_report(const ExperimentConfig& cfg, Exec exec = Exec::parallel);

/// Seeds used by each task of a command, for the manifest.
nlohmann::json task_seeds(const ExperimentConfig& cfg, const std::string& command);

struct RunManifest {
  std::string config_hash;
  std::string tool_version;
  std::string command;
  nlohmann::json seeds;
  nlohmann::json config;
  std::string started;
  std::string finished;
};

RunManifest make_manifest(const ExperimentConfig& cfg, const std::string& command);
nlohmann::json to_json(const RunManifest& m);
/// UTC timestamp, ISO 8601.
std::string utc_now();

}  // namespace randlyap
