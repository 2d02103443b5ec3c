#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "randlyap/config.hpp"
#include "randlyap/errors.hpp"
#include "randlyap/experiments.hpp"
#include "randlyap/parallel.hpp"

namespace {

using namespace randlyap;

constexpr int kExitPass = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out;
  std::string format;
  std::vector<std::string> sets;
};

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config_path.empty() ? ExperimentConfig{} : load_config_file(c.config_path);
  for (const auto& s : c.sets) apply_override(cfg, s);
  if (c.seed) cfg.noise.seed = *c.seed;
  if (!c.out.empty()) cfg.output.path = c.out;
  if (!c.format.empty()) cfg.output.format = c.format;
  validate(cfg);
  return cfg;
}

void emit(const ExperimentConfig& cfg, const std::string& text) {
  if (cfg.output.path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.output.path, std::ios::binary);
  if (!f) throw ConfigError("output.path", 0, "cannot write '" + cfg.output.path + "'");
  f << text;
}

void emit_manifest(const ExperimentConfig& cfg, RunManifest m) {
  if (cfg.output.path.empty()) return;
  m.finished = utc_now();
  std::ofstream f(cfg.output.path + ".manifest.json", std::ios::binary);
  f << to_json(m).dump(2) << "\n";
}

std::string render(const Table& t, const ExperimentConfig& cfg, const std::string& hash) {
  if (cfg.output.format == "json") return to_json(t, hash).dump(2) + "\n";
  return to_csv(t, hash);
}

bool format_explicit(const Common& c, const ExperimentConfig& cfg) {
  return !c.format.empty() || cfg.lines.count("output.format") > 0 ||
         std::any_of(c.sets.begin(), c.sets.end(), [](const std::string& s) { return s.rfind("output.format=", 0) == 0; });
}

int run_verify(const Common& c, const std::string& suite) {
  ExperimentConfig cfg = resolve(c);
  set_threads(c.threads);
  RunManifest manifest = make_manifest(cfg, "verify " + suite);
  SuiteResult r = run_suite(cfg, suite);
  const std::string hash = manifest.config_hash;
  bool csv = format_explicit(c, cfg) && cfg.output.format == "csv";
  if (csv) {
    emit(cfg, to_csv(r.table, hash));
  } else {
    nlohmann::json j = {{"suite", suite},     {"pass", r.pass},
                        {"first_failure", r.first_failure}, {"manifest_hash", hash},
                        {"report", r.report}, {"checks", to_json(r.table, hash)["rows"]}};
    emit(cfg, j.dump(2) + "\n");
  }
  emit_manifest(cfg, manifest);
  if (!r.pass) {
    std::cerr << "FAIL " << suite << ": " << r.first_failure << "\n";
    return kExitViolation;
  }
  return kExitPass;
}

int run_le(const Common& c) {
  ExperimentConfig cfg = resolve(c);
  set_threads(c.threads);
  RunManifest manifest = make_manifest(cfg, "le");
  emit(cfg, render(cmd_le(cfg), cfg, manifest.config_hash));
  emit_manifest(cfg, manifest);
  return kExitPass;
}

int run_h3scan(const Common& c) {
  ExperimentConfig cfg = resolve(c);
  set_threads(c.threads);
  RunManifest manifest = make_manifest(cfg, "h3scan");
  emit(cfg, render(cmd_h3scan(cfg), cfg, manifest.config_hash));
  emit_manifest(cfg, manifest);
  return kExitPass;
}

int run_report(const Common& c) {
  ExperimentConfig cfg = resolve(c);
  set_threads(c.threads);
  RunManifest manifest = make_manifest(cfg, "report");
  ReportOutput rep = cmd_report(cfg);
  if (format_explicit(c, cfg) && cfg.output.format == "csv") {
    emit(cfg, to_csv(rep.histogram, manifest.config_hash));
  } else {
    nlohmann::json j = rep.summary;
    j["manifest_hash"] = manifest.config_hash;
    emit(cfg, j.dump(2) + "\n");
  }
  emit_manifest(cfg, manifest);
  return kExitPass;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "YAML configuration file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Override noise.seed");
  app->add_option("--threads", c.threads, "OpenMP thread count (0 keeps the runtime default)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--out", c.out, "Output path (stdout when omitted)");
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--set", c.sets, "Override a config key: --set chain.n_steps=1000000");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random perturbations of the standard map: Lyapunov exponents and verification suites"};
  app.require_subcommand(1);
  app.set_version_flag("--version", randlyap::tool_version());

  Common common;
  std::string suite;
  auto* le = app.add_subcommand("le", "Lyapunov exponent sweep over sweep.L x sweep.epsilon (CSV)");
  auto* verify = app.add_subcommand("verify", "Run a verification suite (JSON report)");
  verify->add_option("suite", suite, "Suite name")->required()->check(CLI::IsMember(randlyap::suite_names()));
  auto* h3 = app.add_subcommand("h3scan", "Scan the offset a for the non-recurrence condition (CSV)");
  auto* density = app.add_subcommand("density", "Alias for 'verify density'");
  auto* report = app.add_subcommand("report", "Structure constants and empirical projective measure");
  for (auto* sub : {le, verify, h3, density, report}) add_common(sub, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (le->parsed()) return run_le(common);
    if (verify->parsed()) return run_verify(common, suite);
    if (density->parsed()) return run_verify(common, "density");
    if (h3->parsed()) return run_h3scan(common);
    if (report->parsed()) return run_report(common);
  } catch (const randlyap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
