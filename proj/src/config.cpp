#include "randlyap/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "randlyap/errors.hpp"

#ifndef RANDLYAP_VERSION
#define RANDLYAP_VERSION "dev"
#endif

namespace randlyap {

namespace {

using Setter = std::function<void(ExperimentConfig&, const YAML::Node&, const std::string&, int)>;

int line_of(const YAML::Node& n) {
  auto m = n.Mark();
  return m.line >= 0 ? m.line + 1 : 0;
}

double get_double(const YAML::Node& n, const std::string& key, int line) {
  if (!n.IsScalar()) throw ConfigError(key, line, "expected a number");
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError(key, line, "expected a number, got '" + n.Scalar() + "'");
  }
}

std::uint64_t get_u64(const YAML::Node& n, const std::string& key, int line) {
  if (!n.IsScalar()) throw ConfigError(key, line, "expected a non-negative integer");
  const std::string& s = n.Scalar();
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError(key, line, "expected a non-negative integer, got '" + s + "'");
  return v;
}

bool get_bool(const YAML::Node& n, const std::string& key, int line) {
  try {
    return n.as<bool>();
  } catch (const YAML::Exception&) {
    throw ConfigError(key, line, "expected true or false");
  }
}

std::string get_string(const YAML::Node& n, const std::string& key, int line) {
  if (!n.IsScalar()) throw ConfigError(key, line, "expected a string");
  return n.Scalar();
}

std::vector<double> get_list(const YAML::Node& n, const std::string& key, int line) {
  std::vector<double> out;
  if (n.IsNull()) return out;
  if (n.IsScalar()) return {get_double(n, key, line)};
  if (!n.IsSequence()) throw ConfigError(key, line, "expected a list of numbers");
  for (const auto& e : n) out.push_back(get_double(e, key, line));
  return out;
}

template <class T, class Get>
Setter field(T ExperimentConfig::*group, auto member, Get get) {
  return [=](ExperimentConfig& c, const YAML::Node& n, const std::string& key, int line) {
    (c.*group).*member = get(n, key, line);
  };
}

auto as_double = [](const YAML::Node& n, const std::string& k, int l) { return get_double(n, k, l); };
auto as_size = [](const YAML::Node& n, const std::string& k, int l) { return static_cast<std::size_t>(get_u64(n, k, l)); };
auto as_u64 = [](const YAML::Node& n, const std::string& k, int l) { return get_u64(n, k, l); };
auto as_bool = [](const YAML::Node& n, const std::string& k, int l) { return get_bool(n, k, l); };
auto as_string = [](const YAML::Node& n, const std::string& k, int l) { return get_string(n, k, l); };
auto as_list = [](const YAML::Node& n, const std::string& k, int l) { return get_list(n, k, l); };

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"map.psi", field(&ExperimentConfig::map, &MapConfig::psi, as_string)},
      {"map.psi_cos", field(&ExperimentConfig::map, &MapConfig::psi_cos, as_list)},
      {"map.psi_sin", field(&ExperimentConfig::map, &MapConfig::psi_sin, as_list)},
      {"map.L", field(&ExperimentConfig::map, &MapConfig::L, as_double)},
      {"map.a", field(&ExperimentConfig::map, &MapConfig::a, as_double)},
      {"map.standard_map", field(&ExperimentConfig::map, &MapConfig::standard_map, as_bool)},
      {"noise.epsilon", field(&ExperimentConfig::noise, &NoiseConfig::epsilon, as_double)},
      {"noise.seed", field(&ExperimentConfig::noise, &NoiseConfig::seed, as_u64)},
      {"chain.burn_in", field(&ExperimentConfig::chain, &ChainConfig::burn_in, as_size)},
      {"chain.n_steps", field(&ExperimentConfig::chain, &ChainConfig::n_steps, as_size)},
      {"chain.n_replicas", field(&ExperimentConfig::chain, &ChainConfig::n_replicas, as_size)},
      {"chain.renorm_every", field(&ExperimentConfig::chain, &ChainConfig::renorm_every, as_size)},
      {"chain.method", field(&ExperimentConfig::chain, &ChainConfig::method, as_string)},
      {"chain.grid", field(&ExperimentConfig::chain, &ChainConfig::grid, as_size)},
      {"chain.n_samples", field(&ExperimentConfig::chain, &ChainConfig::n_samples, as_size)},
      {"regions.c", field(&ExperimentConfig::regions, &RegionsConfig::c, as_double)},
      {"regions.c0", field(&ExperimentConfig::regions, &RegionsConfig::c0, as_double)},
      {"regions.p",
       [](ExperimentConfig& c, const YAML::Node& n, const std::string& k, int l) {
         if (n.IsNull())
           c.regions.p.reset();
         else
           c.regions.p = get_double(n, k, l);
       }},
      {"regions.beta", field(&ExperimentConfig::regions, &RegionsConfig::beta, as_double)},
      {"regions.version",
       [](ExperimentConfig& c, const YAML::Node& n, const std::string& k, int l) {
         std::string v = get_string(n, k, l);
         if (v == "thm1")
           c.regions.version = GNVersion::thm1;
         else if (v == "thm2")
           c.regions.version = GNVersion::thm2;
         else
           throw ConfigError(k, l, "expected thm1 or thm2, got '" + v + "'");
       }},
      {"regions.N", field(&ExperimentConfig::regions, &RegionsConfig::N, as_size)},
      {"regions.alpha", field(&ExperimentConfig::regions, &RegionsConfig::alpha, as_double)},
      {"sweep.L", field(&ExperimentConfig::sweep, &SweepConfig::L, as_list)},
      {"sweep.epsilon", field(&ExperimentConfig::sweep, &SweepConfig::epsilon, as_list)},
      {"h3scan.c", field(&ExperimentConfig::h3scan, &H3ScanConfig::c, as_list)},
      {"h3scan.n_a", field(&ExperimentConfig::h3scan, &H3ScanConfig::n_a, as_size)},
      {"output.path", field(&ExperimentConfig::output, &OutputConfig::path, as_string)},
      {"output.format", field(&ExperimentConfig::output, &OutputConfig::format, as_string)},
  };
  return table;
}

const Setter* find_setter(const std::string& key) {
  for (const auto& [k, s] : setters())
    if (k == key) return &s;
  return nullptr;
}

void assign(ExperimentConfig& cfg, const std::string& key, const YAML::Node& value, int line) {
  const Setter* s = find_setter(key);
  if (!s) throw ConfigError(key, line, "unknown key");
  (*s)(cfg, value, key, line);
  cfg.lines[key] = line;
}

void walk(ExperimentConfig& cfg, const YAML::Node& node, const std::string& prefix) {
  for (const auto& kv : node) {
    std::string name = kv.first.as<std::string>();
    std::string key = prefix.empty() ? name : prefix + "." + name;
    int line = line_of(kv.first);
    if (kv.second.IsMap()) {
      if (find_setter(key)) throw ConfigError(key, line, "expected a value, got a mapping");
      walk(cfg, kv.second, key);
    } else {
      assign(cfg, key, kv.second, line);
    }
  }
}

int line_for(const ExperimentConfig& cfg, const std::string& key) {
  auto it = cfg.lines.find(key);
  return it == cfg.lines.end() ? 0 : it->second;
}

}  // namespace

RegionParams ExperimentConfig::region_params() const {
  return RegionParams{regions.c, p(), regions.beta, regions.version};
}

CircleMap ExperimentConfig::build_map() const { return build_map(map.L); }

CircleMap ExperimentConfig::build_map(double L) const {
  if (map.standard_map) return standard_map_f(L);
  Fourier psi = map.psi == "fourier" ? Fourier(0.0, map.psi_cos, map.psi_sin) : Fourier::sine();
  return CircleMap(std::move(psi), L, map.a);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, s] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

ExperimentConfig load_config_string(const std::string& yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.line + 1, e.msg);
  }
  ExperimentConfig cfg;
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw ConfigError("", line_of(root), "top level must be a mapping");
  walk(cfg, root, "");
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config_string(ss.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, 0, "override must look like key=value");
  std::string key = assignment.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError(key, 0, "cannot parse override value: " + e.msg);
  }
  assign(cfg, key, value, 0);
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [&](const std::string& key, const std::string& what) {
    throw ConfigError(key, line_for(cfg, key), what);
  };
  const auto& m = cfg.map;
  if (m.psi != "sin" && m.psi != "fourier") fail("map.psi", "expected sin or fourier, got '" + m.psi + "'");
  if (m.psi == "fourier" && m.psi_cos.empty() && m.psi_sin.empty())
    fail("map.psi_sin", "fourier psi needs at least one coefficient");
  if (!(m.L > 1.0)) fail("map.L", "L must be > 1");
  if (!std::isfinite(m.a)) fail("map.a", "a must be finite");
  if (!(cfg.noise.epsilon > 0.0 && cfg.noise.epsilon <= 0.5)) fail("noise.epsilon", "epsilon must lie in (0, 1/2]");

  const auto& ch = cfg.chain;
  if (ch.n_steps == 0) fail("chain.n_steps", "must be >= 1");
  if (ch.n_replicas == 0) fail("chain.n_replicas", "must be >= 1");
  if (ch.renorm_every == 0) fail("chain.renorm_every", "must be >= 1");
  if (ch.grid == 0) fail("chain.grid", "must be >= 1");
  if (ch.n_samples == 0) fail("chain.n_samples", "must be >= 1");
  if (ch.method != "norm" && ch.method != "furstenberg" && ch.method != "inverse" && ch.method != "both" &&
      ch.method != "all")
    fail("chain.method", "expected norm, furstenberg, inverse, both or all");

  const auto& r = cfg.regions;
  if (!(r.c > 0.0 && r.c < 0.5)) fail("regions.c", "c must lie in (0, 1/2)");
  if (!(r.c0 > 0.0 && r.c0 < 0.5)) fail("regions.c0", "c0 must lie in (0, 1/2)");
  if (!(r.beta > 0.0 && r.beta < 1.0)) fail("regions.beta", "beta must lie in (0, 1)");
  if (!(r.alpha > 0.0 && r.alpha < 1.0)) fail("regions.alpha", "alpha must lie in (0, 1)");
  if (r.p && !(*r.p > 0.0 && *r.p < 1.0)) fail("regions.p", "p must lie in (0, 1)");
  if (r.N == 0) fail("regions.N", "must be >= 1");

  for (double L : cfg.sweep.L)
    if (!(L > 1.0)) fail("sweep.L", "every L must be > 1");
  for (double e : cfg.sweep.epsilon)
    if (!(e > 0.0 && e <= 0.5)) fail("sweep.epsilon", "every epsilon must lie in (0, 1/2]");
  if (cfg.h3scan.n_a == 0) fail("h3scan.n_a", "must be >= 1");
  for (double c : cfg.h3scan.c)
    if (!(c > 0.0 && c < 0.5)) fail("h3scan.c", "every c must lie in (0, 1/2)");
  if (cfg.output.format != "csv" && cfg.output.format != "json")
    fail("output.format", "expected csv or json, got '" + cfg.output.format + "'");
}

nlohmann::json canonical_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["map"] = {{"psi", cfg.map.psi},       {"psi_cos", cfg.map.psi_cos}, {"psi_sin", cfg.map.psi_sin},
              {"L", cfg.map.L},           {"a", cfg.map.a},             {"standard_map", cfg.map.standard_map}};
  j["noise"] = {{"epsilon", cfg.noise.epsilon}, {"seed", cfg.noise.seed}};
  j["chain"] = {{"burn_in", cfg.chain.burn_in},   {"n_steps", cfg.chain.n_steps},
                {"n_replicas", cfg.chain.n_replicas}, {"renorm_every", cfg.chain.renorm_every},
                {"method", cfg.chain.method},     {"grid", cfg.chain.grid},
                {"n_samples", cfg.chain.n_samples}};
  j["regions"] = {{"c", cfg.regions.c},
                  {"c0", cfg.regions.c0},
                  {"p", cfg.p()},
                  {"beta", cfg.regions.beta},
                  {"version", cfg.regions.version == GNVersion::thm1 ? "thm1" : "thm2"},
                  {"N", cfg.regions.N},
                  {"alpha", cfg.regions.alpha}};
  j["sweep"] = {{"L", cfg.sweep.L}, {"epsilon", cfg.sweep.epsilon}};
  j["h3scan"] = {{"c", cfg.h3scan.c}, {"n_a", cfg.h3scan.n_a}};
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::string text = canonical_json(cfg).dump() + "\n" + tool_version();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string tool_version() { return RANDLYAP_VERSION; }

}  // namespace randlyap
