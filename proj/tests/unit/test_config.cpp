#include <doctest.h>

#include <string>

#include "randlyap/config.hpp"
#include "randlyap/errors.hpp"
#include "randlyap/experiments.hpp"

using namespace randlyap;

TEST_CASE("defaults validate") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  CHECK(cfg.p() == doctest::Approx(0.125));
  CHECK(cfg.region_params().p == doctest::Approx(0.125));
}

TEST_CASE("nested and dotted keys load") {
  auto cfg = load_config_string(
      "map:\n"
      "  L: 20\n"
      "  a: 0.25\n"
      "noise.epsilon: 0.001\n"
      "regions:\n"
      "  version: thm1\n"
      "  p: 0.2\n"
      "sweep:\n"
      "  L: [5, 10]\n");
  CHECK(cfg.map.L == 20.0);
  CHECK(cfg.map.a == 0.25);
  CHECK(cfg.noise.epsilon == 0.001);
  CHECK(cfg.regions.version == GNVersion::thm1);
  CHECK(cfg.p() == 0.2);
  CHECK(cfg.sweep.L == std::vector<double>{5, 10});
  CHECK(cfg.lines.at("map.a") == 3);
  CHECK(cfg.build_map().eval(0.25) == doctest::Approx(20.25));
}

TEST_CASE("unknown keys are rejected with their line") {
  try {
    load_config_string("map:\n  L: 10\n  bogus: 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "map.bogus");
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(load_config_string("map: [1, 2"), ConfigError);
  CHECK_THROWS_AS(load_config_string("map:\n  L: ten\n"), ConfigError);
}

TEST_CASE("range validation names the key and line") {
  auto expect_bad = [](const std::string& yaml, const std::string& key) {
    auto cfg = load_config_string(yaml);
    try {
      validate(cfg);
      FAIL("expected ConfigError for " << key);
    } catch (const ConfigError& e) {
      CHECK(e.key() == key);
      CHECK(e.line() >= 1);
    }
  };
  expect_bad("noise:\n  epsilon: 0.6\n", "noise.epsilon");
  expect_bad("noise:\n  epsilon: 0\n", "noise.epsilon");
  expect_bad("map:\n  L: 1\n", "map.L");
  expect_bad("regions:\n  beta: 1.0\n", "regions.beta");
  expect_bad("chain:\n  method: magic\n", "chain.method");
  expect_bad("output:\n  format: xml\n", "output.format");
}

TEST_CASE("overrides follow file values") {
  auto cfg = load_config_string("map:\n  L: 20\n");
  apply_override(cfg, "map.L=40");
  apply_override(cfg, "sweep.L=[5, 10, 20]");
  CHECK(cfg.map.L == 40.0);
  CHECK(cfg.sweep.L.size() == 3);
  CHECK_THROWS_AS(apply_override(cfg, "nokey"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "map.nope=1"), ConfigError);
}

TEST_CASE("config hash is stable and ignores output") {
  ExperimentConfig a, b;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.output.path = "elsewhere.csv";
  b.output.format = "json";
  CHECK(config_hash(a) == config_hash(b));
  b.noise.seed = 2;
  CHECK(config_hash(a) != config_hash(b));
  CHECK_FALSE(canonical_json(a).contains("output"));
}

TEST_CASE("csv quoting and float formatting") {
  Table t{{"name", "value"}, {{std::string("a,b"), 0.1}, {std::string("say \"hi\""), 1e300}}};
  std::string csv = to_csv(t, "abc");
  CHECK(csv ==
        "name,value,manifest_hash\r\n"
        "\"a,b\",0.10000000000000001,abc\r\n"
        "\"say \"\"hi\"\"\",1.0000000000000001e+300,abc\r\n");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  auto j = to_json(t, "abc");
  CHECK(j["manifest_hash"] == "abc");
  CHECK(j["rows"][0]["name"] == "a,b");
}

TEST_CASE("le command: one row per cell, deterministic") {
  ExperimentConfig cfg;
  cfg.sweep.L = {5, 10};
  cfg.sweep.epsilon = {0.01};
  cfg.chain.n_steps = 2000;
  cfg.chain.n_replicas = 2;
  Table a = cmd_le(cfg), b = cmd_le(cfg);
  CHECK(a.rows.size() == 2);
  CHECK(to_csv(a, "h") == to_csv(b, "h"));
  cfg.chain.method = "both";
  CHECK(cmd_le(cfg).rows.size() == 4);
  cfg.sweep.L.clear();
  CHECK_THROWS_AS(cmd_le(cfg), ConfigError);
}

TEST_CASE("h3scan pass fraction is monotone in c") {
  ExperimentConfig cfg;
  cfg.map.L = 50.0;
  cfg.h3scan.n_a = 256;
  Table t = cmd_h3scan(cfg);
  REQUIRE(t.header.back() == "pass_fraction");
  std::vector<std::pair<double, double>> frac;  // (c, fraction)
  for (const auto& row : t.rows) {
    double c = std::get<double>(row[1]);
    double f = std::get<double>(row.back());
    if (frac.empty() || frac.back().first != c) frac.emplace_back(c, f);
  }
  REQUIRE(frac.size() == cfg.h3scan.c.size());
  for (std::size_t i = 1; i < frac.size(); ++i) {
    REQUIRE(frac[i].first < frac[i - 1].first);
    CHECK(frac[i].second >= frac[i - 1].second);
  }
  // Integer L with a = 0 maps C' to 0 mod 1, and 0 - C' lands back on C'.
  bool seen = false;
  for (const auto& row : t.rows)
    if (std::get<double>(row[2]) == 0.0) {
      seen = true;
      CHECK_FALSE(std::get<bool>(row[3]));
      CHECK(std::get<double>(row[4]) == doctest::Approx(0.0).epsilon(1e-9));
    }
  CHECK(seen);
}

TEST_CASE("suite names") {
  const auto& n = suite_names();
  for (const char* s : {"density", "cones", "grammar", "lemma53", "propertyB", "stationarity", "concentration"})
    CHECK(std::find(n.begin(), n.end(), s) != n.end());
}

TEST_CASE("manifest carries the hash and seeds") {
  ExperimentConfig cfg;
  cfg.sweep.L = {5};
  auto m = make_manifest(cfg, "le");
  CHECK(m.config_hash == config_hash(cfg));
  CHECK(m.tool_version == tool_version());
  auto j = to_json(m);
  CHECK(j["config_hash"] == m.config_hash);
  CHECK(j.contains("seeds"));
}
