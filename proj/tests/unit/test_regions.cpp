#include <doctest.h>

#include <cmath>
#include <numbers>

#include "randlyap/errors.hpp"
#include "randlyap/regions.hpp"
#include "randlyap/rng.hpp"

using namespace randlyap;

namespace {

struct Setup {
  CircleMap map;
  CriticalData crit;
  RegionParams params;
};

Setup make(double L, double a, double c, double beta = 0.5, double p = 0.125) {
  CircleMap m(Fourier::sine(), L, a);
  return {m, find_critical_sets(m), RegionParams{c, p, beta, GNVersion::thm2}};
}

// Brute-force image of the cone |slope| <= s under M, sampled on `n` rays.
struct RayScan {
  bool sign_change = false;
  double max_slope = 0.0;
  double min_growth = std::numeric_limits<double>::infinity();
};

RayScan scan(const Jacobian2& M, double s, int n = 20001) {
  RayScan r;
  int sign = 0;
  for (int k = 0; k < n; ++k) {
    double t = -s + 2.0 * s * k / (n - 1);
    double nrm = std::hypot(1.0, t);
    Vec2 v = M.apply({1.0 / nrm, t / nrm});
    int sg = v.x > 0 ? 1 : (v.x < 0 ? -1 : 0);
    if (sign == 0) sign = sg;
    if (sg != sign) r.sign_change = true;
    r.max_slope = std::max(r.max_slope, std::abs(v.y / v.x));
    r.min_growth = std::min(r.min_growth, std::hypot(v.x, v.y));
  }
  return r;
}

}  // namespace

TEST_CASE("classification uses open neighborhoods") {
  Setup s = make(100.0, 0.0, 0.05);
  CHECK(classify(s.map, s.crit, s.params, 0.26) == Letter::B);
  CHECK(classify(s.map, s.crit, s.params, 0.28) == Letter::I);
  CHECK(classify(s.map, s.crit, s.params, 0.5) == Letter::G);
  double rb = b_radius(s.params, 100.0);
  CHECK(rb == doctest::Approx(std::sqrt(0.05 / 100.0)));
  CHECK(classify(s.map, s.crit, s.params, 0.75 + rb * (1 - 1e-9)) == Letter::B);
  CHECK(classify(s.map, s.crit, s.params, 0.75 + rb * (1 + 1e-9)) == Letter::I);
  CHECK(classify(s.map, s.crit, s.params, 0.25 - 0.05 * (1 + 1e-9)) == Letter::G);
  CHECK(classify(s.map, s.crit, s.params, 1.26) == Letter::B);
}

TEST_CASE("invalid radii") {
  Setup s = make(100.0, 0.0, 0.01);
  CHECK_THROWS_AS(require_valid_c(s.params, s.crit, 100.0), InvalidC);  // sqrt(c/L) = c
  s.params.c = 0.3;
  CHECK_THROWS_AS(classify(s.map, s.crit, s.params, 0.1), InvalidC);
  s.params.c = 0.0;
  CHECK_THROWS_AS(classify(s.map, s.crit, s.params, 0.1), InvalidC);
  Setup t = make(1000.0, 0.25, 0.01);
  CHECK_THROWS_AS(require_region_invariants(t.params, t.crit, 1000.0), PreconditionError);  // c > p / 32
  t.params.c = 0.003;
  CHECK_NOTHROW(require_region_invariants(t.params, t.crit, 1000.0));
}

TEST_CASE("symbol words read right to left") {
  SymbolWord w = SymbolWord::parse("GBI G");
  REQUIRE(w.size() == 4);
  CHECK(w.letters[0] == Letter::G);
  CHECK(w.letters[1] == Letter::I);
  CHECK(w.letters[2] == Letter::B);
  CHECK(w.str() == "GBIG");
  CHECK(w.count(Letter::G) == 2);
  CHECK_THROWS_AS(SymbolWord::parse("GXG"), PreconditionError);
}

TEST_CASE("grammar examples") {
  auto ok = validate_grammar(SymbolWord::parse("GBIBG"));
  CHECK(ok.valid);
  REQUIRE(ok.decomposition);
  REQUIRE(ok.decomposition->blocks.size() == 1);
  CHECK(ok.decomposition->blocks[0].str() == "BIB");
  CHECK(ok.decomposition->g_runs == std::vector<std::size_t>{1, 1});

  CHECK_FALSE(validate_grammar(SymbolWord::parse("GIBIG")).valid);
  CHECK_FALSE(validate_grammar(SymbolWord::parse("BGGGG")).valid);
  CHECK_FALSE(validate_grammar(SymbolWord::parse("GGGGB")).valid);
  CHECK(validate_grammar(SymbolWord::parse("GGGG")).valid);

  auto multi = validate_grammar(SymbolWord::parse("GBBGGIIBGIG"));
  CHECK(multi.valid);
  REQUIRE(multi.decomposition);
  CHECK(multi.decomposition->blocks.size() == 3);
  CHECK(multi.decomposition->blocks[0].str() == "I");
  CHECK(multi.decomposition->blocks[2].str() == "BB");
}

TEST_CASE("admissible blocks") {
  for (const char* b : {"B", "BB", "BIB", "BIIIB", "IIB", "I", "III", "BII"}) CHECK(admissible_block(b));
  for (const char* b : {"", "BBB", "IBI", "BIBI", "BBI", "IBB", "BGB"}) CHECK_FALSE(admissible_block(b));
}

TEST_CASE("words follow the orbit") {
  Setup s = make(1000.0, 0.25, 0.005, 0.5, 0.16);
  Stream st(1, 0);
  std::vector<double> w(12);
  for (auto& x : w) x = st.uniform(-1e-4, 1e-4);
  TorusPoint q{0.3, 0.6};
  SymbolWord word = extract_word(s.map, s.crit, s.params, w, q);
  REQUIRE(word.size() == w.size());
  TorusPoint p = q;
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(word.letters[i] == classify(s.map, s.crit, s.params, p.x + w[i]));
    p = apply_F_omega(s.map, p, w[i]);
  }
}

TEST_CASE("G_N membership failures") {
  Setup s = make(100.0, 0.25, 0.05);
  std::vector<double> zeros(7, 0.0);
  auto r = in_G_N(s.map, s.crit, s.params, zeros, {0.25, 0.1}, 6);
  CHECK_FALSE(r.member);
  CHECK(r.failed == GNCondition::a_i);
  CHECK(r.index == 0);
  CHECK(to_string(r.failed) == "a_i");

  // Outside the single-step margin at step 0 but within the edge distance p / (16 m1).
  RegionParams wide = s.params;
  wide.p = 0.9;
  auto b = in_G_N(s.map, s.crit, wide, zeros, {0.26, 0.1}, 6);
  CHECK_FALSE(b.member);
  CHECK(b.failed == GNCondition::b_first);

  CHECK_THROWS_AS(in_G_N(s.map, s.crit, s.params, std::vector<double>(6, 0.0), {0.1, 0.1}, 6), PreconditionError);
  RegionParams p1 = s.params;
  p1.version = GNVersion::thm1;
  CHECK_NOTHROW(in_G_N(s.map, s.crit, p1, std::vector<double>(6, 0.0), {0.1, 0.1}, 6));
  CHECK_THROWS_AS(in_G_N(s.map, s.crit, s.params, zeros, {0.1, 0.1}, 0), PreconditionError);
}

TEST_CASE("G_N sampling returns members") {
  Setup s = make(100.0, 0.25, 0.05);
  Stream st(3, 0);
  for (int i = 0; i < 50; ++i) {
    auto g = sample_G_N(s.map, s.crit, s.params, 1e-3, 6, st);
    REQUIRE(g);
    CHECK(in_G_N(s.map, s.crit, s.params, g->omegas, g->q0, 6).member);
    for (double w : g->omegas) CHECK(std::abs(w) <= 1e-3);
  }
  double frac = gn_complement_fraction(s.map, s.crit, s.params, 1e-3, 6, 20000, 1);
  CHECK(frac > 0.0);
  CHECK(frac < 1.0);
  CHECK(gn_complement_fraction(s.map, s.crit, s.params, 1e-3, 6, 20000, 1, Exec::serial) == frac);
}

TEST_CASE("grammar holds on conditioned orbits") {
  Setup s = make(1000.0, 0.25, 0.005, 0.5, 0.16);
  auto g = check_grammar(s.map, s.crit, s.params, 1e-4, 6, 20000, 7);
  CHECK(g.tested == 20000);
  CHECK(g.violations == 0);
  CHECK(g.nontrivial > 0);
}

TEST_CASE("two-step recurrence lemma") {
  Setup s = make(1000.0, 0.25, 0.005, 0.5, 0.16);
  auto r = check_lemma_5_3(s.map, s.crit, s.params, 0.2, 1e-4, 20000, 5);
  CHECK(r.tested == 20000);
  CHECK(r.violations == 0);
  CHECK_THROWS_AS(check_lemma_5_3(s.map, s.crit, s.params, 0.2, 2.0 / 1000.0, 10, 5), PreconditionError);
  Setup bad = make(1000.0, 0.0, 0.005, 0.5, 0.16);
  CHECK_THROWS_AS(check_lemma_5_3(bad.map, bad.crit, bad.params, 0.2, 1e-4, 10, 5), H3Failed);
}

TEST_CASE("cone map example") {
  // f'(0) = 10 for psi = sin(2 pi x) / (2 pi) with L = 10.
  CircleMap m(Fourier(0.0, {}, {1.0 / (2.0 * std::numbers::pi)}), 10.0, 0.0);
  Cone out = cone_map(m, 0.0, Cone{0.2});
  CHECK(out.s == doctest::Approx(5.0 / 49.0));
  CHECK_NOTHROW(cone_map(m, 0.0, Cone{0.2}, Cone{0.2}));
  CHECK_THROWS_AS(cone_map(m, 0.0, Cone{0.2}, Cone{0.1}), ConeNotMapped);
  CHECK_THROWS_AS(cone_map(m, 0.25, Cone{0.2}), ConeNotMapped);  // f'(1/4) = 0
}

TEST_CASE("canonical cones") {
  auto cc = canonical_cones(10000.0, 0.5);
  CHECK(cc.narrow.s == doctest::Approx(std::pow(10000.0, -1.0 + 0.125)));
  CHECK(cc.unit.s == 1.0);
  CHECK(cc.wide.s == doctest::Approx(std::pow(10000.0, 1.0 - 0.125)));
}

TEST_CASE("cone containment and growth against ray scans") {
  Stream st(4, 0);
  int contained = 0, not_contained = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Jacobian2 M{st.uniform(-20, 20), st.uniform(-3, 3), st.uniform(-3, 3), st.uniform(-3, 3)};
    double sin = std::exp(st.uniform(-3, 1)), sout = std::exp(st.uniform(-3, 1));
    RayScan r = scan(M, sin);
    double g = cone_min_growth(M, Cone{sin});
    CHECK(g <= r.min_growth * (1 + 1e-12));
    CHECK(g >= r.min_growth * (1 - 1e-4));
    if (r.sign_change) {
      CHECK_FALSE(cone_contains(M, Cone{sin}, Cone{sout}));
      continue;
    }
    if (r.max_slope < sout * (1 - 1e-6)) {
      CHECK(cone_contains(M, Cone{sin}, Cone{sout}));
      ++contained;
    } else if (r.max_slope > sout * (1 + 1e-6)) {
      CHECK_FALSE(cone_contains(M, Cone{sin}, Cone{sout}));
      ++not_contained;
    }
  }
  CHECK(contained > 10);
  CHECK(not_contained > 10);
}

TEST_CASE("cone containment is robust when the image cone is extremely thin") {
  // A B-I-B product at L = 1e4: both boundary rays land on the same slope to within rounding.
  Jacobian2 M;
  for (double fp : {111.256, 3091.29, 353.373}) M = Jacobian2{fp, -1.0, 1.0, 0.0} * M;
  auto cc = canonical_cones(10000.0, 0.5);
  RayScan r = scan(M, cc.narrow.s);
  REQUIRE_FALSE(r.sign_change);
  REQUIRE(r.max_slope < cc.wide.s);
  CHECK(cone_contains(M, cc.narrow, cc.wide));
  CHECK(cone_contains(M.transposed(), cc.narrow, cc.wide));
  // The same product fails once the input cone holds the preimage of the vertical.
  CHECK_FALSE(cone_contains(M, Cone{2.0 * std::abs(M.a / M.b)}, cc.wide));
}

TEST_CASE("cone images compose and growth is supermultiplicative") {
  Setup s = make(10000.0, 0.0, 0.01);
  Stream st(5, 0);
  for (int trial = 0; trial < 500; ++trial) {
    double x1 = st.next_double(), x2 = st.next_double();
    Cone c0{std::exp(st.uniform(-2, 1))};
    Cone c1, c2;
    try {
      c1 = cone_map(s.map, x1, c0);
      c2 = cone_map(s.map, x2, c1);
    } catch (const ConeNotMapped&) {
      continue;
    }
    Jacobian2 J1{s.map.deriv1(x1), -1, 1, 0}, J2{s.map.deriv1(x2), -1, 1, 0};
    CHECK(cone_contains(J1, c0, Cone{c1.s * (1 + 1e-9)}));
    CHECK(cone_contains(J2 * J1, c0, Cone{c2.s * (1 + 1e-9)}));
    double g = cone_min_growth(J2 * J1, c0);
    CHECK(g >= cone_min_growth(J1, c0) * cone_min_growth(J2, c1) * (1 - 1e-9));
  }
}

TEST_CASE("word cases") {
  CHECK(case_word(WordCase::a) == "I");
  CHECK(case_word(WordCase::f) == "BIB");
  CHECK(parse_word_case("c") == WordCase::c);
  CHECK_FALSE(parse_word_case("g"));
  CHECK(to_string(WordCase::d) == "d");
}

TEST_CASE("word lemmas hold at large L") {
  Setup s = make(10000.0, 0.0, 0.01);
  for (WordCase wc : {WordCase::a, WordCase::b, WordCase::c, WordCase::d, WordCase::e, WordCase::f}) {
    auto r = verify_word_lemmas(s.map, s.crit, s.params, wc, 2000, 11);
    INFO("case " << to_string(wc));
    CHECK_FALSE(r.unrealizable);
    CHECK(r.tested == 2000);
    CHECK(r.containment_violations == 0);
    CHECK(r.growth_violations == 0);
    CHECK(r.adjoint_violations == 0);
    CHECK(r.min_growth_observed >= r.growth_bound);
  }
  auto serial = verify_word_lemmas(s.map, s.crit, s.params, WordCase::f, 500, 3, Exec::serial);
  auto par = verify_word_lemmas(s.map, s.crit, s.params, WordCase::f, 500, 3, Exec::parallel);
  CHECK(serial.min_growth_observed == par.min_growth_observed);
  CHECK(serial.subcase_I + serial.subcase_II == 500);
}

TEST_CASE("property B on sampled blocks") {
  Setup s = make(100.0, 0.25, 0.05);
  Stream st(6, 0);
  for (int i = 0; i < 200; ++i) {
    auto g = sample_G_N(s.map, s.crit, s.params, 1e-3, 6, st);
    REQUIRE(g);
    auto r = verify_property_B(s.map, s.crit, s.params, g->omegas, g->q0, 6);
    CHECK(r.log_sigma1_bound == doctest::Approx(0.5 / 15.0 * 6 * std::log(100.0)));
    CHECK(r.sigma1_ok);
  }
  std::vector<double> zeros(7, 0.0);
  CHECK_THROWS_AS(verify_property_B(s.map, s.crit, s.params, zeros, {0.25, 0.1}, 6), NotInGN);
}
