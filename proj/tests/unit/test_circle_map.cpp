#include <doctest.h>

#include <cmath>
#include <numbers>

#include "randlyap/circle_map.hpp"
#include "randlyap/errors.hpp"

using namespace randlyap;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double fd(const CircleMap& m, int order, double x, double h = 1e-5) {
  return (-m.deriv(order, x + 2 * h) + 8 * m.deriv(order, x + h) - 8 * m.deriv(order, x - h) +
          m.deriv(order, x - 2 * h)) /
         (12 * h);
}
}  // namespace

TEST_CASE("derivatives agree with finite differences") {
  Fourier psi(0.1, {0.3, -0.2}, {1.0, 0.05, 0.01});
  CircleMap m(psi, 7.5, 0.3);
  CircleMap sm = standard_map_f(12.0);
  for (double x : {0.0, 0.13, 0.4, 0.77, 0.999}) {
    for (int order = 0; order < 3; ++order) {
      CHECK(m.deriv(order + 1, x) == doctest::Approx(fd(m, order, x)).epsilon(1e-7));
      CHECK(sm.deriv(order + 1, x) == doctest::Approx(fd(sm, order, x)).epsilon(1e-7));
    }
    auto [v, d] = m.eval_and_deriv1(x);
    CHECK(v == doctest::Approx(m.eval(x)));
    CHECK(d == doctest::Approx(m.deriv1(x)));
  }
}

TEST_CASE("sine map evaluates to L sin(2 pi x) + a") {
  CircleMap m(Fourier::sine(), 10.0, 0.25);
  CHECK(m.eval(0.25) == doctest::Approx(10.25));
  CHECK(m.deriv1(0.0) == doctest::Approx(10.0 * kTwoPi));
  CircleMap sm = standard_map_f(3.0);
  CHECK(sm.eval(0.25) == doctest::Approx(3.5));
  CHECK(sm.deriv1(0.5) == doctest::Approx(-3.0 * kTwoPi + 2.0));
}

TEST_CASE("with_offset and with_scale replace one parameter") {
  CircleMap m(Fourier::sine(), 10.0, 0.0);
  CHECK(m.with_offset(0.3).eval(0.1) == doctest::Approx(m.eval(0.1) + 0.3));
  CHECK(m.with_scale(20.0).eval(0.1) == doctest::Approx(2.0 * m.eval(0.1)));
  CHECK_THROWS_AS(m.with_scale(0.0), PreconditionError);
}

TEST_CASE("critical sets of the sine map") {
  CircleMap m(Fourier::sine(), 10.0, 0.0);
  CriticalData c = find_critical_sets(m);
  REQUIRE(c.m1 == 2);
  REQUIRE(c.m2 == 2);
  CHECK(c.cprime[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(c.cprime[1] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(std::abs(c.cdoubleprime[0]) < 1e-12);
  CHECK(c.cdoubleprime[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c.chat == doctest::Approx(0.25));
  CHECK(c.k1 == 1.0);

  // Independent oracle: sup of d(x, C') / |psi'(x)| on a fine grid.
  double sup = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    double x = (i + 0.5) / n;
    double d = distance_to_set(x, {0.25, 0.75});
    sup = std::max(sup, d / std::abs(kTwoPi * std::cos(kTwoPi * x)));
  }
  CHECK(c.k1_tight == doctest::Approx(sup).epsilon(1e-5));
  CHECK(c.k1_tight == doctest::Approx(0.25 / kTwoPi).epsilon(1e-5));
}

TEST_CASE("critical set error paths") {
  CHECK_THROWS_AS(find_critical_sets(CircleMap(Fourier::zero(), 5.0, 0.0)), NoCriticalPoints);
  CHECK_THROWS_AS(find_critical_sets(CircleMap(Fourier::sine(), 5.0, 0.0), 999), PreconditionError);
  CHECK_THROWS_AS(find_critical_sets(CircleMap(Fourier::sine_with_harmonic(600, 1.0), 5.0, 0.0), 1000),
                  GridTooCoarse);
}

TEST_CASE("circle distances") {
  CHECK(circle_distance(0.05, 0.95) == doctest::Approx(0.1));
  CHECK(circle_distance(1.3, 0.2) == doctest::Approx(0.1));
  CHECK(distance_to_set(-0.2, {0.25, 0.75}) == doctest::Approx(0.05));
  CHECK(std::isinf(distance_to_set(0.3, {})));
}

TEST_CASE("H1 and H2") {
  CircleMap m(Fourier::sine(), 10.0, 0.0);
  auto r = check_h1_h2(m, find_critical_sets(m));
  CHECK(r.h1);
  CHECK(r.h2);
  // psi = sin(2 pi x) - sin(6 pi x) / 27 has a degenerate critical point at 1/4.
  Fourier deg(0.0, {}, {1.0, 0.0, -1.0 / 27.0});
  CircleMap md(deg, 10.0, 0.0);
  auto rd = check_h1_h2(md, find_critical_sets(md));
  CHECK_FALSE(rd.h2);
}

TEST_CASE("H3 examples") {
  {
    CircleMap m(Fourier::sine(), 7.25, 0.0);
    auto r = check_h3(m, find_critical_sets(m), 0.2);
    CHECK(r.holds);
    CHECK(r.worst_distance == doctest::Approx(0.25).epsilon(1e-9));
  }
  {
    // f(C') is integral, so f(x') - x'' lands back on C'.
    CircleMap m(Fourier::sine(), 100.0, 0.0);
    auto r = check_h3(m, find_critical_sets(m), 0.01);
    CHECK_FALSE(r.holds);
  }
  {
    CircleMap m(Fourier::sine(), 100.25, 0.0);
    CHECK(check_h3(m, find_critical_sets(m), 0.2).holds);
  }
  CircleMap m(Fourier::sine(), 10.0, 0.0);
  auto c = find_critical_sets(m);
  CHECK_THROWS_AS(check_h3(m, c, 0.25), InvalidC);
  CHECK_THROWS_AS(check_h3(m, c, 0.0), InvalidC);
}

TEST_CASE("H3 agrees with a brute-force oracle over offsets") {
  CircleMap base(Fourier::sine(), 37.0, 0.0);
  for (int k = 0; k < 40; ++k) {
    double a = k / 40.0;
    CircleMap m = base.with_offset(a);
    auto crit = find_critical_sets(m);
    double worst = 1.0;
    for (double x1 : {0.25, 0.75})
      for (double x2 : {0.25, 0.75})
        for (double x3 : {0.25, 0.75}) worst = std::min(worst, circle_distance(m.eval(x1) - x2, x3));
    CHECK(check_h3(m, crit, 0.1).worst_distance == doctest::Approx(worst).epsilon(1e-9));
  }
}

TEST_CASE("critical data json roundtrip") {
  CircleMap m(Fourier(0.0, {0.2}, {1.0}), 10.0, 0.1);
  CriticalData c = find_critical_sets(m);
  nlohmann::json j = c;
  CriticalData back = j.get<CriticalData>();
  CHECK(back.cprime == c.cprime);
  CHECK(back.cdoubleprime == c.cdoubleprime);
  CHECK(back.k0 == c.k0);
  CHECK(back.chat == c.chat);
  CHECK(back.m1 == c.m1);
}
