#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "randlyap/errors.hpp"
#include "randlyap/rng.hpp"
#include "randlyap/torus.hpp"

using namespace randlyap;

namespace {

double torus_gap(TorusPoint a, TorusPoint b) {
  return std::max(std::abs(wrap_centered(a.x - b.x)), std::abs(wrap_centered(a.y - b.y)));
}

// Unwrapped three-step map in long double, written independently of the library.
struct LongH {
  long double L, a;
  long double f(long double x) const { return L * std::sin(2 * std::numbers::pi_v<long double> * x) + a; }
  long double fp(long double x) const {
    const long double tp = 2 * std::numbers::pi_v<long double>;
    return L * tp * std::cos(tp * x);
  }
  std::array<long double, 3> operator()(long double x, long double y, long double th,
                                        const std::array<long double, 3>& w) const {
    for (long double wi : w) {
      long double s = x + wi;
      long double d = fp(s);
      long double vx = d * std::cos(th) - std::sin(th), vy = std::cos(th);
      th = std::atan2(vy, vx);
      x = f(s) - y;
      y = s;
    }
    return {x, y, th};
  }
};

long double wrap_pi(long double d) {
  const long double pi = std::numbers::pi_v<long double>;
  return d - pi * std::round(d / pi);
}

long double det3(const std::array<std::array<long double, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace

TEST_CASE("F and its inverse") {
  CircleMap m(Fourier::sine(), 10.0, 0.3);
  Stream s(7, 0);
  for (int i = 0; i < 1000; ++i) {
    TorusPoint p{s.next_double(), s.next_double()};
    CHECK(torus_gap(apply_F_inverse(m, apply_F(m, p)), p) < 1e-12);
    CHECK(torus_gap(apply_F(m, apply_F_inverse(m, p)), p) < 1e-12);
    double w = s.uniform(-0.01, 0.01);
    TorusPoint shifted{wrap01(p.x + w), p.y};
    CHECK(torus_gap(apply_F_omega(m, p, w), apply_F(m, shifted)) < 1e-12);
  }
}

TEST_CASE("Jacobians match finite differences and are unimodular") {
  CircleMap m(Fourier(0.0, {0.3}, {1.0}), 6.0, 0.1);
  Stream s(8, 0);
  const double h = 1e-6;
  for (int i = 0; i < 200; ++i) {
    TorusPoint p{s.next_double(), s.next_double()};
    double w = s.uniform(-0.01, 0.01);
    Jacobian2 J = jacobian_F_omega(m, p, w);
    CHECK(J.det() == doctest::Approx(1.0).epsilon(1e-14));
    auto col = [&](double dx, double dy) {
      TorusPoint a = apply_F_omega(m, {p.x + dx, p.y + dy}, w);
      TorusPoint b = apply_F_omega(m, {p.x - dx, p.y - dy}, w);
      return Vec2{wrap_centered(a.x - b.x) / (2 * h), wrap_centered(a.y - b.y) / (2 * h)};
    };
    Vec2 cx = col(h, 0), cy = col(0, h);
    CHECK(J.a == doctest::Approx(cx.x).epsilon(1e-6));
    CHECK(J.c == doctest::Approx(cx.y).epsilon(1e-6));
    CHECK(J.b == doctest::Approx(cy.x).epsilon(1e-6));
    CHECK(J.d == doctest::Approx(cy.y).epsilon(1e-6));
    Jacobian2 Ji = jacobian_F_inverse(m, apply_F_omega(m, p, w));
    Jacobian2 I = Ji * J;
    CHECK(std::abs(I.a - 1) + std::abs(I.b) + std::abs(I.c) + std::abs(I.d - 1) < 1e-10);
  }
}

TEST_CASE("projective action") {
  // With f' = 2 the direction pi/4 is fixed and not stretched.
  CircleMap m = standard_map_f(0.5);
  double x = 0.25;  // f'(0.25) = 0.5 * 2 pi cos(pi/2) + 2 = 2
  CHECK(m.deriv1(x) == doctest::Approx(2.0));
  ProjPoint q{{x, 0.4}, std::numbers::pi / 4};
  ProjPoint r = apply_Fhat(m, q, 0.0);
  CHECK(r.theta == doctest::Approx(std::numbers::pi / 4));
  CHECK(log_growth(m, q, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  ProjPoint v{{x, 0.4}, std::numbers::pi / 2};
  CHECK(apply_Fhat(m, v, 0.0).theta == doctest::Approx(0.0));
}

TEST_CASE("angle helpers fold into [0, pi)") {
  CHECK(fold_pi(-0.1) == doctest::Approx(std::numbers::pi - 0.1));
  CHECK(fold_pi(std::numbers::pi) == 0.0);
  CHECK(angle_of({-1.0, -1.0}) == doctest::Approx(std::numbers::pi / 4));
  CHECK(wrap01(-0.25) == doctest::Approx(0.75));
  CHECK(wrap_centered(0.75) == doctest::Approx(-0.25));
}

TEST_CASE("det dH formula against a long-double direct difference oracle") {
  LongH H{3.0L, 0.2L};
  CircleMap m(Fourier::sine(), 3.0, 0.2);
  Stream s(9, 0);
  int checked = 0;
  for (int i = 0; i < 400 && checked < 100; ++i) {
    ProjPoint q0{{s.next_double(), s.next_double()}, s.uniform(0.2, 1.3)};
    NoiseTriple w{s.uniform(-0.05, 0.05), s.uniform(-0.05, 0.05), s.uniform(-0.05, 0.05)};
    double formula;
    try {
      formula = det_dH_formula(m, q0, w);
    } catch (const SingularInput&) {
      continue;
    }
    if (std::abs(formula) < 1e-3) continue;
    // Five-point stencil; the Jacobian entries are large, so the step must be small.
    const long double h = 1e-7L;
    const long double off[4] = {2 * h, h, -h, -2 * h};
    std::array<std::array<long double, 3>, 3> J{};
    std::array<long double, 3> w0{w.w1, w.w2, w.w3};
    auto c = H(q0.pos.x, q0.pos.y, q0.theta, w0);
    for (int j = 0; j < 3; ++j) {
      std::array<std::array<long double, 3>, 4> v;
      for (int k = 0; k < 4; ++k) {
        auto wp = w0;
        wp[j] += off[k];
        v[k] = H(q0.pos.x, q0.pos.y, q0.theta, wp);
      }
      for (int r = 0; r < 3; ++r) {
        long double d[4];
        for (int k = 0; k < 4; ++k) d[k] = r == 2 ? wrap_pi(v[k][r] - c[r]) : v[k][r] - c[r];
        J[r][j] = (-d[0] + 8 * d[1] - 8 * d[2] + d[3]) / (12 * h);
      }
    }
    double oracle = static_cast<double>(det3(J));
    CHECK(formula == doctest::Approx(oracle).epsilon(1e-5));
    ++checked;
  }
  CHECK(checked >= 50);
}

TEST_CASE("density weight identity |det dH| = |f''(x0 + w1)| rho(q3)") {
  CircleMap m(Fourier::sine(), 10.0, 0.0);
  Stream s(10, 0);
  for (int i = 0; i < 500; ++i) {
    ProjPoint q0{{s.next_double(), s.next_double()}, s.uniform(0.1, 1.4)};
    NoiseTriple w{s.uniform(-0.01, 0.01), s.uniform(-0.01, 0.01), s.uniform(-0.01, 0.01)};
    double d;
    try {
      d = det_dH_formula(m, q0, w);
    } catch (const SingularInput&) {
      continue;
    }
    ThreeStep st = three_step_H(m, q0, w);
    double weight = std::abs(m.deriv2(wrap01(q0.pos.x + w.w1))) * rho(m, st.q3);
    CHECK(std::abs(d) == doctest::Approx(weight).epsilon(1e-8));
  }
}

TEST_CASE("det dH error paths") {
  CircleMap m(Fourier::sine(), 10.0, 0.0);
  CHECK_THROWS_AS(det_dH_formula(m, {{0.1, 0.2}, std::numbers::pi / 2}, {}), PreconditionError);
  CHECK_THROWS_AS(rho(m, {{0.1, 0.2}, 0.0}), SingularInput);
}

TEST_CASE("preimage enumeration recovers the generating triple") {
  // Recovery is limited by the conditioning of theta3 in w1, which worsens quickly with L.
  CircleMap m(Fourier::sine(), 1.0, 0.0);
  Stream s(11, 0);
  const double eps = 0.01;
  int recovered = 0, total = 0;
  for (int i = 0; i < 500; ++i) {
    ProjPoint q0{{s.next_double(), s.next_double()}, s.uniform(0.1, 1.4)};
    NoiseTriple w{s.uniform(-eps, eps), s.uniform(-eps, eps), s.uniform(-eps, eps)};
    ProjPoint q3 = three_step_H(m, q0, w).q3;
    auto pre = enumerate_preimages(m, q3, q0, eps);
    ++total;
    CHECK(pre.size() <= 2);  // M2 for the sine map
    for (const auto& t : pre) {
      ProjPoint back = three_step_H(m, q0, t).q3;
      CHECK(torus_gap(back.pos, q3.pos) < 1e-9);
      if (std::abs(t.w1 - w.w1) < 1e-6 && std::abs(t.w2 - w.w2) < 1e-6 && std::abs(t.w3 - w.w3) < 1e-6) {
        ++recovered;
        break;
      }
    }
  }
  CHECK(recovered == total);
}
