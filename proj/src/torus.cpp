#include "randlyap/torus.hpp"

#include <cmath>
#include <numbers>

#include "randlyap/errors.hpp"

namespace randlyap {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSingularCos = 1e-14;
}  // namespace

double Jacobian2::max_abs() const {
  return std::max(std::max(std::abs(a), std::abs(b)), std::max(std::abs(c), std::abs(d)));
}

double Jacobian2::sigma1() const {
  double e = 0.5 * (a + d), f = 0.5 * (a - d), g = 0.5 * (c + b), h = 0.5 * (c - b);
  return std::hypot(e, h) + std::hypot(f, g);
}

Jacobian2 operator*(const Jacobian2& l, const Jacobian2& r) {
  return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d, l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
}

double wrap01(double v) {
  double r = v - std::floor(v);
  return r >= 1.0 ? 0.0 : r;
}

double wrap_centered(double v) {
  double r = v - std::floor(v + 0.5);
  return r >= 0.5 ? r - 1.0 : r;
}

double fold_pi(double theta) {
  double t = std::fmod(theta, kPi);
  if (t < 0.0) t += kPi;
  return t >= kPi ? 0.0 : t;
}

double angle_of(Vec2 v) { return fold_pi(std::atan2(v.y, v.x)); }

TorusPoint apply_F(const CircleMap& map, TorusPoint p) { return {wrap01(map.eval(p.x) - p.y), p.x}; }

TorusPoint apply_F_inverse(const CircleMap& map, TorusPoint p) { return {p.y, wrap01(map.eval(p.y) - p.x)}; }

TorusPoint apply_F_omega(const CircleMap& map, TorusPoint p, double omega) {
  double s = wrap01(p.x + omega);
  return {wrap01(map.eval(s) - p.y), s};
}

TorusPoint apply_S_prime(TorusPoint p, double w, double wp) { return {wrap01(p.x + w), wrap01(p.y + wp)}; }

Jacobian2 jacobian_F_omega(const CircleMap& map, TorusPoint p, double omega) {
  return {map.deriv1(wrap01(p.x + omega)), -1.0, 1.0, 0.0};
}

Jacobian2 jacobian_F_inverse(const CircleMap& map, TorusPoint p) { return {0.0, 1.0, -1.0, map.deriv1(p.y)}; }

ProjPoint apply_Fhat(const CircleMap& map, ProjPoint q, double omega) {
  double s = wrap01(q.pos.x + omega);
  auto [f, df] = map.eval_and_deriv1(s);
  double c = std::cos(q.theta), sn = std::sin(q.theta);
  return {{wrap01(f - q.pos.y), s}, angle_of({df * c - sn, c})};
}

double log_growth(const CircleMap& map, ProjPoint q, double omega) {
  double df = map.deriv1(wrap01(q.pos.x + omega));
  double c = std::cos(q.theta), s = std::sin(q.theta);
  return std::log(std::hypot(df * c - s, c));
}

ThreeStep three_step_H(const CircleMap& map, ProjPoint q0, NoiseTriple w) {
  ThreeStep out;
  out.intermediates[0] = apply_Fhat(map, q0, w.w1);
  out.intermediates[1] = apply_Fhat(map, out.intermediates[0], w.w2);
  out.q3 = apply_Fhat(map, out.intermediates[1], w.w3);
  return out;
}

double det_dH_formula(const CircleMap& map, ProjPoint q0, NoiseTriple w) {
  if (std::abs(std::cos(q0.theta)) < kSingularCos) throw PreconditionError("theta0 must differ from pi/2");
  ThreeStep h = three_step_H(map, q0, w);
  double t1 = h.intermediates[0].theta, t2 = h.intermediates[1].theta, t3 = h.q3.theta;
  double c1 = std::cos(t1), c2 = std::cos(t2);
  if (std::abs(c1) < kSingularCos || std::abs(c2) < kSingularCos)
    throw SingularInput("tan(theta_i) undefined along the three-step orbit");
  double tan1 = std::sin(t1) / c1, tan2 = std::sin(t2) / c2, s3 = std::sin(t3);
  return s3 * s3 * tan2 * tan2 * tan1 * tan1 * map.deriv2(wrap01(q0.pos.x + w.w1));
}

double rho(const CircleMap& map, ProjPoint q) {
  double s = std::sin(q.theta);
  if (s == 0.0) throw SingularInput("rho undefined at theta = 0");
  double cot = std::cos(q.theta) / s;
  double y = q.pos.y, x = q.pos.x;
  double bracket = map.deriv1(wrap01(map.eval(y) - x)) * (map.deriv1(y) - cot) - 1.0;
  return s * s * bracket * bracket;
}

std::vector<NoiseTriple> enumerate_preimages(const CircleMap& map, ProjPoint q3, ProjPoint q0, double eps,
                                             std::size_t subintervals) {
  std::vector<NoiseTriple> out;
  double x3 = q3.pos.x, y3 = q3.pos.y;
  double s3 = std::sin(q3.theta);
  double c0 = std::cos(q0.theta);
  if (s3 == 0.0 || std::abs(c0) < kSingularCos) return out;

  double y2 = wrap01(map.eval(y3) - x3);
  double k2 = map.deriv1(y3) - std::cos(q3.theta) / s3;
  if (k2 == 0.0) return out;
  double k1 = map.deriv1(y2) - 1.0 / k2;
  if (k1 == 0.0) return out;
  double target = std::sin(q0.theta) / c0 + 1.0 / k1;

  double x0 = q0.pos.x, y0 = q0.pos.y;
  auto g = [&](double w) { return map.deriv1(wrap01(x0 + w)) - target; };

  std::vector<double> roots;
  double h = 2.0 * eps / static_cast<double>(subintervals);
  double lo = -eps, glo = g(lo);
  if (glo == 0.0) roots.push_back(lo);
  for (std::size_t i = 1; i <= subintervals; ++i) {
    double hi = i == subintervals ? eps : -eps + h * static_cast<double>(i);
    double ghi = g(hi);
    if (ghi == 0.0) {
      roots.push_back(hi);
    } else if (glo != 0.0 && (glo < 0.0) != (ghi < 0.0)) {
      double a = lo, b = hi, ga = glo;
      for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        double gm = g(m);
        if (gm == 0.0) {
          a = b = m;
          break;
        }
        if ((gm < 0.0) == (ga < 0.0)) {
          a = m;
          ga = gm;
        } else {
          b = m;
        }
      }
      roots.push_back(std::abs(g(a)) <= std::abs(g(b)) ? a : b);
    }
    lo = hi;
    glo = ghi;
  }

  double tol = eps * (1.0 + 1e-12);
  for (double w1 : roots) {
    double y1 = wrap01(x0 + w1);
    double x1 = map.eval(y1) - y0;
    double w2 = wrap_centered(y2 - x1);
    double x2 = map.eval(y2) - y1;
    double w3 = wrap_centered(y3 - x2);
    if (std::abs(w2) <= tol && std::abs(w3) <= tol) out.push_back({w1, w2, w3});
  }
  return out;
}

}  // namespace randlyap
