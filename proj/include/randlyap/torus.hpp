#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "randlyap/circle_map.hpp"

namespace randlyap {

struct TorusPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Point of the projective bundle; theta in [0, pi).
struct ProjPoint {
  TorusPoint pos;
  double theta = 0.0;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Row-major 2x2 matrix [[a, b], [c, d]].
struct Jacobian2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  static Jacobian2 identity() { return {}; }
  double det() const { return a * d - b * c; }
  Jacobian2 transposed() const { return {a, c, b, d}; }
  Vec2 apply(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  double max_abs() const;
  /// Largest singular value.
  double sigma1() const;
};

Jacobian2 operator*(const Jacobian2& l, const Jacobian2& r);

struct NoiseTriple {
  double w1 = 0.0;
  double w2 = 0.0;
  double w3 = 0.0;
};

/// Reduce to [0, 1); 1.0 produced by rounding is mapped to 0.
double wrap01(double v);
/// Representative of v mod 1 in [-1/2, 1/2).
double wrap_centered(double v);
/// Reduce an angle to [0, pi).
double fold_pi(double theta);
/// Projective angle of a nonzero vector, in [0, pi).
double angle_of(Vec2 v);

TorusPoint apply_F(const CircleMap& map, TorusPoint p);
TorusPoint apply_F_inverse(const CircleMap& map, TorusPoint p);
TorusPoint apply_F_omega(const CircleMap& map, TorusPoint p, double omega);
/// (x + w, y + w') mod 1.
TorusPoint apply_S_prime(TorusPoint p, double w, double wp);

/// Derivative of apply_F_omega in (x, y): [[f'(x + omega), -1], [1, 0]].
Jacobian2 jacobian_F_omega(const CircleMap& map, TorusPoint p, double omega);
/// Derivative of the inverse F^{-1}(x, y) = (y, f(y) - x): [[0, 1], [-1, f'(y)]].
Jacobian2 jacobian_F_inverse(const CircleMap& map, TorusPoint p);

ProjPoint apply_Fhat(const CircleMap& map, ProjPoint q, double omega);
/// log |dF_omega u_theta|.
double log_growth(const CircleMap& map, ProjPoint q, double omega);

struct ThreeStep {
  ProjPoint q3;
  std::array<ProjPoint, 2> intermediates;
};

ThreeStep three_step_H(const CircleMap& map, ProjPoint q0, NoiseTriple w);

/// Closed form sin^2(t3) tan^2(t2) tan^2(t1) f''(x0 + w1).
double det_dH_formula(const CircleMap& map, ProjPoint q0, NoiseTriple w);

/// sin^2(t) [f'(f(y) - x)(f'(y) - cot t) - 1]^2.
double rho(const CircleMap& map, ProjPoint q);

inline constexpr std::size_t kPreimageSubintervals = 1024;

/// All noise triples in [-eps, eps]^3 with H_{q0}(w) = q3.
std::vector<NoiseTriple> enumerate_preimages(const CircleMap& map, ProjPoint q3, ProjPoint q0, double eps,
                                             std::size_t subintervals = kPreimageSubintervals);

inline Vec2 unit(double theta) { return {std::cos(theta), std::sin(theta)}; }

}  // namespace randlyap
