#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include <json.hpp>

namespace randlyap {

/// Trigonometric polynomial on the unit circle,
///   g(x) = a0 + sum_k ( cos_coef[k-1] cos(2 pi k x) + sin_coef[k-1] sin(2 pi k x) ).
class Fourier {
 public:
  Fourier() = default;
  Fourier(double constant, std::vector<double> cos_coef, std::vector<double> sin_coef);

  static Fourier sine();
  /// sin(2 pi x) + amplitude * sin(2 pi k x)
  static Fourier sine_with_harmonic(int k, double amplitude);
  static Fourier zero() { return Fourier{}; }

  double constant() const { return constant_; }
  const std::vector<double>& cos_coef() const { return cos_; }
  const std::vector<double>& sin_coef() const { return sin_; }
  std::size_t degree() const { return std::max(cos_.size(), sin_.size()); }
  bool is_zero() const;

  /// Derivative of the given order (0..3) at x.
  double derivative(int order, double x) const;
  /// Value and first derivative in one pass.
  std::pair<double, double> value_and_deriv(double x) const;

 private:
  double constant_ = 0.0;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

enum class MapKind { pure_psi, shifted };

/// Circle map f = L psi + a, optionally plus a C^3 perturbation
/// (a Fourier part and a linear term slope * x with integer slope so that
/// f mod 1 is well defined on the circle).
class CircleMap {
 public:
  CircleMap(Fourier psi, double L, double a);
  static CircleMap shifted(Fourier psi, double L, double a, Fourier perturbation, double slope);

  double eval(double x) const;
  double deriv1(double x) const;
  double deriv2(double x) const;
  double deriv3(double x) const;
  double deriv(int order, double x) const;
  std::pair<double, double> eval_and_deriv1(double x) const;

  /// Unperturbed reference f0 = L psi + a.
  double reference_eval(double x) const;
  /// sup over [0,1] of |(f - f0)^(k)|, k = 0..3, on a uniform grid of n points.
  double perturbation_c3_norm(std::size_t n = 1 << 14) const;
  /// sup |f^(order)| on a uniform grid.
  double sup_abs(int order, std::size_t n = 1 << 14) const;

  CircleMap with_offset(double a) const;
  CircleMap with_scale(double L) const;

  const Fourier& psi() const { return psi_; }
  const Fourier& perturbation() const { return pert_; }
  double slope() const { return slope_; }
  double L() const { return L_; }
  double a() const { return a_; }
  MapKind kind() const { return kind_; }

 private:
  Fourier psi_;
  double L_;
  double a_;
  MapKind kind_ = MapKind::pure_psi;
  Fourier pert_;
  double slope_ = 0.0;
};

/// The standard map in torus coordinates: f(x) = L sin(2 pi x) + 2x.
CircleMap standard_map_f(double L);

/// Critical sets of f' and f'' with the structure constants derived from them.
/// The K constants are computed for the normalized derivative f'/L (psi' for
/// pure maps) by grid search; the *_tight values are the raw grid optima and
/// k1/k2/k0 are clamped below by 1.
struct CriticalData {
  std::vector<double> cprime;
  std::vector<double> cdoubleprime;
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  double k1 = 1.0;
  double k1_tight = 0.0;
  double k2 = 1.0;
  double k2_tight = 0.0;
  double k0 = 1.0;
  double chat = 0.5;
  std::size_t grid_n = 0;
};

void to_json(nlohmann::json& j, const CriticalData& c);
void from_json(const nlohmann::json& j, CriticalData& c);

inline constexpr std::size_t kDefaultRootGrid = std::size_t{1} << 16;

/// Sign-change bracketing on a uniform grid followed by bisection.
CriticalData find_critical_sets(const CircleMap& map, std::size_t grid_n = kDefaultRootGrid);

/// Distance on the circle R/Z.
double circle_distance(double a, double b);
/// Distance from x to the nearest point of a (sorted) set on the circle.
double distance_to_set(double x, const std::vector<double>& set);

struct H12Report {
  bool h1 = false;
  bool h2 = false;
  double min_abs_f2_on_cprime = 0.0;
  double min_abs_f3_on_cdoubleprime = 0.0;
};

H12Report check_h1_h2(const CircleMap& map, const CriticalData& crit);

struct H3Report {
  bool holds = false;
  std::pair<double, double> worst_pair{0.0, 0.0};
  double worst_distance = 0.0;
};

/// Checks that f(x) - x' mod 1 avoids the open c-neighborhood of C' for all
/// ordered pairs of critical points.
H3Report check_h3(const CircleMap& map, const CriticalData& crit, double c);

/// Perturbation constant K0: sup-norm ratios of f', f'', f''' to L,
/// nondegeneracy of f'' on C' and f''' on C'', and the minimal root gaps.
double compute_k0(const CircleMap& map, const CriticalData& crit, std::size_t grid_n);

}  // namespace randlyap
