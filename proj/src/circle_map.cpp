#include "randlyap/circle_map.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "randlyap/errors.hpp"

namespace randlyap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// sin/cos of 2*pi*m*x with the argument reduced to one period first.
inline void harmonic(int m, double x, double& s, double& c) {
  double t = static_cast<double>(m) * x;
  t -= std::floor(t);
  s = std::sin(kTwoPi * t);
  c = std::cos(kTwoPi * t);
}

std::vector<double> periodic_roots(const std::function<double(double)>& fn, std::size_t n) {
  std::vector<double> v(n + 1);
  for (std::size_t i = 0; i < n; ++i) v[i] = fn(static_cast<double>(i) / static_cast<double>(n));
  v[n] = v[0];

  std::vector<double> roots;
  for (std::size_t i = 0; i < n; ++i) {
    double lo = static_cast<double>(i) / static_cast<double>(n);
    if (v[i] == 0.0) {
      roots.push_back(lo);
      continue;
    }
    if (v[i + 1] == 0.0 || (v[i] < 0.0) == (v[i + 1] < 0.0)) continue;
    double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    double flo = v[i];
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      double fm = fn(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    double r = std::abs(fn(lo)) <= std::abs(fn(hi)) ? lo : hi;
    if (r >= 1.0) r -= 1.0;
    roots.push_back(r);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

double min_circular_gap(const std::vector<double>& s) {
  if (s.size() < 2) return 1.0;
  double g = 1.0 - (s.back() - s.front());
  for (std::size_t i = 1; i < s.size(); ++i) g = std::min(g, s[i] - s[i - 1]);
  return g;
}

// sup over a uniform grid of d(x, roots) / |g(x)|, together with the limits
// 1/|g'(r)| at the roots themselves.
double tight_constant(const std::function<double(double)>& g, const std::function<double(double)>& dg,
                      const std::vector<double>& roots, std::size_t n) {
  double best = 0.0;
  for (double r : roots) {
    double s = std::abs(dg(r));
    if (s > 0.0) best = std::max(best, 1.0 / s);
    else best = std::numeric_limits<double>::infinity();
  }
  for (std::size_t i = 0; i < n; ++i) {
    double x = static_cast<double>(i) / static_cast<double>(n);
    double d = distance_to_set(x, roots);
    if (d < 1e-9) continue;
    double gx = std::abs(g(x));
    best = gx > 0.0 ? std::max(best, d / gx) : std::numeric_limits<double>::infinity();
  }
  return best;
}

}  // namespace

Fourier::Fourier(double constant, std::vector<double> cos_coef, std::vector<double> sin_coef)
    : constant_(constant), cos_(std::move(cos_coef)), sin_(std::move(sin_coef)) {}

Fourier Fourier::sine() { return Fourier(0.0, {}, {1.0}); }

Fourier Fourier::sine_with_harmonic(int k, double amplitude) {
  if (k < 1) throw PreconditionError("harmonic index must be >= 1");
  std::vector<double> s(static_cast<std::size_t>(k), 0.0);
  s[0] += 1.0;
  s[static_cast<std::size_t>(k) - 1] += amplitude;
  return Fourier(0.0, {}, std::move(s));
}

bool Fourier::is_zero() const {
  if (constant_ != 0.0) return false;
  for (double c : cos_)
    if (c != 0.0) return false;
  for (double s : sin_)
    if (s != 0.0) return false;
  return true;
}

double Fourier::derivative(int order, double x) const {
  double acc = order == 0 ? constant_ : 0.0;
  std::size_t n = degree();
  for (std::size_t k = 0; k < n; ++k) {
    double a = k < cos_.size() ? cos_[k] : 0.0;
    double b = k < sin_.size() ? sin_[k] : 0.0;
    if (a == 0.0 && b == 0.0) continue;
    int m = static_cast<int>(k) + 1;
    double w = kTwoPi * m;
    double s, c;
    harmonic(m, x, s, c);
    switch (order) {
      case 0: acc += a * c + b * s; break;
      case 1: acc += w * (-a * s + b * c); break;
      case 2: acc += -w * w * (a * c + b * s); break;
      case 3: acc += w * w * w * (a * s - b * c); break;
      default: throw PreconditionError("derivative order must be in 0..3");
    }
  }
  return acc;
}

std::pair<double, double> Fourier::value_and_deriv(double x) const {
  double v = constant_, d = 0.0;
  std::size_t n = degree();
  for (std::size_t k = 0; k < n; ++k) {
    double a = k < cos_.size() ? cos_[k] : 0.0;
    double b = k < sin_.size() ? sin_[k] : 0.0;
    if (a == 0.0 && b == 0.0) continue;
    int m = static_cast<int>(k) + 1;
    double s, c;
    harmonic(m, x, s, c);
    v += a * c + b * s;
    d += kTwoPi * m * (-a * s + b * c);
  }
  return {v, d};
}

CircleMap::CircleMap(Fourier psi, double L, double a) : psi_(std::move(psi)), L_(L), a_(a) {
  if (!(L > 0.0)) throw PreconditionError("L must be positive");
}

CircleMap CircleMap::shifted(Fourier psi, double L, double a, Fourier perturbation, double slope) {
  CircleMap m(std::move(psi), L, a);
  m.kind_ = MapKind::shifted;
  m.pert_ = std::move(perturbation);
  m.slope_ = slope;
  return m;
}

double CircleMap::eval(double x) const {
  double v = L_ * psi_.derivative(0, x) + a_;
  if (kind_ == MapKind::shifted) v += pert_.derivative(0, x) + slope_ * x;
  return v;
}

double CircleMap::deriv(int order, double x) const {
  if (order == 0) return eval(x);
  double v = L_ * psi_.derivative(order, x);
  if (kind_ == MapKind::shifted) {
    v += pert_.derivative(order, x);
    if (order == 1) v += slope_;
  }
  return v;
}

double CircleMap::deriv1(double x) const { return deriv(1, x); }
double CircleMap::deriv2(double x) const { return deriv(2, x); }
double CircleMap::deriv3(double x) const { return deriv(3, x); }

std::pair<double, double> CircleMap::eval_and_deriv1(double x) const {
  auto [p, dp] = psi_.value_and_deriv(x);
  double v = L_ * p + a_, d = L_ * dp;
  if (kind_ == MapKind::shifted) {
    auto [q, dq] = pert_.value_and_deriv(x);
    v += q + slope_ * x;
    d += dq + slope_;
  }
  return {v, d};
}

double CircleMap::reference_eval(double x) const { return L_ * psi_.derivative(0, x) + a_; }

double CircleMap::perturbation_c3_norm(std::size_t n) const {
  if (kind_ != MapKind::shifted) return 0.0;
  double best = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    double x = static_cast<double>(i) / static_cast<double>(n);
    best = std::max(best, std::abs(pert_.derivative(0, x) + slope_ * x));
    best = std::max(best, std::abs(pert_.derivative(1, x) + slope_));
    best = std::max(best, std::abs(pert_.derivative(2, x)));
    best = std::max(best, std::abs(pert_.derivative(3, x)));
  }
  return best;
}

double CircleMap::sup_abs(int order, std::size_t n) const {
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    best = std::max(best, std::abs(deriv(order, static_cast<double>(i) / static_cast<double>(n))));
  return best;
}

CircleMap CircleMap::with_offset(double a) const {
  CircleMap m = *this;
  m.a_ = a;
  return m;
}

CircleMap CircleMap::with_scale(double L) const {
  if (!(L > 0.0)) throw PreconditionError("L must be positive");
  CircleMap m = *this;
  m.L_ = L;
  return m;
}

CircleMap standard_map_f(double L) {
  return CircleMap::shifted(Fourier::sine(), L, 0.0, Fourier::zero(), 2.0);
}

double circle_distance(double a, double b) {
  double d = std::abs(a - b);
  d -= std::floor(d);
  return std::min(d, 1.0 - d);
}

double distance_to_set(double x, const std::vector<double>& set) {
  if (set.empty()) return std::numeric_limits<double>::infinity();
  double t = x - std::floor(x);
  auto it = std::lower_bound(set.begin(), set.end(), t);
  double hi = it == set.end() ? set.front() : *it;
  double lo = it == set.begin() ? set.back() : *(it - 1);
  return std::min(circle_distance(t, hi), circle_distance(t, lo));
}

CriticalData find_critical_sets(const CircleMap& map, std::size_t grid_n) {
  if (grid_n < 1000) throw PreconditionError("root grid must have at least 1000 points");
  CriticalData out;
  out.grid_n = grid_n;

  auto f1 = [&](double x) { return map.deriv1(x); };
  auto f2 = [&](double x) { return map.deriv2(x); };
  auto f3 = [&](double x) { return map.deriv3(x); };

  out.cprime = periodic_roots(f1, grid_n);
  if (out.cprime.empty()) throw NoCriticalPoints("f' has no zeros on the circle");
  if (out.cprime.size() == grid_n) throw NoCriticalPoints("f' vanishes identically");
  out.cdoubleprime = periodic_roots(f2, grid_n);

  double h = 2.0 / static_cast<double>(grid_n);
  if (min_circular_gap(out.cprime) < h) throw GridTooCoarse("roots of f' closer than two grid cells");
  if (out.cdoubleprime.size() > 1 && min_circular_gap(out.cdoubleprime) < h)
    throw GridTooCoarse("roots of f'' closer than two grid cells");

  out.m1 = out.cprime.size();
  out.m2 = out.cdoubleprime.size();

  double L = map.L();
  auto g1 = [&](double x) { return f1(x) / L; };
  auto g2 = [&](double x) { return f2(x) / L; };
  auto g3 = [&](double x) { return f3(x) / L; };
  // Grid optimum can miss the true supremum by O(h^2); pad it slightly.
  out.k1_tight = tight_constant(g1, g2, out.cprime, grid_n) * (1.0 + 1e-6);
  out.k1 = std::max(1.0, out.k1_tight);
  if (!out.cdoubleprime.empty()) {
    out.k2_tight = tight_constant(g2, g3, out.cdoubleprime, grid_n) * (1.0 + 1e-6);
    out.k2 = std::max(1.0, out.k2_tight);
  }
  out.chat = 0.5 * min_circular_gap(out.cprime);
  out.k0 = compute_k0(map, out, grid_n);
  return out;
}

H12Report check_h1_h2(const CircleMap& map, const CriticalData& crit) {
  H12Report r;
  r.h1 = crit.m1 > 0 && crit.m2 > 0;
  double m2v = std::numeric_limits<double>::infinity();
  for (double x : crit.cprime) m2v = std::min(m2v, std::abs(map.deriv2(x)));
  double m3v = std::numeric_limits<double>::infinity();
  for (double z : crit.cdoubleprime) m3v = std::min(m3v, std::abs(map.deriv3(z)));
  r.min_abs_f2_on_cprime = crit.cprime.empty() ? 0.0 : m2v;
  r.min_abs_f3_on_cdoubleprime = crit.cdoubleprime.empty() ? 0.0 : m3v;
  double thr = 1e-8 * map.L();
  r.h2 = r.h1 && r.min_abs_f2_on_cprime > thr && r.min_abs_f3_on_cdoubleprime > thr;
  return r;
}

H3Report check_h3(const CircleMap& map, const CriticalData& crit, double c) {
  if (!(c > 0.0) || c >= crit.chat) throw InvalidC("c must lie in (0, chat)");
  H3Report r;
  r.worst_distance = std::numeric_limits<double>::infinity();
  for (double xh : crit.cprime) {
    double fx = map.eval(xh);
    for (double xp : crit.cprime) {
      double d = distance_to_set(fx - xp, crit.cprime);
      if (d < r.worst_distance) {
        r.worst_distance = d;
        r.worst_pair = {xh, xp};
      }
    }
  }
  r.holds = r.worst_distance >= c;
  return r;
}

double compute_k0(const CircleMap& map, const CriticalData& crit, std::size_t grid_n) {
  double L = map.L();
  double k = 1.0;
  for (int order = 1; order <= 3; ++order) k = std::max(k, map.sup_abs(order, grid_n) / L);
  for (double x : crit.cprime) {
    double v = std::abs(map.deriv2(x));
    k = std::max(k, v > 0.0 ? L / v : std::numeric_limits<double>::infinity());
  }
  for (double z : crit.cdoubleprime) {
    double v = std::abs(map.deriv3(z));
    k = std::max(k, v > 0.0 ? L / v : std::numeric_limits<double>::infinity());
  }
  if (crit.cprime.size() > 1) k = std::max(k, 1.0 / min_circular_gap(crit.cprime));
  if (crit.cdoubleprime.size() > 1) k = std::max(k, 1.0 / min_circular_gap(crit.cdoubleprime));
  return k;
}

void to_json(nlohmann::json& j, const CriticalData& c) {
  j = nlohmann::json{{"cprime", c.cprime}, {"cdoubleprime", c.cdoubleprime},
                     {"m1", c.m1},         {"m2", c.m2},
                     {"k1", c.k1},         {"k1_tight", c.k1_tight},
                     {"k2", c.k2},         {"k2_tight", c.k2_tight},
                     {"k0", c.k0},         {"chat", c.chat},
                     {"grid_n", c.grid_n}};
}

void from_json(const nlohmann::json& j, CriticalData& c) {
  j.at("cprime").get_to(c.cprime);
  j.at("cdoubleprime").get_to(c.cdoubleprime);
  j.at("m1").get_to(c.m1);
  j.at("m2").get_to(c.m2);
  j.at("k1").get_to(c.k1);
  j.at("k1_tight").get_to(c.k1_tight);
  j.at("k2").get_to(c.k2);
  j.at("k2_tight").get_to(c.k2_tight);
  j.at("k0").get_to(c.k0);
  j.at("chat").get_to(c.chat);
  j.at("grid_n").get_to(c.grid_n);
}

}  // namespace randlyap
