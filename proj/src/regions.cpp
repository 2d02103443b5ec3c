#include "randlyap/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "randlyap/errors.hpp"
#include "randlyap/lyapunov.hpp"

namespace randlyap {

namespace {

constexpr double kPi = std::numbers::pi;

// Angle representative in (-pi/2, pi/2].
double signed_angle(Vec2 v) {
  double a = angle_of(v);
  return a > 0.5 * kPi ? a - kPi : a;
}

double pick_root(const CriticalData& crit, Stream& s) {
  auto k = static_cast<std::size_t>(s.next_double() * static_cast<double>(crit.cprime.size()));
  return crit.cprime[std::min(k, crit.cprime.size() - 1)];
}

std::vector<double> draw_omegas(std::size_t n, double eps, Stream& s) {
  std::vector<double> w(n);
  for (double& v : w) v = eps * (2.0 * s.next_double() - 1.0);
  return w;
}

}  // namespace

double b_radius(const RegionParams& params, double L) { return std::sqrt(params.c / L); }

void require_valid_c(const RegionParams& params, const CriticalData& crit, double L) {
  if (!(params.c > 0.0) || !(params.c < crit.chat))
    throw InvalidC("c = " + std::to_string(params.c) + " must lie in (0, " + std::to_string(crit.chat) + ")");
  if (!(b_radius(params, L) < params.c))
    throw InvalidC("sqrt(c/L) >= c leaves the I region empty (c = " + std::to_string(params.c) +
                   ", L = " + std::to_string(L) + ")");
}

void require_region_invariants(const RegionParams& params, const CriticalData& crit, double L) {
  require_valid_c(params, crit, L);
  if (!(params.beta > 0.0 && params.beta < 1.0)) throw PreconditionError("beta must lie in (0, 1)");
  double cap = params.p / (16.0 * static_cast<double>(crit.m1));
  if (params.c > cap)
    throw PreconditionError("c = " + std::to_string(params.c) + " exceeds p / (16 M1) = " + std::to_string(cap));
}

Letter classify(const CircleMap& map, const CriticalData& crit, const RegionParams& params, double x_shifted) {
  require_valid_c(params, crit, map.L());
  double d = distance_to_set(x_shifted, crit.cprime);
  if (d < b_radius(params, map.L())) return Letter::B;
  if (d < params.c) return Letter::I;
  return Letter::G;
}

std::string SymbolWord::str() const {
  std::string s(letters.size(), 'G');
  for (std::size_t i = 0; i < letters.size(); ++i) s[letters.size() - 1 - i] = static_cast<char>(letters[i]);
  return s;
}

SymbolWord SymbolWord::parse(std::string_view written) {
  SymbolWord w;
  for (auto it = written.rbegin(); it != written.rend(); ++it) {
    char ch = *it;
    if (ch == ' ' || ch == '\t' || ch == '\n') continue;
    if (ch != 'B' && ch != 'I' && ch != 'G') throw PreconditionError(std::string("bad letter '") + ch + "'");
    w.letters.push_back(static_cast<Letter>(ch));
  }
  return w;
}

std::size_t SymbolWord::count(Letter l) const {
  return static_cast<std::size_t>(std::count(letters.begin(), letters.end(), l));
}

SymbolWord extract_word(const CircleMap& map, const CriticalData& crit, const RegionParams& params,
                        const std::vector<double>& omegas, TorusPoint q0) {
  require_valid_c(params, crit, map.L());
  SymbolWord w;
  w.letters.reserve(omegas.size());
  TorusPoint p = q0;
  for (double om : omegas) {
    w.letters.push_back(classify(map, crit, params, p.x + om));
    p = apply_F_omega(map, p, om);
  }
  return w;
}

bool admissible_block(std::string_view s) {
  if (s.empty() || s.find('G') != std::string_view::npos) return false;
  if (s == "B" || s == "BB") return true;
  if (s.front() == 'B') s.remove_prefix(1);
  if (!s.empty() && s.back() == 'B') s.remove_suffix(1);
  return !s.empty() && s.find_first_not_of('I') == std::string_view::npos;
}

GrammarReport validate_grammar(const SymbolWord& w) {
  GrammarReport r;
  const auto& L = w.letters;
  const std::size_t n = L.size();
  if (n == 0) {
    r.reason = "empty word";
    return r;
  }
  if (L.front() != Letter::G) {
    r.reason = "W_0 is not G";
    return r;
  }
  if (L.back() != Letter::G) {
    r.violation_index = n - 1;
    r.reason = "W_{N-1} is not G";
    return r;
  }
  Decomposition dec;
  std::size_t i = 0;
  while (true) {
    std::size_t g = 0;
    while (i < n && L[i] == Letter::G) ++g, ++i;
    dec.g_runs.push_back(g);
    if (i == n) break;
    std::size_t lo = i;
    while (i < n && L[i] != Letter::G) ++i;
    SymbolWord block;
    block.letters.assign(L.begin() + static_cast<std::ptrdiff_t>(lo), L.begin() + static_cast<std::ptrdiff_t>(i));
    std::string written = block.str();
    if (!admissible_block(written)) {
      r.violation_index = lo;
      r.reason = "inadmissible block " + written;
      return r;
    }
    dec.blocks.push_back(std::move(block));
  }
  r.valid = true;
  r.decomposition = std::move(dec);
  return r;
}

TwoStepReport check_lemma_5_3(const CircleMap& map, const CriticalData& crit, const RegionParams& params, double c0,
                              double eps, std::size_t n_samples, std::uint64_t seed, Exec exec) {
  const double L = map.L();
  if (!(eps > 0.0) || eps >= 1.0 / L) throw PreconditionError("noise amplitude must satisfy 0 < eps < 1/L");
  require_valid_c(params, crit, L);
  H3Report h3 = check_h3(map, crit, c0);
  if (!h3.holds)
    throw H3Failed("non-recurrence fails at c0 = " + std::to_string(c0) + " (worst distance " +
                   std::to_string(h3.worst_distance) + ")");
  const double rb = b_radius(params, L);

  struct Acc {
    TwoStepReport r;
    void merge(const Acc& o) {
      r.violations += o.r.violations;
      r.tested += o.r.tested;
    }
  };
  Acc acc = reduce_indexed(n_samples, exec, Acc{}, [&](Acc& a, std::size_t i) {
    Stream s(seed, i);
    double s0 = pick_root(crit, s) + s.uniform(-params.c, params.c);
    double s1 = pick_root(crit, s) + s.uniform(-rb, rb);
    auto w = draw_omegas(3, eps, s);
    // (x0, y0) is the unique point whose shifted coordinates are s0 and s1.
    TorusPoint p{wrap01(s0 - w[0]), wrap01(map.eval(s0) - s1 + w[1])};
    if (classify(map, crit, params, p.x + w[0]) == Letter::G) return;
    p = apply_F_omega(map, p, w[0]);
    if (classify(map, crit, params, p.x + w[1]) != Letter::B) return;
    p = apply_F_omega(map, p, w[1]);
    ++a.r.tested;
    if (classify(map, crit, params, p.x + w[2]) != Letter::G) ++a.r.violations;
  });
  return acc.r;
}

std::string to_string(GNCondition c) {
  switch (c) {
    case GNCondition::none: return "none";
    case GNCondition::a_i: return "a_i";
    case GNCondition::a_ii: return "a_ii";
    case GNCondition::b_first: return "b_first";
    case GNCondition::b_last: return "b_last";
  }
  return "unknown";
}

GNReport in_G_N(const CircleMap& map, const CriticalData& crit, const RegionParams& params,
                const std::vector<double>& omegas, TorusPoint q0, std::size_t N) {
  if (N == 0) throw PreconditionError("N must be >= 1");
  const bool thm2 = params.version == GNVersion::thm2;
  const std::size_t need = thm2 ? N + 1 : N;
  if (omegas.size() < need)
    throw PreconditionError("noise block holds " + std::to_string(omegas.size()) + " values, need " +
                            std::to_string(need));
  const double L = map.L();
  std::vector<double> d(need);
  TorusPoint p = q0;
  for (std::size_t i = 0; i < need; ++i) {
    d[i] = distance_to_set(p.x + omegas[i], crit.cprime);
    p = apply_F_omega(map, p, omegas[i]);
  }
  GNReport r;
  if (!thm2) {
    const double margin = crit.k1 * std::pow(L, -1.0 + params.beta);
    for (std::size_t i = 0; i < N; ++i)
      if (d[i] < margin) {
        r.failed = GNCondition::a_i;
        r.index = i;
        return r;
      }
    r.member = true;
    return r;
  }
  const double single = crit.k1 * std::pow(L, -2.0 + params.beta);
  const double pair = crit.k1 * crit.k1 * std::pow(L, -2.0 + 0.5 * params.beta);
  for (std::size_t i = 0; i < N; ++i) {
    if (d[i] < single) {
      r.failed = GNCondition::a_i;
      r.index = i;
      return r;
    }
    if (d[i] * d[i + 1] < pair) {
      r.failed = GNCondition::a_ii;
      r.index = i;
      return r;
    }
  }
  const double edge = params.p / (16.0 * static_cast<double>(crit.m1));
  if (d[0] < edge) {
    r.failed = GNCondition::b_first;
    return r;
  }
  if (d[N - 1] < edge) {
    r.failed = GNCondition::b_last;
    r.index = N - 1;
    return r;
  }
  r.member = true;
  return r;
}

std::optional<GNSample> sample_G_N(const CircleMap& map, const CriticalData& crit, const RegionParams& params,
                                   double eps, std::size_t N, Stream& s, std::size_t max_tries) {
  const std::size_t len = params.version == GNVersion::thm2 ? N + 1 : N;
  for (std::size_t t = 1; t <= max_tries; ++t) {
    TorusPoint q{s.next_double(), s.next_double()};
    auto w = draw_omegas(len, eps, s);
    if (in_G_N(map, crit, params, w, q, N).member) return GNSample{q, std::move(w), t};
  }
  return std::nullopt;
}

double gn_complement_fraction(const CircleMap& map, const CriticalData& crit, const RegionParams& params, double eps,
                              std::size_t N, std::size_t n_samples, std::uint64_t seed, Exec exec) {
  if (n_samples == 0) throw PreconditionError("need at least one sample");
  const std::size_t len = params.version == GNVersion::thm2 ? N + 1 : N;
  struct Acc {
    std::size_t out = 0;
    void merge(const Acc& o) { out += o.out; }
  };
  Acc acc = reduce_indexed(n_samples, exec, Acc{}, [&](Acc& a, std::size_t i) {
    Stream s(seed, i);
    TorusPoint q{s.next_double(), s.next_double()};
    auto w = draw_omegas(len, eps, s);
    if (!in_G_N(map, crit, params, w, q, N).member) ++a.out;
  });
  return static_cast<double>(acc.out) / static_cast<double>(n_samples);
}

GrammarCheck check_grammar(const CircleMap& map, const CriticalData& crit, const RegionParams& params, double eps,
                           std::size_t N, std::size_t n_orbits, std::uint64_t seed, Exec exec) {
  require_region_invariants(params, crit, map.L());
  RegionParams p2 = params;
  p2.version = GNVersion::thm2;
  struct Acc {
    GrammarCheck g;
    std::size_t first = std::numeric_limits<std::size_t>::max();
    void merge(const Acc& o) {
      g.tested += o.g.tested;
      g.violations += o.g.violations;
      g.nontrivial += o.g.nontrivial;
      for (const auto& [k, v] : o.g.block_counts) g.block_counts[k] += v;
      if (o.first < first) {
        first = o.first;
        g.first_violation = o.g.first_violation;
      }
    }
  };
  Acc acc = reduce_indexed(
      n_orbits, exec, Acc{},
      [&](Acc& a, std::size_t i) {
        Stream s(seed, i);
        auto smp = sample_G_N(map, crit, p2, eps, N, s);
        if (!smp) return;
        std::vector<double> w(smp->omegas.begin(), smp->omegas.begin() + static_cast<std::ptrdiff_t>(N));
        SymbolWord word = extract_word(map, crit, params, w, smp->q0);
        ++a.g.tested;
        GrammarReport gr = validate_grammar(word);
        if (!gr.valid) {
          ++a.g.violations;
          if (i < a.first) {
            a.first = i;
            a.g.first_violation = word.str();
          }
          return;
        }
        if (!gr.decomposition->blocks.empty()) ++a.g.nontrivial;
        for (const auto& b : gr.decomposition->blocks) ++a.g.block_counts[b.str()];
      },
      256);
  return acc.g;
}

CanonicalCones canonical_cones(double L, double beta) {
  return {Cone{std::pow(L, -1.0 + 0.25 * beta)}, Cone{1.0}, Cone{std::pow(L, 1.0 - 0.25 * beta)}};
}

Cone cone_map(const CircleMap& map, double x_shifted, Cone cone_in, std::optional<Cone> target) {
  double fp = std::abs(map.deriv1(x_shifted));
  if (!(fp > cone_in.s)) throw ConeNotMapped("|f'| <= input slope; the cone image contains the vertical");
  Cone out{1.0 / (fp - cone_in.s)};
  if (target && out.s >= target->s)
    throw ConeNotMapped("image slope " + std::to_string(out.s) + " exceeds target " + std::to_string(target->s));
  return out;
}

bool cone_contains(const Jacobian2& M, Cone in, Cone out, int interior_rays) {
  const double phi = std::atan(in.s);
  const double lim = std::atan(out.s);
  double lo = signed_angle(M.apply(unit(-phi)));
  double hi = signed_angle(M.apply(unit(phi)));
  if (std::abs(lo) > lim || std::abs(hi) > lim) return false;
  // The image arc contains the vertical iff its preimage (-b, a) lies in the input cone.
  if (std::abs(M.a) <= in.s * std::abs(M.b)) return false;
  for (int k = 1; k <= interior_rays; ++k) {
    double t = -phi + 2.0 * phi * k / (interior_rays + 1);
    if (std::abs(signed_angle(M.apply(unit(t)))) > lim) return false;
  }
  return true;
}

double cone_min_growth(const Jacobian2& M, Cone cone) {
  const double phi = std::atan(cone.s);
  auto norm_at = [&](double t) {
    Vec2 v = M.apply(unit(t));
    return std::hypot(v.x, v.y);
  };
  double best = std::min(norm_at(-phi), norm_at(phi));
  // |M u|^2 = A + B cos 2t + C sin 2t; its minimum over a full period.
  double B = 0.5 * ((M.a * M.a + M.c * M.c) - (M.b * M.b + M.d * M.d));
  double C = M.a * M.b + M.c * M.d;
  double t = 0.5 * std::atan2(C, B) + 0.5 * kPi;
  if (t > 0.5 * kPi) t -= kPi;
  if (std::abs(t) <= phi) best = std::min(best, norm_at(t));
  return best;
}

std::string to_string(WordCase c) { return std::string(1, static_cast<char>('a' + static_cast<int>(c))); }

std::optional<WordCase> parse_word_case(std::string_view s) {
  if (s.size() != 1 || s[0] < 'a' || s[0] > 'f') return std::nullopt;
  return static_cast<WordCase>(s[0] - 'a');
}

std::string case_word(WordCase c) {
  switch (c) {
    case WordCase::a: return "I";
    case WordCase::b: return "B";
    case WordCase::c: return "BB";
    case WordCase::d: return "BI";
    case WordCase::e: return "IB";
    case WordCase::f: return "BIB";
  }
  return "";
}

namespace {

struct CaseSpec {
  Cone in, out;
  double bound;
};

CaseSpec case_spec(WordCase wc, const CanonicalCones& cc, double L, double beta, double c, double k1) {
  const double i_gain = 0.5 / k1 * std::sqrt(c * L);
  switch (wc) {
    case WordCase::a: return {cc.unit, cc.unit, i_gain};
    case WordCase::b: return {cc.narrow, cc.wide, 0.5};
    case WordCase::c: return {cc.narrow, cc.wide, std::pow(L, beta / 3.0)};
    case WordCase::d:
      return {cc.unit, cc.wide, std::max(std::min(i_gain, std::pow(L, beta / 3.0)), std::pow(L, beta / 5.0))};
    case WordCase::e: return {cc.narrow, cc.unit, std::pow(L, beta / 3.0)};
    case WordCase::f: return {cc.narrow, cc.wide, std::pow(L, beta / 5.0)};
  }
  return {cc.unit, cc.unit, 0.0};
}

}  // namespace

WordLemmaReport verify_word_lemmas(const CircleMap& map, const CriticalData& crit, const RegionParams& params,
                                   WordCase word_case, std::size_t n_samples, std::uint64_t seed, Exec exec,
                                   std::size_t max_tries) {
  const double L = map.L();
  require_valid_c(params, crit, L);
  if (!(params.beta > 0.0 && params.beta < 1.0)) throw PreconditionError("beta must lie in (0, 1)");
  if (n_samples == 0) throw PreconditionError("need at least one sample");

  const SymbolWord word = SymbolWord::parse(case_word(word_case));
  const std::size_t len = word.size();
  const CanonicalCones cc = canonical_cones(L, params.beta);
  const CaseSpec spec = case_spec(word_case, cc, L, params.beta, params.c, crit.k1);
  const double n_i = static_cast<double>(word.count(Letter::I));
  const double prop_bound = 0.5 * std::pow(L, params.beta / 5.0 * n_i);
  const double rb = b_radius(params, L);
  const double single = crit.k1 * std::pow(L, -2.0 + params.beta);
  const double pair = crit.k1 * crit.k1 * std::pow(L, -2.0 + 0.5 * params.beta);
  const std::size_t per_sample = std::max<std::size_t>(1000, max_tries / n_samples);

  WordLemmaReport rep;
  rep.word_case = word_case;
  rep.growth_bound = spec.bound;
  rep.prop_bound = prop_bound;
  if (word.count(Letter::B) > 0 && single >= rb) {
    rep.unrealizable = true;
    return rep;
  }

  struct Acc {
    WordLemmaReport r;
    double min_growth = std::numeric_limits<double>::infinity();
    void merge(const Acc& o) {
      r.tested += o.r.tested;
      r.attempts += o.r.attempts;
      r.containment_violations += o.r.containment_violations;
      r.growth_violations += o.r.growth_violations;
      r.prop_violations += o.r.prop_violations;
      r.adjoint_violations += o.r.adjoint_violations;
      r.subcase_I += o.r.subcase_I;
      r.subcase_II += o.r.subcase_II;
      r.unrealizable = r.unrealizable || o.r.unrealizable;
      min_growth = std::min(min_growth, o.min_growth);
    }
  };

  Acc acc = reduce_indexed(
      n_samples, exec, Acc{},
      [&](Acc& a, std::size_t i) {
        Stream s(seed, i);
        std::vector<double> d(len), x(len);
        bool ok = false;
        for (std::size_t t = 0; t < per_sample && !ok; ++t) {
          ++a.r.attempts;
          for (std::size_t k = 0; k < len; ++k) {
            d[k] = word.letters[k] == Letter::B ? s.uniform(single, rb) : s.uniform(std::max(rb, single), params.c);
            double side = s.next_double() < 0.5 ? -1.0 : 1.0;
            x[k] = pick_root(crit, s) + side * d[k];
          }
          ok = true;
          for (std::size_t k = 0; k + 1 < len; ++k)
            if (d[k] * d[k + 1] < pair) ok = false;
        }
        if (!ok) {
          a.r.unrealizable = true;
          return;
        }
        Jacobian2 M;
        std::vector<double> fp(len);
        for (std::size_t k = 0; k < len; ++k) {
          fp[k] = map.deriv1(x[k]);
          M = Jacobian2{fp[k], -1.0, 1.0, 0.0} * M;
        }
        ++a.r.tested;
        if (word_case == WordCase::f) {
          if (std::abs(fp[2]) >= std::abs(fp[0]))
            ++a.r.subcase_I;
          else
            ++a.r.subcase_II;
        }
        if (!cone_contains(M, spec.in, spec.out)) ++a.r.containment_violations;
        double g = cone_min_growth(M, spec.in);
        a.min_growth = std::min(a.min_growth, g);
        if (g < spec.bound) ++a.r.growth_violations;
        if (!cone_contains(M, cc.narrow, cc.wide) || cone_min_growth(M, cc.narrow) < prop_bound)
          ++a.r.prop_violations;
        if (!cone_contains(M.transposed(), cc.narrow, cc.wide)) ++a.r.adjoint_violations;
      },
      256);

  rep.tested = acc.r.tested;
  rep.attempts = acc.r.attempts;
  rep.containment_violations = acc.r.containment_violations;
  rep.growth_violations = acc.r.growth_violations;
  rep.prop_violations = acc.r.prop_violations;
  rep.adjoint_violations = acc.r.adjoint_violations;
  rep.subcase_I = acc.r.subcase_I;
  rep.subcase_II = acc.r.subcase_II;
  rep.unrealizable = acc.r.unrealizable;
  rep.min_growth_observed = acc.r.tested > 0 ? acc.min_growth : 0.0;
  return rep;
}

WordLemmaReport verify_good_step(const CircleMap& map, const CriticalData& crit, const RegionParams& params,
                                 std::size_t n_samples, std::uint64_t seed, Exec exec) {
  const double L = map.L();
  require_valid_c(params, crit, L);
  const CanonicalCones cc = canonical_cones(L, params.beta);
  WordLemmaReport rep;
  rep.growth_bound = 0.25 * std::pow(L, params.beta / 4.0);
  struct Acc {
    WordLemmaReport r;
    double min_growth = std::numeric_limits<double>::infinity();
    void merge(const Acc& o) {
      r.tested += o.r.tested;
      r.attempts += o.r.attempts;
      r.containment_violations += o.r.containment_violations;
      r.growth_violations += o.r.growth_violations;
      min_growth = std::min(min_growth, o.min_growth);
    }
  };
  Acc acc = reduce_indexed(n_samples, exec, Acc{}, [&](Acc& a, std::size_t i) {
    Stream s(seed, i);
    double x = s.next_double();
    ++a.r.attempts;
    while (distance_to_set(x, crit.cprime) < params.c) {
      x = s.next_double();
      ++a.r.attempts;
    }
    Jacobian2 J{map.deriv1(x), -1.0, 1.0, 0.0};
    ++a.r.tested;
    if (!cone_contains(J, cc.wide, cc.narrow)) ++a.r.containment_violations;
    double g = cone_min_growth(J, cc.wide);
    a.min_growth = std::min(a.min_growth, g);
    if (g < rep.growth_bound) ++a.r.growth_violations;
  });
  rep.tested = acc.r.tested;
  rep.attempts = acc.r.attempts;
  rep.containment_violations = acc.r.containment_violations;
  rep.growth_violations = acc.r.growth_violations;
  rep.min_growth_observed = acc.r.tested > 0 ? acc.min_growth : 0.0;
  return rep;
}

PropertyBReport verify_property_B(const CircleMap& map, const CriticalData& crit, const RegionParams& params,
                                  const std::vector<double>& omegas, TorusPoint q0, std::size_t N) {
  GNReport gn = in_G_N(map, crit, params, omegas, q0, N);
  if (!gn.member)
    throw NotInGN("block is not in G_N: condition " + to_string(gn.failed) + " fails at step " +
                  std::to_string(gn.index));
  const double L = map.L();
  BlockSVD svd = block_svd(map, omegas, q0, N);
  PropertyBReport r;
  r.log_sigma1 = svd.log_sigma1;
  r.log_sigma1_bound = params.beta / 15.0 * static_cast<double>(N) * std::log(L);
  r.theta_minus_0 = svd.theta_minus_0;
  r.theta_minus_N = svd.theta_minus_N;
  r.angle_bound = std::pow(L, -params.beta);
  r.growth_exponent = svd.log_sigma1 / (static_cast<double>(N) * std::log(L));
  r.sigma1_ok = r.log_sigma1 >= r.log_sigma1_bound;
  r.angle_ok = std::abs(r.theta_minus_0 - 0.5 * kPi) <= r.angle_bound &&
               std::abs(r.theta_minus_N - 0.5 * kPi) <= r.angle_bound;
  return r;
}

}  // namespace randlyap
