#include "randlyap/experiments.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <numbers>

#include "randlyap/chain.hpp"
#include "randlyap/errors.hpp"
#include "randlyap/lyapunov.hpp"
#include "randlyap/regions.hpp"
#include "randlyap/stats.hpp"

namespace randlyap {

namespace {

constexpr double kPi = std::numbers::pi;

// Stream families per suite so that suites never share random numbers.
enum StreamFamily : std::uint64_t {
  kDetStream = 1,
  kJacStream = 2,
  kPreimageStream = 3,
  kPropertyBStream = 4,
  kMeasureStream = 5,
  kReportStream = 6,
};

double det3(const std::array<std::array<double, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Psi(y1, y2, y3) with the direction carried as an unnormalised long double
// vector, so nearby angles can be differenced without rounding against pi.
struct PsiValue {
  double x3, y3;
  long double vx, vy;
};

PsiValue psi_chart(const CircleMap& map, ProjPoint q0, const std::array<double, 3>& y) {
  long double vx = std::cos(static_cast<long double>(q0.theta));
  long double vy = std::sin(static_cast<long double>(q0.theta));
  for (double yi : y) {
    long double fp = map.deriv1(yi);
    long double nx = fp * vx - vy;
    vy = vx;
    vx = nx;
    long double n = std::hypot(vx, vy);
    vx /= n;
    vy /= n;
  }
  return {map.eval(y[2]) - y[1], y[2], vx, vy};
}

std::array<double, 3> t_chart(const CircleMap& map, ProjPoint q0, const std::array<double, 3>& w) {
  double y1 = q0.pos.x + w[0];
  double y2 = map.eval(y1) - q0.pos.y + w[1];
  double y3 = map.eval(y2) - y1 + w[2];
  return {y1, y2, y3};
}

constexpr double kStencil[4] = {2.0, 1.0, -1.0, -2.0};

double five_point(const double d[4], double h) { return (-d[0] + 8.0 * d[1] - 8.0 * d[2] + d[3]) / (12.0 * h); }

// Five-point central differences.
template <class Fn>
std::array<std::array<double, 3>, 3> fd_jacobian(Fn fn, std::array<double, 3> at, double h) {
  std::array<std::array<double, 3>, 3> J{};
  auto c = fn(at);
  for (int j = 0; j < 3; ++j) {
    double d[3][4];
    for (int k = 0; k < 4; ++k) {
      auto p = at;
      p[j] += kStencil[k] * h;
      auto v = fn(p);
      for (int i = 0; i < 3; ++i) d[i][k] = v[i] - c[i];
    }
    for (int i = 0; i < 3; ++i) J[i][j] = five_point(d[i], h);
  }
  return J;
}

// Same stencil for Psi; the angle row uses the signed angle between directions.
std::array<std::array<double, 3>, 3> fd_jacobian_psi(const CircleMap& map, ProjPoint q0, std::array<double, 3> at,
                                                     double h) {
  std::array<std::array<double, 3>, 3> J{};
  PsiValue c = psi_chart(map, q0, at);
  for (int j = 0; j < 3; ++j) {
    double d[3][4];
    for (int k = 0; k < 4; ++k) {
      auto p = at;
      p[j] += kStencil[k] * h;
      PsiValue v = psi_chart(map, q0, p);
      d[0][k] = v.x3 - c.x3;
      d[1][k] = v.y3 - c.y3;
      long double cross = c.vx * v.vy - c.vy * v.vx;
      long double dot = c.vx * v.vx + c.vy * v.vy;
      if (dot < 0) {
        cross = -cross;
        dot = -dot;
      }
      d[2][k] = static_cast<double>(std::atan2(cross, dot));
    }
    for (int i = 0; i < 3; ++i) J[i][j] = five_point(d[i], h);
  }
  return J;
}

ProjPoint draw_proj(Stream& s) {
  double x = s.next_double(), y = s.next_double();
  return {{x, y}, s.next_double() * kPi};
}

NoiseTriple draw_triple(Stream& s, double eps) {
  double a = s.uniform(-eps, eps), b = s.uniform(-eps, eps);
  return {a, b, s.uniform(-eps, eps)};
}

struct MaxAcc {
  double max1 = 0.0, max2 = 0.0, max3 = 0.0;
  std::size_t count = 0, fail = 0;
  void merge(const MaxAcc& o) {
    max1 = std::max(max1, o.max1);
    max2 = std::max(max2, o.max2);
    max3 = std::max(max3, o.max3);
    count += o.count;
    fail += o.fail;
  }
};

std::string sz(std::size_t v) { return std::to_string(v); }

SuiteResult merge_results(const std::string& name, std::vector<SuiteResult> parts) {
  SuiteResult r;
  r.suite = name;
  r.pass = true;
  r.table = parts.front().table;
  r.table.rows.clear();
  for (auto& p : parts) {
    r.pass = r.pass && p.pass;
    if (r.first_failure.empty() && !p.first_failure.empty()) r.first_failure = p.suite + ": " + p.first_failure;
    r.report[p.suite] = p.report;
    for (auto& row : p.table.rows) r.table.rows.push_back(row);
  }
  return r;
}

CriticalData critical_for(const CircleMap& map) { return find_critical_sets(map); }

// Smallest error in (w1, w2, w3) that a double-precision theta3 can resolve.
// Along the fiber of noise triples with the same endpoint position only w1
// moves f' (y2 and y3 are pinned), so d theta3 / d w1 follows from
// d theta' = (d theta - cos^2 theta d f') / |J u|^2; w2 then moves by |f'(y1)| times as much.
double recovery_floor(const CircleMap& map, ProjPoint q0, NoiseTriple w) {
  ThreeStep st = three_step_H(map, q0, w);
  const std::array<double, 3> s{q0.pos.x + w.w1, st.intermediates[0].pos.y, st.intermediates[1].pos.y};
  const std::array<double, 3> th{q0.theta, st.intermediates[0].theta, st.intermediates[1].theta};
  const double fp1 = map.deriv1(s[0]);
  const std::array<double, 3> ds{1.0, 0.0, 0.0};
  double dth = 0.0;
  for (int i = 0; i < 3; ++i) {
    double c = std::cos(th[i]), sn = std::sin(th[i]), fp = map.deriv1(s[i]);
    double g = (fp * c - sn) * (fp * c - sn) + c * c;
    dth = (dth - c * c * map.deriv2(s[i]) * ds[i]) / g;
  }
  double ulp = std::numeric_limits<double>::epsilon() * kPi;
  return ulp * std::max(1.0, std::abs(fp1)) / std::max(std::abs(dth), 1e-300);
}

const ProjPoint kDefaultStart{{0.1234, 0.5678}, 0.3};

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string cell_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>)
          return v;
        else if constexpr (std::is_same_v<T, double>)
          return format_double(v);
        else if constexpr (std::is_same_v<T, bool>)
          return v ? "true" : "false";
        else
          return std::to_string(v);
      },
      c);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

nlohmann::json cell_json(const Cell& c) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, c);
}

}  // namespace

std::string to_csv(const Table& t, const std::string& manifest_hash) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + csv_field(t.header[i]);
  out += (t.header.empty() ? "" : ",") + std::string("manifest_hash\r\n");
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(cell_text(row[i]));
    out += (row.empty() ? "" : ",") + manifest_hash + "\r\n";
  }
  return out;
}

nlohmann::json to_json(const Table& t, const std::string& manifest_hash) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json o = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size() && i < t.header.size(); ++i) o[t.header[i]] = cell_json(row[i]);
    rows.push_back(std::move(o));
  }
  return {{"manifest_hash", manifest_hash}, {"columns", t.header}, {"rows", rows}};
}

void CheckList::add(const std::string& name, double observed, double bound, bool pass) {
  table_.rows.push_back({name, observed, format_double(bound), pass});
  if (!pass && pass_) first_failure_ = name + " (observed " + format_double(observed) + ", bound " +
                                       format_double(bound) + ")";
  pass_ = pass_ && pass;
}

void CheckList::add(const std::string& name, double observed, const std::string& bound, bool pass) {
  table_.rows.push_back({name, observed, bound, pass});
  if (!pass && pass_) first_failure_ = name + " (observed " + format_double(observed) + ", bound " + bound + ")";
  pass_ = pass_ && pass;
}

void CheckList::fill(SuiteResult& r) const {
  r.pass = pass_;
  r.first_failure = first_failure_;
  r.table = table_;
}

double fd_det_dH(const CircleMap& map, ProjPoint q0, NoiseTriple w, double h) {
  std::array<double, 3> ws{w.w1, w.w2, w.w3};
  auto T = [&](const std::array<double, 3>& v) { return t_chart(map, q0, v); };
  auto JT = fd_jacobian(T, ws, h);
  auto JP = fd_jacobian_psi(map, q0, T(ws), h);
  return det3(JP) * det3(JT);
}

double fd_det_dH_adaptive(const CircleMap& map, ProjPoint q0, NoiseTriple w, double h_max, int halvings) {
  std::vector<double> d;
  double h = h_max;
  for (int k = 0; k <= halvings; ++k, h *= 0.5) d.push_back(fd_det_dH(map, q0, w, h));
  // Pick the middle of the three consecutive estimates that agree best.
  double best = d.back(), best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < d.size(); ++k) {
    double scale = std::max({std::abs(d[k - 1]), std::abs(d[k]), std::abs(d[k + 1])});
    if (scale == 0.0) continue;
    double gap = std::max(std::abs(d[k] - d[k - 1]), std::abs(d[k + 1] - d[k])) / scale;
    if (gap < best_gap) {
      best_gap = gap;
      best = d[k];
    }
  }
  return best;
}

bool density_sample_ok(const CircleMap& map, ProjPoint q0, NoiseTriple w) {
  auto ok_tan = [](double th) {
    double t = std::abs(std::tan(th));
    return t >= 1e-3 && t <= 1e3;
  };
  if (std::abs(map.deriv2(q0.pos.x + w.w1)) < 1e-3) return false;
  ThreeStep st = three_step_H(map, q0, w);
  return ok_tan(q0.theta) && ok_tan(st.intermediates[0].theta) && ok_tan(st.intermediates[1].theta) &&
         ok_tan(st.q3.theta);
}

SuiteResult suite_density(const ExperimentConfig& cfg, const DensitySizes& sizes, Exec exec) {
  const CircleMap map = cfg.build_map();
  const double eps = cfg.noise.epsilon;
  const std::uint64_t seed = cfg.noise.seed;
  SuiteResult r;
  r.suite = "density";
  CheckList checks;

  MaxAcc det = reduce_indexed(
      sizes.n_det, exec, MaxAcc{},
      [&](MaxAcc& a, std::size_t i) {
        Stream s(seed, substream(kDetStream, i));
        for (int t = 0; t < 10000; ++t) {
          ProjPoint q0 = draw_proj(s);
          NoiseTriple w = draw_triple(s, eps);
          if (!density_sample_ok(map, q0, w)) continue;
          double formula = det_dH_formula(map, q0, w);
          double fd = fd_det_dH_adaptive(map, q0, w);
          ThreeStep st = three_step_H(map, q0, w);
          double weight = std::abs(map.deriv2(q0.pos.x + w.w1)) * rho(map, st.q3);
          a.max1 = std::max(a.max1, std::abs(fd - formula) / std::abs(formula));
          a.max2 = std::max(a.max2, std::abs(weight - std::abs(formula)) / std::abs(formula));
          ++a.count;
          return;
        }
        ++a.fail;
      },
      64);
  checks.add("det_dH_vs_finite_difference_rel", det.max1, 1e-5, det.max1 <= 1e-5 && det.count == sizes.n_det);
  checks.add("rho_weight_vs_det_dH_rel", det.max2, 1e-5, det.max2 <= 1e-5 && det.count == sizes.n_det);

  MaxAcc jac = reduce_indexed(sizes.n_jacobian, exec, MaxAcc{}, [&](MaxAcc& a, std::size_t i) {
    Stream s(seed, substream(kJacStream, i));
    TorusPoint p{s.next_double(), s.next_double()};
    double om = s.uniform(-eps, eps);
    Jacobian2 J = jacobian_F_omega(map, p, om);
    const double h = 1e-7;
    auto diff = [&](TorusPoint plus, TorusPoint minus) {
      return Vec2{wrap_centered(plus.x - minus.x) / (2 * h), wrap_centered(plus.y - minus.y) / (2 * h)};
    };
    Vec2 dx = diff(apply_F_omega(map, {p.x + h, p.y}, om), apply_F_omega(map, {p.x - h, p.y}, om));
    Vec2 dy = diff(apply_F_omega(map, {p.x, p.y + h}, om), apply_F_omega(map, {p.x, p.y - h}, om));
    auto rel = [](double fdv, double exact) { return std::abs(fdv - exact) / std::max(1.0, std::abs(exact)); };
    a.max1 = std::max({a.max1, rel(dx.x, J.a), rel(dy.x, J.b), rel(dx.y, J.c), rel(dy.y, J.d)});
    ++a.count;
  });
  checks.add("jacobian_vs_finite_difference_rel", jac.max1, 1e-6, jac.max1 <= 1e-6);

  MaxAcc uni = reduce_indexed(sizes.n_unimodular, exec, MaxAcc{}, [&](MaxAcc& a, std::size_t i) {
    Stream s(seed, substream(kJacStream, sizes.n_jacobian + i));
    TorusPoint p{s.next_double(), s.next_double()};
    double om = s.uniform(-eps, eps);
    a.max1 = std::max(a.max1, std::abs(std::abs(jacobian_F_omega(map, p, om).det()) - 1.0));
    ++a.count;
  });
  checks.add("abs_det_dF_minus_one", uni.max1, 1e-12, uni.max1 <= 1e-12);

  checks.fill(r);
  r.report = {{"n_det", det.count},
              {"n_det_unsampled", det.fail},
              {"max_rel_det_error", det.max1},
              {"max_rel_rho_error", det.max2},
              {"n_jacobian", jac.count},
              {"max_rel_jacobian_error", jac.max1},
              {"n_unimodular", uni.count},
              {"max_abs_det_error", uni.max1}};
  return r;
}

SuiteResult suite_preimages(const ExperimentConfig& cfg, std::size_t n, Exec exec) {
  const CircleMap map = cfg.build_map();
  const CriticalData crit = critical_for(map);
  const double eps = cfg.noise.epsilon;
  const std::uint64_t seed = cfg.noise.seed;
  struct Acc {
    std::size_t tested = 0, missed = 0, too_many = 0, max_count = 0, unsampled = 0;
    double max_err = 0.0;
    double max_err_over_floor = 0.0;
    void merge(const Acc& o) {
      max_err_over_floor = std::max(max_err_over_floor, o.max_err_over_floor);
      tested += o.tested;
      missed += o.missed;
      too_many += o.too_many;
      unsampled += o.unsampled;
      max_count = std::max(max_count, o.max_count);
      max_err = std::max(max_err, o.max_err);
    }
  };
  Acc acc = reduce_indexed(
      n, exec, Acc{},
      [&](Acc& a, std::size_t i) {
        Stream s(seed, substream(kPreimageStream, i));
        for (int t = 0; t < 10000; ++t) {
          ProjPoint q0 = draw_proj(s);
          NoiseTriple w = draw_triple(s, eps);
          if (!density_sample_ok(map, q0, w)) continue;
          ProjPoint q3 = three_step_H(map, q0, w).q3;
          auto pre = enumerate_preimages(map, q3, q0, eps);
          double best = std::numeric_limits<double>::infinity();
          for (const auto& p : pre)
            best = std::min(best, std::max({std::abs(p.w1 - w.w1), std::abs(p.w2 - w.w2), std::abs(p.w3 - w.w3)}));
          ++a.tested;
          if (!(best <= 1e-9)) ++a.missed;
          if (std::isfinite(best)) {
            a.max_err = std::max(a.max_err, best);
            a.max_err_over_floor = std::max(a.max_err_over_floor, best / recovery_floor(map, q0, w));
          }
          if (pre.size() > crit.m2) ++a.too_many;
          a.max_count = std::max(a.max_count, pre.size());
          return;
        }
        ++a.unsampled;
      },
      64);
  SuiteResult r;
  r.suite = "preimages";
  CheckList checks;
  checks.add("preimage_recovery_misses", static_cast<double>(acc.missed), 0.0, acc.missed == 0 && acc.tested == n);
  checks.add("preimage_max_recovery_error", acc.max_err, 1e-9, acc.max_err <= 1e-9);
  checks.add("preimage_count_above_M2", static_cast<double>(acc.too_many), 0.0, acc.too_many == 0);
  checks.fill(r);
  r.report = {{"tested", acc.tested},       {"missed", acc.missed},         {"max_recovery_error", acc.max_err},
              {"max_error_over_precision_floor", acc.max_err_over_floor},
              {"max_count", acc.max_count}, {"M2", crit.m2},                {"count_above_M2", acc.too_many},
              {"unsampled", acc.unsampled}};
  return r;
}

SuiteResult suite_stationarity(const ExperimentConfig& cfg, std::size_t n_points, std::size_t n_steps, Exec exec) {
  const CircleMap map = cfg.build_map();
  const double eps = cfg.noise.epsilon;
  const std::uint64_t seed = cfg.noise.seed;
  Grid2 grid{cfg.chain.grid, cfg.chain.grid};
  StationarityReport pushed = stationarity_test(map, NoiseModel{eps, seed, 10}, n_points, grid, 2, exec);
  StationarityReport null_run = stationarity_test(map, NoiseModel{eps, seed, 11}, n_points, grid, 0, exec);
  ErgodicReport erg = ergodic_average_test(map, NoiseModel{eps, seed, 12}, kDefaultStart.pos, n_steps);
  ChiSquare markov = markov_property_test(map, NoiseModel{eps, seed, 13}, kDefaultStart.pos, n_steps);

  SuiteResult r;
  r.suite = "stationarity";
  CheckList checks;
  checks.add("pushforward_uniform_p_value", pushed.p_value, 0.01, pushed.p_value > 0.01);
  checks.add("ergodic_average_abs_z", std::abs(erg.z), 3.0, std::abs(erg.z) <= 3.0);
  checks.fill(r);
  r.report = {{"pushforward", {{"chi2", pushed.chi2}, {"dof", pushed.dof}, {"p_value", pushed.p_value},
                               {"n_samples", pushed.n_samples}}},
              {"null_calibration", {{"chi2", null_run.chi2}, {"dof", null_run.dof}, {"p_value", null_run.p_value}}},
              {"ergodic", {{"time_average", erg.time_average}, {"space_average", erg.space_average},
                           {"std_error", erg.std_error}, {"z", erg.z}, {"n_steps", erg.n_steps}}},
              {"markov_cells_informational", {{"chi2", markov.chi2}, {"dof", markov.dof},
                                              {"p_value", markov.p_value}}}};
  return r;
}

SuiteResult suite_cones(const ExperimentConfig& cfg, std::size_t n_per_case, Exec exec) {
  const CircleMap map = cfg.build_map();
  const CriticalData crit = critical_for(map);
  const RegionParams params = cfg.region_params();
  const std::uint64_t seed = cfg.noise.seed;
  SuiteResult r;
  r.suite = "cones";
  r.pass = true;
  r.table.header = {"case",       "word",      "L",           "beta",      "c",          "samples",
                    "violations", "containment", "growth",    "prop",      "adjoint",    "min_growth",
                    "growth_bound", "attempts", "unrealizable", "subcase_I", "subcase_II"};
  nlohmann::json cases = nlohmann::json::array();
  for (WordCase wc : {WordCase::a, WordCase::b, WordCase::c, WordCase::d, WordCase::e, WordCase::f}) {
    WordLemmaReport w = verify_word_lemmas(map, crit, params, wc, n_per_case, seed, exec);
    std::size_t viol = w.containment_violations + w.growth_violations;
    r.table.rows.push_back({to_string(wc), case_word(wc), map.L(), params.beta, params.c,
                            static_cast<std::uint64_t>(w.tested), static_cast<std::uint64_t>(viol),
                            static_cast<std::uint64_t>(w.containment_violations),
                            static_cast<std::uint64_t>(w.growth_violations),
                            static_cast<std::uint64_t>(w.prop_violations),
                            static_cast<std::uint64_t>(w.adjoint_violations), w.min_growth_observed, w.growth_bound,
                            static_cast<std::uint64_t>(w.attempts), w.unrealizable,
                            static_cast<std::uint64_t>(w.subcase_I), static_cast<std::uint64_t>(w.subcase_II)});
    bool ok = w.total_violations() == 0 && !w.unrealizable && w.tested == n_per_case;
    if (!ok && r.pass)
      r.first_failure = "case " + to_string(wc) + " (" + case_word(wc) + "): " + sz(w.containment_violations) +
                        " containment, " + sz(w.growth_violations) + " growth, " + sz(w.prop_violations) +
                        " block, " + sz(w.adjoint_violations) + " adjoint violations" +
                        (w.unrealizable ? ", unrealizable" : "");
    r.pass = r.pass && ok;
    cases.push_back({{"case", to_string(wc)},
                     {"word", case_word(wc)},
                     {"tested", w.tested},
                     {"containment_violations", w.containment_violations},
                     {"growth_violations", w.growth_violations},
                     {"prop_violations", w.prop_violations},
                     {"adjoint_violations", w.adjoint_violations},
                     {"min_growth", w.min_growth_observed},
                     {"growth_bound", w.growth_bound},
                     {"prop_bound", w.prop_bound},
                     {"unrealizable", w.unrealizable},
                     {"subcase_I", w.subcase_I},
                     {"subcase_II", w.subcase_II}});
  }

  WordLemmaReport good = verify_good_step(map, crit, params, n_per_case, seed ^ 0x9e3779b97f4a7c15ull, exec);
  nlohmann::json good_json = {{"tested", good.tested},
                              {"containment_violations", good.containment_violations},
                              {"growth_violations", good.growth_violations},
                              {"min_growth", good.min_growth_observed},
                              {"growth_bound", good.growth_bound}};

  // Empirical minimal L for case (a) at a few radii around the configured c.
  nlohmann::json scan = nlohmann::json::array();
  for (double c : {0.5 * params.c, params.c, 2.0 * params.c}) {
    nlohmann::json pts = nlohmann::json::array();
    double min_clean = std::numeric_limits<double>::quiet_NaN();
    for (int k = 12; k >= 0; --k) {
      double L = 10.0 * std::pow(2.0, k);
      CircleMap mL = cfg.build_map(L);
      CriticalData cL = critical_for(mL);
      RegionParams pc = params;
      pc.c = c;
      if (!(c < cL.chat) || !(std::sqrt(c / L) < c)) break;
      WordLemmaReport w = verify_word_lemmas(mL, cL, pc, WordCase::a, std::min<std::size_t>(n_per_case, 10000), seed,
                                             exec);
      std::size_t v = w.containment_violations + w.growth_violations;
      pts.push_back({{"L", L}, {"violations", v}, {"tested", w.tested}});
      if (v != 0) break;
      min_clean = L;
    }
    scan.push_back({{"c", c}, {"min_L_without_violations", min_clean}, {"points", pts}});
  }
  r.report = {{"cases", cases}, {"good_step_informational", good_json}, {"case_a_min_L_scan", scan}, {"L", map.L()}, {"beta", params.beta}, {"c", params.c}};
  return r;
}

SuiteResult suite_grammar(const ExperimentConfig& cfg, std::size_t n_orbits, Exec exec) {
  const CircleMap map = cfg.build_map();
  const CriticalData crit = critical_for(map);
  const RegionParams params = cfg.region_params();
  GrammarCheck g = check_grammar(map, crit, params, cfg.noise.epsilon, cfg.regions.N, n_orbits, cfg.noise.seed, exec);
  SuiteResult r;
  r.suite = "grammar";
  CheckList checks;
  checks.add("grammar_violations", static_cast<double>(g.violations), 0.0, g.violations == 0);
  checks.add("conditioned_orbits", static_cast<double>(g.tested), std::to_string(n_orbits), g.tested == n_orbits);
  checks.fill(r);
  if (!g.first_violation.empty()) r.first_failure += " first word " + g.first_violation;
  r.report = {{"tested", g.tested},
              {"violations", g.violations},
              {"nontrivial_words", g.nontrivial},
              {"first_violation", g.first_violation},
              {"block_counts", g.block_counts},
              {"N", cfg.regions.N}};
  return r;
}

SuiteResult suite_lemma53(const ExperimentConfig& cfg, std::size_t n, Exec exec) {
  const CircleMap map = cfg.build_map();
  const CriticalData crit = critical_for(map);
  TwoStepReport l = check_lemma_5_3(map, crit, cfg.region_params(), cfg.regions.c0, cfg.noise.epsilon, n,
                                    cfg.noise.seed, exec);
  SuiteResult r;
  r.suite = "lemma53";
  CheckList checks;
  checks.add("step_after_BI_B_not_G", static_cast<double>(l.violations), 0.0, l.violations == 0);
  checks.add("samples_tested", static_cast<double>(l.tested), std::to_string(n), l.tested == n);
  checks.fill(r);
  r.report = {{"tested", l.tested}, {"violations", l.violations}, {"c0", cfg.regions.c0}};
  return r;
}

SuiteResult suite_propertyB(const ExperimentConfig& cfg, std::size_t n_blocks, Exec exec) {
  const CircleMap map = cfg.build_map();
  const CriticalData crit = critical_for(map);
  RegionParams params = cfg.region_params();
  params.version = GNVersion::thm2;
  const std::size_t N = cfg.regions.N;
  struct Acc {
    std::size_t tested = 0, sigma_viol = 0, angle_viol = 0, unsampled = 0, tries = 0;
    double min_exponent = std::numeric_limits<double>::infinity();
    double max_angle_dev = 0.0;
    void merge(const Acc& o) {
      tested += o.tested;
      sigma_viol += o.sigma_viol;
      angle_viol += o.angle_viol;
      unsampled += o.unsampled;
      tries += o.tries;
      min_exponent = std::min(min_exponent, o.min_exponent);
      max_angle_dev = std::max(max_angle_dev, o.max_angle_dev);
    }
  };
  Acc acc = reduce_indexed(
      n_blocks, exec, Acc{},
      [&](Acc& a, std::size_t i) {
        Stream s(cfg.noise.seed, substream(kPropertyBStream, i));
        auto smp = sample_G_N(map, crit, params, cfg.noise.epsilon, N, s);
        if (!smp) {
          ++a.unsampled;
          return;
        }
        a.tries += smp->tries;
        PropertyBReport b = verify_property_B(map, crit, params, smp->omegas, smp->q0, N);
        ++a.tested;
        if (!b.sigma1_ok) ++a.sigma_viol;
        if (!b.angle_ok) ++a.angle_viol;
        a.min_exponent = std::min(a.min_exponent, b.growth_exponent);
        a.max_angle_dev = std::max(
            {a.max_angle_dev, std::abs(b.theta_minus_0 - 0.5 * kPi), std::abs(b.theta_minus_N - 0.5 * kPi)});
      },
      64);
  const double L = map.L();
  SuiteResult r;
  r.suite = "propertyB";
  CheckList checks;
  checks.add("sigma1_violations", static_cast<double>(acc.sigma_viol), 0.0, acc.sigma_viol == 0);
  checks.add("contracted_direction_violations", static_cast<double>(acc.angle_viol), 0.0, acc.angle_viol == 0);
  checks.add("blocks_tested", static_cast<double>(acc.tested), std::to_string(n_blocks), acc.tested == n_blocks);
  checks.fill(r);
  r.report = {{"tested", acc.tested},
              {"sigma1_violations", acc.sigma_viol},
              {"angle_violations", acc.angle_viol},
              {"unsampled", acc.unsampled},
              {"acceptance_rate", acc.tries ? static_cast<double>(acc.tested) / static_cast<double>(acc.tries) : 0.0},
              {"min_growth_exponent", acc.tested ? acc.min_exponent : 0.0},
              {"required_exponent", params.beta / 15.0},
              {"max_angle_deviation", acc.max_angle_dev},
              {"angle_bound", std::pow(L, -params.beta)},
              {"N", N}};
  return r;
}

SuiteResult suite_concentration(const ExperimentConfig& cfg, const ConcentrationSizes& sizes, Exec exec) {
  const CircleMap map = cfg.build_map();
  const CriticalData crit = critical_for(map);
  const RegionParams params = cfg.region_params();
  const double eps = cfg.noise.epsilon;
  SuiteResult r;
  r.suite = "concentration";
  CheckList checks;

  std::vector<double> xs, ys;
  nlohmann::json gn = nlohmann::json::array();
  for (std::size_t N : sizes.N) {
    double frac = gn_complement_fraction(map, crit, params, eps, N, sizes.n_gn, cfg.noise.seed, exec);
    xs.push_back(static_cast<double>(N));
    ys.push_back(frac);
    gn.push_back({{"N", N}, {"leb_complement", frac}});
  }
  LinearFit fit = linear_fit(xs, ys);
  checks.add("gn_complement_affine_r2", fit.r2, 0.95, fit.r2 > 0.95);
  double worst_slope_dev = 0.0;
  for (std::size_t k = 1; k < xs.size(); ++k) {
    double s = (ys[k] - ys[k - 1]) / (xs[k] - xs[k - 1]);
    worst_slope_dev = std::max(worst_slope_dev, std::abs(s / fit.slope - 1.0));
  }
  checks.add("gn_complement_slope_spread", worst_slope_dev, 0.5, worst_slope_dev <= 0.5);

  std::vector<double> Ls = cfg.sweep.L.empty() ? std::vector<double>{cfg.map.L} : cfg.sweep.L;
  std::vector<double> chat;
  nlohmann::json conc = nlohmann::json::array();
  for (std::size_t k = 0; k < Ls.size(); ++k) {
    CircleMap mL = cfg.build_map(Ls[k]);
    MeasureOptions opt{cfg.chain.grid, cfg.chain.grid, 32, 64};
    EmpiricalMeasure mu = empirical_proj_measure(mL, NoiseModel{eps, cfg.noise.seed, substream(kMeasureStream, k)},
                                                 kDefaultStart, std::max<std::size_t>(1000, cfg.chain.burn_in),
                                                 sizes.n_measure, opt, exec);
    ConcentrationReport cr = concentration_check(mu, Ls[k], eps);
    chat.push_back(cr.ratio);
    conc.push_back({{"L", Ls[k]},
                    {"C_hat", cr.ratio},
                    {"lhs", cr.lhs},
                    {"rhs_shape", cr.rhs_shape},
                    {"band_mass", cr.band_mass},
                    {"n_sets", cr.n_sets},
                    {"mass_tan_le_one", mu.mass_tan_le_one()}});
  }
  double mean_c = mean(chat);
  double worst_c_dev = 0.0;
  for (double c : chat) worst_c_dev = std::max(worst_c_dev, std::abs(c / mean_c - 1.0));
  checks.add("concentration_constant_spread", worst_c_dev, 0.5, worst_c_dev <= 0.5);
  checks.fill(r);
  r.report = {{"gn_complement", gn},
              {"fit", {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}}},
              {"concentration", conc},
              {"C_hat_mean", mean_c}};
  return r;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"density",  "cones",        "grammar",      "lemma53",
                                                 "propertyB", "stationarity", "concentration"};
  return names;
}

SuiteResult run_suite(const ExperimentConfig& cfg, const std::string& name, Exec exec) {
  const std::size_t n = cfg.chain.n_samples;
  if (name == "density") {
    DensitySizes ds{std::min<std::size_t>(n, 1000), std::min<std::size_t>(n, 10000), n};
    return merge_results("density", {suite_density(cfg, ds, exec),
                                     suite_preimages(cfg, std::min<std::size_t>(n, 10000), exec)});
  }
  if (name == "cones") return suite_cones(cfg, n, exec);
  if (name == "grammar") return suite_grammar(cfg, n, exec);
  if (name == "lemma53") return suite_lemma53(cfg, n, exec);
  if (name == "propertyB") return suite_propertyB(cfg, n, exec);
  if (name == "stationarity") return suite_stationarity(cfg, n, cfg.chain.n_steps, exec);
  if (name == "concentration") {
    ConcentrationSizes cs;
    cs.n_gn = n;
    cs.n_measure = n;
    return suite_concentration(cfg, cs, exec);
  }
  throw ConfigError("suite", 0, "unknown suite '" + name + "'");
}

namespace {

std::vector<std::string> le_methods(const std::string& m) {
  if (m == "both") return {"norm", "furstenberg"};
  if (m == "all") return {"norm", "furstenberg", "inverse"};
  return {m};
}

std::vector<double> sweep_eps(const ExperimentConfig& cfg) {
  return cfg.sweep.epsilon.empty() ? std::vector<double>{cfg.noise.epsilon} : cfg.sweep.epsilon;
}

}  // namespace

Table cmd_le(const ExperimentConfig& cfg, Exec exec) {
  if (cfg.sweep.L.empty()) {
    auto it = cfg.lines.find("sweep.L");
    throw ConfigError("sweep.L", it == cfg.lines.end() ? 0 : it->second, "empty sweep list");
  }
  Table t;
  t.header = {"L", "epsilon", "n_steps", "seed", "stream_id", "method", "lambda_hat", "std_error", "n_replicas",
              "lambda_over_log_L"};
  const auto eps_list = sweep_eps(cfg);
  LEOptions opt{cfg.chain.n_replicas, cfg.chain.renorm_every, exec};
  std::uint64_t cell = 0;
  for (double L : cfg.sweep.L) {
    CircleMap map = cfg.build_map(L);
    for (double eps : eps_list) {
      NoiseModel noise{eps, cfg.noise.seed, cell};
      for (const auto& m : le_methods(cfg.chain.method)) {
        LEEstimate e;
        if (m == "norm")
          e = estimate_le_norm(map, noise, kDefaultStart.pos, cfg.chain.n_steps, opt);
        else if (m == "furstenberg")
          e = estimate_le_furstenberg(map, noise, kDefaultStart, cfg.chain.burn_in, cfg.chain.n_steps, opt);
        else
          e = estimate_le_inverse(map, noise, kDefaultStart.pos, cfg.chain.n_steps, opt);
        t.rows.push_back({L, eps, static_cast<std::uint64_t>(e.n_steps), cfg.noise.seed, cell, m, e.lambda_hat,
                          e.std_error, static_cast<std::uint64_t>(e.n_replicas), e.lambda_hat / std::log(L)});
      }
      ++cell;
    }
  }
  return t;
}

Table cmd_h3scan(const ExperimentConfig& cfg) {
  const CircleMap base = cfg.build_map();
  const CriticalData crit = critical_for(base);
  Table t;
  t.header = {"L", "c", "a", "holds", "worst_distance", "pass_fraction"};
  for (double c : cfg.h3scan.c) {
    if (!(c < crit.chat))
      throw PreconditionError("h3scan c = " + format_double(c) + " is not below chat = " + format_double(crit.chat));
    std::vector<std::vector<Cell>> rows;
    std::size_t pass = 0;
    for (std::size_t k = 0; k < cfg.h3scan.n_a; ++k) {
      double a = static_cast<double>(k) / static_cast<double>(cfg.h3scan.n_a);
      H3Report h = check_h3(base.with_offset(a), crit, c);
      pass += h.holds ? 1 : 0;
      rows.push_back({base.L(), c, a, h.holds, h.worst_distance, 0.0});
    }
    double frac = static_cast<double>(pass) / static_cast<double>(cfg.h3scan.n_a);
    for (auto& row : rows) {
      row.back() = frac;
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

ReportOutput cmd_report(const ExperimentConfig& cfg, Exec exec) {
  const CircleMap map = cfg.build_map();
  const CriticalData crit = critical_for(map);
  const double eps = cfg.noise.epsilon;
  ReportOutput out;
  nlohmann::json& s = out.summary;
  s["critical"] = crit;
  H12Report h12 = check_h1_h2(map, crit);
  s["h1"] = h12.h1;
  s["h2"] = h12.h2;
  s["min_abs_f2_on_cprime"] = h12.min_abs_f2_on_cprime;
  s["min_abs_f3_on_cdoubleprime"] = h12.min_abs_f3_on_cdoubleprime;
  if (cfg.regions.c0 < crit.chat) {
    H3Report h3 = check_h3(map, crit, cfg.regions.c0);
    s["h3"] = {{"c0", cfg.regions.c0}, {"holds", h3.holds}, {"worst_distance", h3.worst_distance}};
  } else {
    s["h3"] = {{"c0", cfg.regions.c0}, {"holds", nullptr}, {"note", "c0 is not below chat"}};
  }

  MeasureOptions opt{cfg.chain.grid, cfg.chain.grid, 32, 64};
  EmpiricalMeasure mu = empirical_proj_measure(map, NoiseModel{eps, cfg.noise.seed, kReportStream}, kDefaultStart,
                                               std::max<std::size_t>(1000, cfg.chain.burn_in), cfg.chain.n_samples,
                                               opt, exec);
  ConcentrationReport cr = concentration_check(mu, map.L(), eps);
  s["measure"] = {{"total", mu.total()},
                  {"mass_tan_le_one", mu.mass_tan_le_one()},
                  {"mass_vertical_bin", mu.mass_vertical_bin()},
                  {"band_mass", mu.mass_band()},
                  {"C_hat", cr.ratio}};

  const double p = cfg.p();
  const double m = default_m(crit, p);
  std::size_t N = std::max<std::size_t>(1, prescribed_N(crit, p, map.L(), cfg.regions.beta));
  Stream ws(cfg.noise.seed, substream(kReportStream, 1));
  std::vector<double> omegas(N + 1);
  for (double& w : omegas) w = eps * (2.0 * ws.next_double() - 1.0);
  DecompositionReport d = integral_decomposition(map, crit, mu, omegas, N, cfg.regions.beta, p, m,
                                                 std::min<std::size_t>(cfg.chain.n_samples, 200000), cfg.noise.seed,
                                                 exec);
  s["decomposition"] = {{"N", N},
                        {"prescribed_N", d.prescribed_N},
                        {"m", m},
                        {"I", d.I},
                        {"good_mass", d.good_mass},
                        {"bad_mass", d.bad_mass},
                        {"lower_bound", d.lower_bound},
                        {"good_floor", d.good_floor},
                        {"worst_floor", d.worst_floor},
                        {"good_violations", d.good_violations},
                        {"floor_violations", d.floor_violations}};

  out.histogram.header = {"ix", "iy", "itheta", "count"};
  for (std::size_t ix = 0; ix < mu.nx(); ++ix)
    for (std::size_t iy = 0; iy < mu.ny(); ++iy)
      for (std::size_t it = 0; it < mu.ntheta(); ++it)
        out.histogram.rows.push_back({static_cast<std::uint64_t>(ix), static_cast<std::uint64_t>(iy),
                                      static_cast<std::uint64_t>(it), mu.count(ix, iy, it)});
  return out;
}

nlohmann::json task_seeds(const ExperimentConfig& cfg, const std::string& command) {
  nlohmann::json j = {{"seed", cfg.noise.seed}};
  if (command == "le") {
    nlohmann::json cells = nlohmann::json::array();
    std::uint64_t cell = 0;
    for (double L : cfg.sweep.L)
      for (double eps : sweep_eps(cfg))
        cells.push_back({{"L", L}, {"epsilon", eps}, {"stream_id", cell++}, {"replicas", cfg.chain.n_replicas}});
    j["cells"] = cells;
  }
  return j;
}

std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest make_manifest(const ExperimentConfig& cfg, const std::string& command) {
  RunManifest m;
  m.config_hash = config_hash(cfg);
  m.tool_version = tool_version();
  m.command = command;
  m.seeds = task_seeds(cfg, command);
  m.config = canonical_json(cfg);
  m.started = utc_now();
  return m;
}

nlohmann::json to_json(const RunManifest& m) {
  return {{"config_hash", m.config_hash}, {"tool_version", m.tool_version}, {"command", m.command},
          {"seeds", m.seeds},             {"config", m.config},             {"started", m.started},
          {"finished", m.finished}};
}

}  // namespace randlyap
