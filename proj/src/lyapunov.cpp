#include "randlyap/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "randlyap/errors.hpp"
#include "randlyap/stats.hpp"

namespace randlyap {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOverflowGuard = 1e290;

}  // namespace

TangentFrame::TangentFrame(std::size_t renorm_every) : renorm_every_(renorm_every) {}

void TangentFrame::push(const Jacobian2& J) {
  m_ = J * m_;
  double det = std::abs(J.det());
  if (det != 1.0) log_det_ += std::log(det);
  ++steps_;
  double mx = m_.max_abs();
  if (!std::isfinite(mx) || mx > kOverflowGuard)
    throw Overflow("tangent product left the representable range after " + std::to_string(steps_) +
                   " steps; lower renorm_every");
  if (renorm_every_ > 0 && steps_ % renorm_every_ == 0) renormalize();
}

void TangentFrame::renormalize() {
  double s = m_.max_abs();
  if (!(s > 0.0)) throw SingularInput("tangent product collapsed to zero");
  m_ = {m_.a / s, m_.b / s, m_.c / s, m_.d / s};
  log_norm_sum_ += std::log(s);
}

double TangentFrame::log_norm() const { return log_norm_sum_ + std::log(m_.sigma1()); }

LEEstimate summarize_replicas(std::vector<double> per_replica, std::size_t n_steps, std::string method) {
  LEEstimate e;
  e.n_steps = n_steps;
  e.n_replicas = per_replica.size();
  e.lambda_hat = mean(per_replica);
  e.std_error = per_replica.size() > 1 ? sample_sd(per_replica) / std::sqrt(static_cast<double>(per_replica.size()))
                                       : 0.0;
  e.per_replica = std::move(per_replica);
  e.method = std::move(method);
  return e;
}

LEEstimate estimate_le_norm(const CircleMap& map, const NoiseModel& noise, TorusPoint q0, std::size_t n_steps,
                            LEOptions opt) {
  if (n_steps == 0 || opt.n_replicas == 0) throw PreconditionError("need n_steps >= 1 and n_replicas >= 1");
  auto per = map_indexed<double>(opt.n_replicas, opt.exec, [&](std::size_t r) {
    Stream s = noise.substream(r);
    TangentFrame frame(opt.renorm_every);
    TorusPoint p = q0;
    for (std::size_t i = 0; i < n_steps; ++i) {
      double w = noise.draw(s);
      double sx = wrap01(p.x + w);
      auto [f, df] = map.eval_and_deriv1(sx);
      frame.push({df, -1.0, 1.0, 0.0});
      p = {wrap01(f - p.y), sx};
    }
    return frame.log_norm() / static_cast<double>(n_steps);
  });
  return summarize_replicas(std::move(per), n_steps, "norm");
}

LEEstimate estimate_le_furstenberg(const CircleMap& map, const NoiseModel& noise, ProjPoint q0,
                                   std::size_t burn_in, std::size_t n_steps, LEOptions opt) {
  if (n_steps == 0 || opt.n_replicas == 0) throw PreconditionError("need n_steps >= 1 and n_replicas >= 1");
  auto per = map_indexed<double>(opt.n_replicas, opt.exec, [&](std::size_t r) {
    Stream s = noise.substream(r);
    ProjPoint q = q0;
    double sum = 0.0;
    for (std::size_t i = 0; i < burn_in + n_steps; ++i) {
      double w = noise.draw(s);
      double sx = wrap01(q.pos.x + w);
      auto [f, df] = map.eval_and_deriv1(sx);
      double c = std::cos(q.theta), sn = std::sin(q.theta);
      Vec2 v{df * c - sn, c};
      if (i >= burn_in) sum += std::log(std::hypot(v.x, v.y));
      q = {{wrap01(f - q.pos.y), sx}, angle_of(v)};
    }
    return sum / static_cast<double>(n_steps);
  });
  return summarize_replicas(std::move(per), n_steps, "furstenberg");
}

LEEstimate estimate_le_inverse(const CircleMap& map, const NoiseModel& noise, TorusPoint q0, std::size_t n_steps,
                               LEOptions opt) {
  if (n_steps == 0 || opt.n_replicas == 0) throw PreconditionError("need n_steps >= 1 and n_replicas >= 1");
  auto per = map_indexed<double>(opt.n_replicas, opt.exec, [&](std::size_t r) {
    Stream s = noise.substream(r);
    TangentFrame frame(opt.renorm_every);
    TorusPoint p = q0;
    for (std::size_t i = 0; i < n_steps; ++i) {
      double w = noise.draw(s);
      auto [f, df] = map.eval_and_deriv1(p.y);
      frame.push({0.0, 1.0, -1.0, df});
      p = {wrap01(p.y - w), wrap01(f - p.x)};
    }
    return frame.log_norm() / static_cast<double>(n_steps);
  });
  return summarize_replicas(std::move(per), n_steps, "inverse");
}

BlockSVD svd_of(const TangentFrame& frame) {
  const Jacobian2& M = frame.matrix();
  BlockSVD out;
  out.N = frame.steps();
  double s1 = M.sigma1();
  out.log_sigma1 = frame.log_norm_sum() + std::log(s1);
  out.sigma1 = std::exp(out.log_sigma1);
  out.sigma2 = std::exp(frame.log_det() - out.log_sigma1);
  double vplus = 0.5 * std::atan2(2.0 * (M.a * M.b + M.c * M.d), (M.a * M.a + M.c * M.c) - (M.b * M.b + M.d * M.d));
  double uplus = angle_of(M.apply(unit(vplus)));
  out.theta_minus_0 = fold_pi(vplus + 0.5 * kPi);
  out.theta_minus_N = fold_pi(uplus + 0.5 * kPi);
  return out;
}

BlockSVD block_svd(const CircleMap& map, const std::vector<double>& omegas, TorusPoint q0, std::size_t N) {
  if (N == 0) throw PreconditionError("block length must be >= 1");
  if (omegas.size() < N) throw PreconditionError("noise block shorter than N");
  TangentFrame frame(N > 30 ? 1 : 0);
  TorusPoint p = q0;
  for (std::size_t i = 0; i < N; ++i) {
    frame.push(jacobian_F_omega(map, p, omegas[i]));
    p = apply_F_omega(map, p, omegas[i]);
  }
  frame.renormalize();
  return svd_of(frame);
}

double default_m(const CriticalData& crit, double p) {
  return p / (4.0 * crit.k1 * static_cast<double>(crit.m1));
}

std::size_t prescribed_N(const CriticalData& crit, double p, double L, double beta) {
  return static_cast<std::size_t>(std::floor(default_m(crit, p) * std::pow(L, 1.0 - beta)));
}

namespace {

struct DecompAcc {
  double sum = 0.0;
  std::size_t good = 0, good_viol = 0, floor_viol = 0;
  void merge(const DecompAcc& o) {
    sum += o.sum;
    good += o.good;
    good_viol += o.good_viol;
    floor_viol += o.floor_viol;
  }
};

}  // namespace

DecompositionReport integral_decomposition(const CircleMap& map, const CriticalData& crit,
                                           const EmpiricalMeasure& measure, const std::vector<double>& omegas,
                                           std::size_t N, double beta, double p, double m, std::size_t n_samples,
                                           std::uint64_t seed, Exec exec) {
  if (omegas.size() < N + 1) throw PreconditionError("noise block must hold N + 1 values");
  if (measure.total() == 0) throw PreconditionError("empty measure");
  const double L = map.L();
  std::vector<double> cum(measure.counts().size());
  double run = 0.0;
  for (std::size_t i = 0; i < cum.size(); ++i) cum[i] = (run += static_cast<double>(measure.counts()[i]));

  const double psi1 = map.sup_abs(1) / L;
  DecompositionReport rep;
  rep.good_floor = std::log(0.25 * m * L);
  rep.worst_floor = -std::log(2.0 * psi1 * L);
  rep.n_samples = n_samples;
  rep.prescribed_N = prescribed_N(crit, p, L, beta);
  const double thm1_margin = crit.k1 * std::pow(L, -1.0 + beta);
  const double star_margin = crit.k1 * m;
  const std::size_t nx = measure.nx(), ny = measure.ny(), nt = measure.ntheta();

  DecompAcc acc = reduce_indexed(n_samples, exec, DecompAcc{}, [&](DecompAcc& a, std::size_t i) {
    Stream s(seed, i);
    double u = s.next_double() * run;
    auto bin = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    if (bin >= cum.size()) bin = cum.size() - 1;
    std::size_t it = bin % nt, iy = (bin / nt) % ny, ix = bin / (nt * ny);
    ProjPoint q{{(static_cast<double>(ix) + s.next_double()) / static_cast<double>(nx),
                 (static_cast<double>(iy) + s.next_double()) / static_cast<double>(ny)},
                (static_cast<double>(it) + s.next_double()) * kPi / static_cast<double>(nt)};
    bool in_g = true;
    for (std::size_t k = 0; k < N; ++k) {
      if (distance_to_set(q.pos.x + omegas[k], crit.cprime) < thm1_margin) in_g = false;
      q = apply_Fhat(map, q, omegas[k]);
    }
    if (distance_to_set(q.pos.x + omegas[N], crit.cprime) < star_margin) in_g = false;
    double val = log_growth(map, q, omegas[N]);
    a.sum += val;
    bool good = in_g && std::abs(std::tan(q.theta)) <= 1.0;
    if (good) {
      ++a.good;
      if (val < rep.good_floor) ++a.good_viol;
    }
    if (val < rep.worst_floor) ++a.floor_viol;
  });
  double n = static_cast<double>(n_samples);
  rep.I = acc.sum / n;
  rep.good_mass = static_cast<double>(acc.good) / n;
  rep.bad_mass = 1.0 - rep.good_mass;
  rep.good_violations = acc.good_viol;
  rep.floor_violations = acc.floor_viol;
  rep.lower_bound = rep.good_floor - std::log(0.5 * m * psi1 * L * L) * rep.bad_mass;
  return rep;
}

}  // namespace randlyap
