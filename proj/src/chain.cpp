#include "randlyap/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "randlyap/errors.hpp"

namespace randlyap {

namespace {

constexpr double kPi = std::numbers::pi;

struct Hist {
  std::vector<std::uint64_t> c;
  void merge(const Hist& o) {
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
  }
};

std::size_t bin(double v, std::size_t n) {
  auto i = static_cast<std::size_t>(v * static_cast<double>(n));
  return i < n ? i : n - 1;
}

}  // namespace

std::vector<OrbitStep> sample_orbit(const CircleMap& map, const NoiseModel& noise, ProjPoint q0, std::size_t n) {
  if (n == 0) throw PreconditionError("orbit length must be >= 1");
  std::vector<OrbitStep> out;
  out.reserve(n);
  Stream s = noise.stream();
  ProjPoint q = q0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = noise.draw(s);
    q = apply_Fhat(map, q, w);
    out.push_back({q, w});
  }
  return out;
}

StationarityReport stationarity_test(const CircleMap& map, const NoiseModel& noise, std::size_t n_samples,
                                     Grid2 grid, std::size_t steps, Exec exec) {
  Hist zero{std::vector<std::uint64_t>(grid.nx * grid.ny, 0)};
  Hist h = reduce_indexed(n_samples, exec, zero, [&](Hist& acc, std::size_t i) {
    Stream s = noise.substream(i);
    TorusPoint p{s.next_double(), s.next_double()};
    for (std::size_t k = 0; k < steps; ++k) p = apply_F_omega(map, p, noise.draw(s));
    ++acc.c[bin(p.x, grid.nx) * grid.ny + bin(p.y, grid.ny)];
  });
  ChiSquare cs = chi_square_uniform(h.c);
  return {cs.chi2, cs.dof, cs.p_value, n_samples};
}

double ergodic_observable(TorusPoint p) {
  double c = std::cos(2.0 * kPi * p.x);
  return c * c + 0.5 * std::sin(2.0 * kPi * (p.x + p.y));
}

ErgodicReport ergodic_average_test(const CircleMap& map, const NoiseModel& noise, TorusPoint p0,
                                   std::size_t n_steps, std::size_t n_batches) {
  if (n_batches < 2 || n_steps < n_batches) throw PreconditionError("need at least two batches of one step");
  BatchMeans bm(n_steps / n_batches);
  Stream s = noise.stream();
  TorusPoint p = p0;
  std::size_t used = (n_steps / n_batches) * n_batches;
  for (std::size_t i = 0; i < used; ++i) {
    p = apply_F_omega(map, p, noise.draw(s));
    bm.add(ergodic_observable(p));
  }
  MeanEstimate e = bm.result();
  ErgodicReport r;
  r.time_average = e.mean;
  r.std_error = e.std_error;
  r.n_steps = used;
  r.z = e.std_error > 0.0 ? (e.mean - r.space_average) / e.std_error : 0.0;
  return r;
}

EmpiricalMeasure::EmpiricalMeasure(std::size_t nx, std::size_t ny, std::size_t ntheta)
    : nx_(nx), ny_(ny), nt_(ntheta), counts_(nx * ny * ntheta, 0) {
  if (nx == 0 || ny == 0 || ntheta == 0) throw PreconditionError("histogram dimensions must be positive");
}

std::size_t EmpiricalMeasure::bin_of(const ProjPoint& q) const {
  return index(bin(q.pos.x, nx_), bin(q.pos.y, ny_), bin(q.theta / kPi, nt_));
}

void EmpiricalMeasure::add(const ProjPoint& q) {
  ++counts_[bin_of(q)];
  ++total_;
}

void EmpiricalMeasure::merge(const EmpiricalMeasure& other) {
  if (counts_.empty()) {
    *this = other;
    return;
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
}

std::vector<std::uint64_t> EmpiricalMeasure::xy_marginal() const {
  std::vector<std::uint64_t> out(nx_ * ny_, 0);
  for (std::size_t i = 0; i < nx_ * ny_; ++i)
    for (std::size_t t = 0; t < nt_; ++t) out[i] += counts_[i * nt_ + t];
  return out;
}

std::vector<std::uint64_t> EmpiricalMeasure::theta_marginal() const {
  std::vector<std::uint64_t> out(nt_, 0);
  for (std::size_t i = 0; i < counts_.size(); ++i) out[i % nt_] += counts_[i];
  return out;
}

double EmpiricalMeasure::mass_tan_le_one() const {
  if (total_ == 0) return 0.0;
  auto m = theta_marginal();
  std::uint64_t s = 0;
  for (std::size_t t = 0; t < nt_; ++t) {
    double c = (static_cast<double>(t) + 0.5) * kPi / static_cast<double>(nt_);
    if (std::abs(std::tan(c)) <= 1.0) s += m[t];
  }
  return static_cast<double>(s) / static_cast<double>(total_);
}

double EmpiricalMeasure::mass_vertical_bin() const {
  if (total_ == 0) return 0.0;
  return static_cast<double>(theta_marginal()[bin(0.5, nt_)]) / static_cast<double>(total_);
}

double EmpiricalMeasure::mass_band() const {
  if (total_ == 0) return 0.0;
  auto m = theta_marginal();
  std::uint64_t s = 0;
  for (std::size_t t = 0; t < nt_; ++t) {
    double lo = static_cast<double>(t) / static_cast<double>(nt_), hi = static_cast<double>(t + 1) / static_cast<double>(nt_);
    if (lo >= 0.25 && hi <= 0.75) s += m[t];
  }
  return static_cast<double>(s) / static_cast<double>(total_);
}

EmpiricalMeasure empirical_proj_measure(const CircleMap& map, const NoiseModel& noise, ProjPoint q0,
                                        std::size_t burn_in, std::size_t n_samples, MeasureOptions opt,
                                        Exec exec) {
  if (burn_in < 1000) throw PreconditionError("burn-in must be >= 1000 steps");
  EmpiricalMeasure zero(opt.nx, opt.ny, opt.ntheta);
  auto run = [&](EmpiricalMeasure& acc, Stream s, std::size_t count) {
    ProjPoint q = q0;
    for (std::size_t i = 0; i < burn_in; ++i) q = apply_Fhat(map, q, noise.draw(s));
    for (std::size_t i = 0; i < count; ++i) {
      q = apply_Fhat(map, q, noise.draw(s));
      acc.add(q);
    }
  };
  if (opt.n_orbits == 0) {
    EmpiricalMeasure m = zero;
    run(m, noise.stream(), n_samples);
    return m;
  }
  std::size_t per = n_samples / opt.n_orbits;
  return reduce_indexed(
      opt.n_orbits, exec, zero, [&](EmpiricalMeasure& acc, std::size_t k) { run(acc, noise.substream(k), per); }, 1);
}

ConcentrationReport concentration_check(const EmpiricalMeasure& measure, double L, double eps) {
  ConcentrationReport r;
  const std::size_t nx = measure.nx(), ny = measure.ny(), nt = measure.ntheta();
  if (measure.total() == 0) return r;
  r.band_mass = measure.mass_band();
  std::size_t t0 = (nt + 3) / 4, t1 = (3 * nt) / 4;
  if (t1 <= t0) return r;

  // Inclusive prefix sums over (x, y, theta).
  auto P = [&](std::size_t i, std::size_t j, std::size_t k) { return (i * (ny + 1) + j) * (nt + 1) + k; };
  std::vector<double> S((nx + 1) * (ny + 1) * (nt + 1), 0.0);
  for (std::size_t i = 1; i <= nx; ++i)
    for (std::size_t j = 1; j <= ny; ++j)
      for (std::size_t k = 1; k <= nt; ++k)
        S[P(i, j, k)] = static_cast<double>(measure.count(i - 1, j - 1, k - 1)) + S[P(i - 1, j, k)] +
                        S[P(i, j - 1, k)] + S[P(i, j, k - 1)] - S[P(i - 1, j - 1, k)] - S[P(i - 1, j, k - 1)] -
                        S[P(i, j - 1, k - 1)] + S[P(i - 1, j - 1, k - 1)];
  auto box = [&](std::size_t i0, std::size_t i1, std::size_t j0, std::size_t j1, std::size_t k0, std::size_t k1) {
    return S[P(i1, j1, k1)] - S[P(i0, j1, k1)] - S[P(i1, j0, k1)] - S[P(i1, j1, k0)] + S[P(i0, j0, k1)] +
           S[P(i0, j1, k0)] + S[P(i1, j0, k0)] - S[P(i0, j0, k0)];
  };

  const double total = static_cast<double>(measure.total());
  const double scale = std::pow(L, -0.25);
  const double denom = eps * eps * eps * L * L;
  const std::size_t band = t1 - t0;
  for (std::size_t kx = nx; kx >= 1; kx /= 2) {
    std::size_t ky = std::max<std::size_t>(1, kx * ny / nx);
    for (std::size_t kt = band; kt >= 1; kt /= 2) {
      double leb = (static_cast<double>(kx) / nx) * (static_cast<double>(ky) / ny) * (static_cast<double>(kt) / nt);
      double shape = scale * (1.0 + leb / denom);
      for (std::size_t i0 = 0; i0 + kx <= nx; i0 += kx)
        for (std::size_t j0 = 0; j0 + ky <= ny; j0 += ky)
          for (std::size_t k0 = t0; k0 + kt <= t1; k0 += kt) {
            double mu = box(i0, i0 + kx, j0, j0 + ky, k0, k0 + kt) / total;
            ++r.n_sets;
            double ratio = mu / shape;
            if (ratio > r.ratio) {
              r.ratio = ratio;
              r.lhs = mu;
              r.rhs_shape = shape;
            }
          }
      if (kt == 1) break;
    }
    if (kx == 1) break;
  }
  return r;
}

ChiSquare markov_property_test(const CircleMap& map, const NoiseModel& noise, TorusPoint p0, std::size_t n_steps,
                               std::size_t bins) {
  const std::size_t S = bins * bins;
  std::vector<std::uint64_t> tables(S * S * S, 0);  // [current][previous][next]
  auto state = [&](TorusPoint p) { return bin(p.x, bins) * bins + bin(p.y, bins); };
  Stream s = noise.stream();
  TorusPoint p = p0;
  std::size_t prev = state(p);
  p = apply_F_omega(map, p, noise.draw(s));
  std::size_t cur = state(p);
  for (std::size_t i = 0; i < n_steps; ++i) {
    p = apply_F_omega(map, p, noise.draw(s));
    std::size_t next = state(p);
    ++tables[(cur * S + prev) * S + next];
    prev = cur;
    cur = next;
  }
  ChiSquare pooled;
  for (std::size_t c = 0; c < S; ++c) {
    std::vector<std::uint64_t> t(tables.begin() + static_cast<std::ptrdiff_t>(c * S * S),
                                 tables.begin() + static_cast<std::ptrdiff_t>((c + 1) * S * S));
    ChiSquare part = chi_square_independence(t, S, S);
    pooled.chi2 += part.chi2;
    pooled.dof += part.dof;
  }
  pooled.p_value = chi_square_sf(pooled.chi2, pooled.dof);
  return pooled;
}

}  // namespace randlyap
