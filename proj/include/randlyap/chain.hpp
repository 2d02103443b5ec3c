#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "randlyap/circle_map.hpp"
#include "randlyap/parallel.hpp"
#include "randlyap/rng.hpp"
#include "randlyap/stats.hpp"
#include "randlyap/torus.hpp"

namespace randlyap {

struct OrbitStep {
  ProjPoint q;     // state after the step
  double omega;    // noise used for the step
};

/// Projectivized random orbit driven by noise.stream(); q is not included.
std::vector<OrbitStep> sample_orbit(const CircleMap& map, const NoiseModel& noise, ProjPoint q0, std::size_t n);

struct Grid2 {
  std::size_t nx = 32;
  std::size_t ny = 32;
};

struct StationarityReport {
  double chi2 = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  std::size_t n_samples = 0;
};

/// Pushes n_samples uniform torus points through `steps` random steps and
/// tests the histogram against Lebesgue. steps = 0 is the null calibration.
StationarityReport stationarity_test(const CircleMap& map, const NoiseModel& noise, std::size_t n_samples,
                                     Grid2 grid, std::size_t steps = 2, Exec exec = Exec::parallel);

/// Smooth test observable on the torus with Lebesgue mean 1/2.
double ergodic_observable(TorusPoint p);

struct ErgodicReport {
  double time_average = 0.0;
  double space_average = 0.5;
  double std_error = 0.0;
  double z = 0.0;
  std::size_t n_steps = 0;
};

/// Single-orbit time average of ergodic_observable with a batch-means error bar.
ErgodicReport ergodic_average_test(const CircleMap& map, const NoiseModel& noise, TorusPoint p0,
                                   std::size_t n_steps, std::size_t n_batches = 100);

/// Histogram on T^2 x [0, pi).
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  EmpiricalMeasure(std::size_t nx, std::size_t ny, std::size_t ntheta);

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t ntheta() const { return nt_; }
  std::uint64_t total() const { return total_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  std::size_t bin_of(const ProjPoint& q) const;
  std::size_t index(std::size_t ix, std::size_t iy, std::size_t it) const { return (ix * ny_ + iy) * nt_ + it; }
  std::uint64_t count(std::size_t ix, std::size_t iy, std::size_t it) const { return counts_[index(ix, iy, it)]; }
  void add(const ProjPoint& q);
  void merge(const EmpiricalMeasure& other);

  std::vector<std::uint64_t> xy_marginal() const;
  std::vector<std::uint64_t> theta_marginal() const;
  /// Mass of theta bins whose centers satisfy |tan| <= 1.
  double mass_tan_le_one() const;
  /// Mass of the theta bin containing pi/2.
  double mass_vertical_bin() const;
  /// Mass of the theta band [pi/4, 3pi/4) (bins fully inside it).
  double mass_band() const;

 private:
  std::size_t nx_ = 0, ny_ = 0, nt_ = 0;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

struct MeasureOptions {
  std::size_t nx = 32, ny = 32, ntheta = 32;
  /// 0 runs one long orbit; otherwise n_samples are split over this many orbits.
  std::size_t n_orbits = 0;
};

/// Histogram of the projectivized chain after burn-in.
EmpiricalMeasure empirical_proj_measure(const CircleMap& map, const NoiseModel& noise, ProjPoint q0,
                                        std::size_t burn_in, std::size_t n_samples, MeasureOptions opt = {},
                                        Exec exec = Exec::parallel);

struct ConcentrationReport {
  double lhs = 0.0;        // mu(A) of the maximizing test set
  double rhs_shape = 0.0;  // L^{-1/4} (1 + Leb(A) / (eps^3 L^2)) for that set
  double ratio = 0.0;      // fitted constant: max over test sets of lhs / rhs_shape
  double band_mass = 0.0;  // mu of the full band pi/4 <= theta < 3pi/4
  std::size_t n_sets = 0;
};

/// Fits the concentration constant over a family of boxes inside the band
/// pi/4 <= theta < 3pi/4: aligned dyadic xy-blocks times dyadic theta ranges.
ConcentrationReport concentration_check(const EmpiricalMeasure& measure, double L, double eps);

/// Chi-square test that the next coarse (x, y) cell is independent of the
/// previous one given the current one, pooled over current cells.
ChiSquare markov_property_test(const CircleMap& map, const NoiseModel& noise, TorusPoint p0, std::size_t n_steps,
                               std::size_t bins = 4);

}  // namespace randlyap
