#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "randlyap/chain.hpp"
#include "randlyap/circle_map.hpp"
#include "randlyap/parallel.hpp"
#include "randlyap/rng.hpp"
#include "randlyap/torus.hpp"

namespace randlyap {

/// Running product M_n ... M_1 kept as scale * matrix with scale = exp(log_norm_sum).
class TangentFrame {
 public:
  explicit TangentFrame(std::size_t renorm_every = 25);

  /// Left-multiplies by J.
  void push(const Jacobian2& J);
  /// Divides the matrix by its max-norm and books the factor.
  void renormalize();

  const Jacobian2& matrix() const { return m_; }
  double log_norm_sum() const { return log_norm_sum_; }
  double log_det() const { return log_det_; }
  std::size_t steps() const { return steps_; }
  /// log of the operator norm of the full product.
  double log_norm() const;

 private:
  Jacobian2 m_;
  double log_norm_sum_ = 0.0;
  double log_det_ = 0.0;
  std::size_t steps_ = 0;
  std::size_t renorm_every_;
};

struct LEEstimate {
  double lambda_hat = 0.0;
  double std_error = 0.0;
  std::size_t n_steps = 0;
  std::size_t n_replicas = 0;
  std::vector<double> per_replica;
  std::string method;
};

/// Builds the estimate from per-replica values (mean, sd / sqrt(R)).
LEEstimate summarize_replicas(std::vector<double> per_replica, std::size_t n_steps, std::string method);

struct LEOptions {
  std::size_t n_replicas = 16;
  std::size_t renorm_every = 25;
  Exec exec = Exec::parallel;
};

/// Top exponent from norm growth of the tangent product; replica r uses noise.substream(r).
LEEstimate estimate_le_norm(const CircleMap& map, const NoiseModel& noise, TorusPoint q0, std::size_t n_steps,
                            LEOptions opt = {});

/// Time average of log_growth along the projectivized chain after burn-in.
LEEstimate estimate_le_furstenberg(const CircleMap& map, const NoiseModel& noise, ProjPoint q0,
                                   std::size_t burn_in, std::size_t n_steps, LEOptions opt = {});

/// Top exponent of the inverse cocycle along the backward random orbit.
LEEstimate estimate_le_inverse(const CircleMap& map, const NoiseModel& noise, TorusPoint q0, std::size_t n_steps,
                               LEOptions opt = {});

struct BlockSVD {
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double log_sigma1 = 0.0;
  double theta_minus_0 = 0.0;  // most contracted direction
  double theta_minus_N = 0.0;  // its image
  std::size_t N = 0;
};

/// SVD of scale * M from a frame.
BlockSVD svd_of(const TangentFrame& frame);

/// SVD of the N-step product dF_{w_N} ... dF_{w_1} at q0; uses omegas[0..N-1].
BlockSVD block_svd(const CircleMap& map, const std::vector<double>& omegas, TorusPoint q0, std::size_t N);

struct DecompositionReport {
  double I = 0.0;
  double good_mass = 0.0;
  double bad_mass = 0.0;
  double lower_bound = 0.0;
  double good_floor = 0.0;   // log(m L / 4)
  double worst_floor = 0.0;  // -log(2 |psi'| L)
  std::size_t good_violations = 0;
  std::size_t floor_violations = 0;
  std::size_t n_samples = 0;
  std::size_t prescribed_N = 0;
};

/// Splits the integral of log|dF_{w_{N+1}} u_{theta_N}| against the measure
/// into the good set (G*_N with |tan theta_N| <= 1) and its complement, for
/// fixed omegas[0..N]. Points are drawn uniformly inside histogram bins
/// weighted by their counts.
DecompositionReport integral_decomposition(const CircleMap& map, const CriticalData& crit,
                                           const EmpiricalMeasure& measure, const std::vector<double>& omegas,
                                           std::size_t N, double beta, double p, double m, std::size_t n_samples,
                                           std::uint64_t seed, Exec exec = Exec::parallel);

/// m = p / (4 K1 M1).
double default_m(const CriticalData& crit, double p);
/// floor(m L^{1 - beta}).
std::size_t prescribed_N(const CriticalData& crit, double p, double L, double beta);

}  // namespace randlyap
