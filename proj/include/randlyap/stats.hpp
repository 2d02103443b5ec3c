#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace randlyap {

struct ChiSquare {
  double chi2 = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

/// Upper tail of the chi-square distribution.
double chi_square_sf(double x, std::size_t dof);

/// Goodness of fit of bin counts against equal expected frequencies.
ChiSquare chi_square_uniform(const std::vector<std::uint64_t>& counts);

/// Test of independence for a contingency table (rows x cols, row-major).
/// Rows and columns with zero total are dropped before counting degrees of freedom.
ChiSquare chi_square_independence(const std::vector<std::uint64_t>& table, std::size_t rows, std::size_t cols);

struct KSResult {
  double d = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// Asymptotic Kolmogorov survival function Q(t) = 2 sum_k (-1)^(k-1) exp(-2 k^2 t^2).
double kolmogorov_sf(double t);

/// One-sample Kolmogorov-Smirnov test against Uniform[lo, hi).
KSResult ks_uniform(std::vector<double> samples, double lo, double hi);

double mean(const std::vector<double>& v);
/// Sample standard deviation (n - 1 denominator).
double sample_sd(const std::vector<double>& v);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_batches = 0;
};

/// Streaming batch-means estimator of a time average and its standard error.
class BatchMeans {
 public:
  explicit BatchMeans(std::size_t batch_size) : batch_size_(batch_size == 0 ? 1 : batch_size) {}
  void add(double v);
  MeanEstimate result() const;

 private:
  std::size_t batch_size_;
  std::size_t in_batch_ = 0;
  double batch_sum_ = 0.0;
  std::vector<double> batch_means_;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys);
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace randlyap
