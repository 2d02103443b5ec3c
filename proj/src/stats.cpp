#include "randlyap/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "randlyap/errors.hpp"

namespace randlyap {

double chi_square_sf(double x, std::size_t dof) {
  if (dof == 0) return 1.0;
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, x));
}

ChiSquare chi_square_uniform(const std::vector<std::uint64_t>& counts) {
  ChiSquare r;
  if (counts.size() < 2) return r;
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total <= 0.0) return r;
  double e = total / static_cast<double>(counts.size());
  for (auto c : counts) {
    double d = static_cast<double>(c) - e;
    r.chi2 += d * d / e;
  }
  r.dof = counts.size() - 1;
  r.p_value = chi_square_sf(r.chi2, r.dof);
  return r;
}

ChiSquare chi_square_independence(const std::vector<std::uint64_t>& table, std::size_t rows, std::size_t cols) {
  if (table.size() != rows * cols) throw PreconditionError("contingency table size mismatch");
  std::vector<double> rs(rows, 0.0), cs(cols, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      double v = static_cast<double>(table[i * cols + j]);
      rs[i] += v;
      cs[j] += v;
      total += v;
    }
  ChiSquare r;
  std::size_t nr = 0, nc = 0;
  for (double v : rs) nr += v > 0.0;
  for (double v : cs) nc += v > 0.0;
  if (nr < 2 || nc < 2) return r;
  for (std::size_t i = 0; i < rows; ++i) {
    if (rs[i] == 0.0) continue;
    for (std::size_t j = 0; j < cols; ++j) {
      if (cs[j] == 0.0) continue;
      double e = rs[i] * cs[j] / total;
      double d = static_cast<double>(table[i * cols + j]) - e;
      r.chi2 += d * d / e;
    }
  }
  r.dof = (nr - 1) * (nc - 1);
  r.p_value = chi_square_sf(r.chi2, r.dof);
  return r;
}

double kolmogorov_sf(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KSResult ks_uniform(std::vector<double> samples, double lo, double hi) {
  KSResult r;
  r.n = samples.size();
  if (r.n == 0) return r;
  std::sort(samples.begin(), samples.end());
  double n = static_cast<double>(r.n);
  for (std::size_t i = 0; i < r.n; ++i) {
    double F = std::clamp((samples[i] - lo) / (hi - lo), 0.0, 1.0);
    r.d = std::max(r.d, std::max(static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n));
  }
  double sn = std::sqrt(n);
  r.p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * r.d);
  return r;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v), s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

void BatchMeans::add(double v) {
  batch_sum_ += v;
  if (++in_batch_ == batch_size_) {
    batch_means_.push_back(batch_sum_ / static_cast<double>(batch_size_));
    batch_sum_ = 0.0;
    in_batch_ = 0;
  }
}

MeanEstimate BatchMeans::result() const {
  MeanEstimate r;
  r.n_batches = batch_means_.size();
  r.mean = mean(batch_means_);
  if (r.n_batches > 1) r.std_error = sample_sd(batch_means_) / std::sqrt(static_cast<double>(r.n_batches));
  return r;
}

LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw PreconditionError("linear fit needs two or more paired points");
  double mx = mean(xs), my = mean(ys), sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0.0 && syy > 0.0) ? sxy * sxy / (sxx * syy) : 0.0;
  return f;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) return 0.0;
  double mx = mean(xs), my = mean(ys), sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  return (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
}

}  // namespace randlyap
