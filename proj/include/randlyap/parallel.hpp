#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace randlyap {

/// Serial runs the plain reference loop; parallel runs the blocked OpenMP kernel.
enum class Exec { serial, parallel };

inline constexpr std::size_t kDefaultBlock = 4096;

namespace detail {
// Keeps the exception raised at the lowest index so rethrow is deterministic.
class FirstError {
 public:
  void capture(std::size_t index) {
#pragma omp critical(randlyap_first_error)
    {
      if (index < index_) {
        index_ = index;
        error_ = std::current_exception();
      }
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::size_t index_ = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error_;
};
}  // namespace detail

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Reduces body(acc, i) over i in [0, n). Acc needs merge(const Acc&).
///
/// The parallel path splits the index range into fixed blocks whose partial
/// accumulators are merged in block order, so its result does not depend on
/// the thread count. The serial path is a single running accumulator; the two
/// agree exactly for integer counts and to rounding for floating sums.
template <class Acc, class Body>
Acc reduce_indexed(std::size_t n, Exec exec, const Acc& zero, Body&& body, std::size_t block = kDefaultBlock) {
  if (exec == Exec::serial || n == 0) {
    Acc acc = zero;
    for (std::size_t i = 0; i < n; ++i) body(acc, i);
    return acc;
  }
  if (block == 0) block = 1;
  const std::int64_t nb = static_cast<std::int64_t>((n + block - 1) / block);
  std::vector<Acc> parts(static_cast<std::size_t>(nb), zero);
  detail::FirstError err;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t b = 0; b < nb; ++b) {
    std::size_t lo = static_cast<std::size_t>(b) * block;
    std::size_t hi = lo + block < n ? lo + block : n;
    Acc& acc = parts[static_cast<std::size_t>(b)];
    try {
      for (std::size_t i = lo; i < hi; ++i) body(acc, i);
    } catch (...) {
      err.capture(lo);
    }
  }
  err.rethrow();
  Acc acc = zero;
  for (const Acc& p : parts) acc.merge(p);
  return acc;
}

/// Evaluates fn(i) for i in [0, n) into a vector; each slot is independent.
template <class T, class Fn>
std::vector<T> map_indexed(std::size_t n, Exec exec, Fn&& fn) {
  std::vector<T> out(n);
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  const std::int64_t nn = static_cast<std::int64_t>(n);
  detail::FirstError err;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < nn; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
    } catch (...) {
      err.capture(static_cast<std::size_t>(i));
    }
  }
  err.rethrow();
  return out;
}

}  // namespace randlyap
