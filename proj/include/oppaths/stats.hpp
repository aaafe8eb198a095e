#pragma once

// Numeric helpers shared by the counting and estimation layers.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace oppaths {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// Max-shifted log-sum-exp; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> values);

// Welford accumulator; merge() is associative so replicas reduce in any order.
class RunningStats {
 public:
  void push(double x);
  void merge(const RunningStats& other);

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stddev() const { return std::sqrt(variance()); }
  double stderr_of_mean() const {
    return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

double median(std::vector<double> values);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  std::size_t points = 0;
};

// Ordinary least squares y = intercept + slope * x. Needs >= 2 distinct x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

// Lag-1 autocorrelation and its null standard error 1/sqrt(n).
struct Autocorrelation {
  double value = 0.0;
  double stderr_under_null = 0.0;
};
Autocorrelation lag1_autocorrelation(std::span<const double> values);

// sqrt(a^2 + b^2).
inline double pooled_se(double a, double b) { return std::sqrt(a * a + b * b); }

// Runs fn(i) for i in [0, count) on `threads` workers; results are stored by
// index so the output is independent of scheduling.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, unsigned threads, Fn&& fn) {
  std::vector<T> out(count);
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  pool.reserve(n);
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace oppaths
