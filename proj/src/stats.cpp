#include "oppaths/stats.hpp"

#include "oppaths/errors.hpp"

namespace oppaths {

double log_sum_exp(std::span<const double> values) {
  double top = kNegInf;
  for (double v : values) top = std::max(top, v);
  if (top == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - top);
  return top + std::log(acc);
}

void RunningStats::push(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double delta = other.mean_ - mean_;
  const double total = na + nb;
  mean_ += delta * nb / total;
  m2_ += other.m2_ + delta * delta * na * nb / total;
  n_ += other.n_;
}

double median(std::vector<double> values) {
  if (values.empty()) throw ArgumentError("median of an empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DegenerateFitError("least squares needs at least two points");
  }
  RunningStats sx, sy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx.push(x[i]);
    sy.push(y[i]);
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - sx.mean()) * (y[i] - sy.mean());
    sxx += (x[i] - sx.mean()) * (x[i] - sx.mean());
  }
  if (sxx <= 0.0) throw DegenerateFitError("least squares needs two distinct abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = sy.mean() - fit.slope * sx.mean();
  fit.points = x.size();
  return fit;
}

Autocorrelation lag1_autocorrelation(std::span<const double> values) {
  Autocorrelation out;
  const std::size_t n = values.size();
  if (n < 3) return out;
  RunningStats s;
  for (double v : values) s.push(v);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = values[i] - s.mean();
    den += a * a;
    if (i + 1 < n) num += a * (values[i + 1] - s.mean());
  }
  out.value = den > 0.0 ? num / den : 0.0;
  out.stderr_under_null = 1.0 / std::sqrt(static_cast<double>(n));
  return out;
}

}  // namespace oppaths
