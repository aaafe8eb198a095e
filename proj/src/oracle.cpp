#include "oppaths/oracle.hpp"

#include <cmath>
#include <bit>

#include "oppaths/errors.hpp"
#include "oppaths/stats.hpp"

namespace oppaths::oracle {

EnumerationResult enumerate_paths_count(const Environment& env, std::int64_t n) {
  if (n < 0) throw ArgumentError("enumeration length must be >= 0");
  const int k = stencil_size(env.dim());
  double total = std::pow(static_cast<double>(k), static_cast<double>(n));
  if (total > static_cast<double>(kEnumerationGuard)) {
    throw ResourceError("(2d+1)^n exceeds the enumeration guard of 1e7 sequences");
  }
  EnumerationResult out;
  out.n = n;
  std::vector<int> steps(static_cast<std::size_t>(n), 0);
  for (;;) {
    ++out.examined;
    Coord z{};
    bool open = true;
    for (std::int64_t i = 0; i < n && open; ++i) {
      open = env.is_open(EdgeAddress{z, i + 1, steps[static_cast<std::size_t>(i)]});
      z = z + step_offset(steps[static_cast<std::size_t>(i)]);
    }
    if (open) {
      ++out.endpoint_counts[z];
      ++out.open_paths;
    }
    // Odometer increment.
    std::int64_t pos = 0;
    while (pos < n && ++steps[static_cast<std::size_t>(pos)] == k) {
      steps[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  return out;
}

TinyStats exact_tiny_stats(int d, double p, std::int64_t n) {
  LatticeParams{d, p, 0}.validate();
  if (n < 1) throw ArgumentError("exact_tiny_stats requires n >= 1");
  const int k = stencil_size(d);
  // Sources that a path can occupy at layer t-1 lie in the l1 ball of radius t-1.
  std::vector<EdgeAddress> edges;
  for (std::int64_t t = 1; t <= n; ++t) {
    const std::int32_t r = static_cast<std::int32_t>(t - 1);
    std::vector<Coord> ball;
    for (std::int32_t a = -r; a <= r; ++a) {
      for (std::int32_t b = (d >= 2 ? -r : 0); b <= (d >= 2 ? r : 0); ++b) {
        for (std::int32_t c = (d >= 3 ? -r : 0); c <= (d >= 3 ? r : 0); ++c) {
          const Coord z{a, b, c};
          if (norm_l1(z) <= r) ball.push_back(z);
        }
      }
    }
    for (const Coord& z : ball) {
      for (int dir = 0; dir < k; ++dir) {
        edges.push_back(EdgeAddress{z, t, dir});
        if (edges.size() > static_cast<std::size_t>(kTinyEdgeGuard)) {
          throw ResourceError("configuration exhaustion limited to 24 edges");
        }
      }
    }
  }
  TinyStats out;
  out.n = n;
  out.edges = static_cast<int>(edges.size());
  out.expected_paths.assign(static_cast<std::size_t>(n + 1), 0.0);
  out.tau_law.assign(static_cast<std::size_t>(n + 1), 0.0);
  const std::uint64_t configs = std::uint64_t{1} << edges.size();
  for (std::uint64_t mask = 0; mask < configs; ++mask) {
    const int open_count = std::popcount(mask);
    const double weight = std::pow(p, open_count) *
                          std::pow(1.0 - p, static_cast<int>(edges.size()) - open_count);
    if (weight == 0.0) continue;
    auto is_open = [&](const Coord& z, std::int64_t t, int dir) {
      for (std::size_t e = 0; e < edges.size(); ++e) {
        if (edges[e].t == t && edges[e].dir == dir && edges[e].z == z) return ((mask >> e) & 1U) != 0;
      }
      return false;
    };
    std::map<Coord, double> layer{{Coord{}, 1.0}};
    out.expected_paths[0] += weight;
    std::int64_t tau = 0;
    for (std::int64_t t = 1; t <= n; ++t) {
      std::map<Coord, double> next;
      for (const auto& [z, c] : layer) {
        for (int dir = 0; dir < k; ++dir) {
          if (is_open(z, t, dir)) next[z + step_offset(dir)] += c;
        }
      }
      layer.swap(next);
      double total = 0.0;
      for (const auto& entry : layer) total += entry.second;
      out.expected_paths[static_cast<std::size_t>(t)] += weight * total;
      if (layer.empty() && tau == 0) tau = t;
    }
    out.tau_law[static_cast<std::size_t>(tau == 0 ? n : tau - 1)] += weight;
  }
  return out;
}

double p1_rate(double t) {
  if (!(std::abs(t) < 1.0)) throw DomainError("p = 1 growth profile defined for |t| < 1");
  // f(l) = l t - log((1 + 2 cosh l) / 3) is concave; bracket the root of f'.
  auto slope = [t](double l) { return t - 2.0 * std::sinh(l) / (1.0 + 2.0 * std::cosh(l)); };
  double lo = -1.0, hi = 1.0;
  while (slope(lo) < 0.0) lo *= 2.0;
  while (slope(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double l = 0.5 * (lo + hi);
  return l * t - std::log((1.0 + 2.0 * std::cosh(l)) / 3.0);
}

double p1_growth(double t) { return std::log(3.0) - p1_rate(t); }

double p1_shape(const Coord& x) { return static_cast<double>(norm_l1(x)); }

std::int64_t p1_sigma(const Coord& x) { return std::max<std::int64_t>(norm_l1(x), 1); }

double p1_log_point_count(std::int64_t n, std::int64_t k) {
  k = std::abs(k);
  if (k > n) return kNegInf;
  // j steps of -1, j + k of +1, n - 2j - k of 0.
  std::vector<double> terms;
  for (std::int64_t j = 0; 2 * j + k <= n; ++j) {
    terms.push_back(std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(j + 1)) -
                    std::lgamma(static_cast<double>(j + k + 1)) -
                    std::lgamma(static_cast<double>(n - 2 * j - k + 1)));
  }
  return log_sum_exp(terms);
}

}  // namespace oppaths::oracle
