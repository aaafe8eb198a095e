#pragma once

// Brute-force references at desk scale. Nothing here shares code with the
// dynamic-programming paths it is used to check.

#include <cstdint>
#include <map>
#include <vector>

#include "oppaths/lattice.hpp"

namespace oppaths::oracle {

inline constexpr std::uint64_t kEnumerationGuard = 10'000'000;
inline constexpr int kTinyEdgeGuard = 24;

struct EnumerationResult {
  std::int64_t n = 0;
  std::map<Coord, std::uint64_t> endpoint_counts;  // only endpoints with open paths
  std::uint64_t open_paths = 0;
  std::uint64_t examined = 0;  // (2d+1)^n
};

// Walks every step sequence of length n from the origin and checks each edge.
EnumerationResult enumerate_paths_count(const Environment& env, std::int64_t n);

struct TinyStats {
  std::int64_t n = 0;
  int edges = 0;
  std::vector<double> expected_paths;  // E[N_t], t = 0..n
  // tau_law[k-1] = P(tau = k) for k = 1..n; tau_law[n] = P(tau > n).
  std::vector<double> tau_law;
};

// Exact expectations by summing over all 2^E configurations of the edges that
// can be used by a path of length <= n from the origin.
TinyStats exact_tiny_stats(int d, double p, std::int64_t n);

enum class P1Kind { Growth, Shape, Sigma };

// Closed forms of the all-open lattice (p = 1).
double p1_growth(double t);          // d = 1: log 3 - I(t); DomainError for |t| >= 1
double p1_rate(double t);            // I(t) = sup_l (l t - log((1 + 2 cosh l) / 3))
double p1_shape(const Coord& x);     // |x|_1
std::int64_t p1_sigma(const Coord& x);  // max(|x|_1, 1)
// log of the number of {-1,0,1} step sequences of length n summing to k.
double p1_log_point_count(std::int64_t n, std::int64_t k);

}  // namespace oppaths::oracle
