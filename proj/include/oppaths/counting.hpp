#pragma once

// Open-path counts by forward dynamic programming, in exact big-integer or
// log-domain arithmetic.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "oppaths/front.hpp"
#include "oppaths/lattice.hpp"

namespace oppaths {

using BigCount = boost::multiprecision::cpp_int;

enum class CountMode { Exact, Log };
const char* to_string(CountMode mode);

// Counts of open paths ending at each site of one layer. Exactly one of
// `exact` / `log` is populated; in log mode zero counts are -inf.
struct CountLayer {
  std::int64_t t = 0;
  CountMode mode = CountMode::Log;
  Window window;
  std::vector<BigCount> exact;
  std::vector<double> log;

  BigCount exact_at(const Coord& z) const;
  double log_at(const Coord& z) const;
  bool positive_at(const Coord& z) const;
  bool positive_index(std::size_t i) const;
  // Window of the nonzero entries.
  Window support() const;
};

struct CountOptions {
  // Estimated footprint above which exact mode refuses to run.
  std::size_t exact_memory_limit = std::size_t{1} << 30;
};

// Advances one layer at a time from a single start site.
class CountStepper {
 public:
  CountStepper(const Environment& env, const Site& start, CountMode mode);
  const CountLayer& layer() const { return layer_; }
  void advance();
  // log of the total over the current layer.
  double log_total() const;

 private:
  Environment env_;
  CountLayer layer_;
};

// Layers t0..t0+n of the counts of open paths from `start`.
std::vector<CountLayer> count_forward(const Environment& env, std::int64_t n, CountMode mode,
                                      const Site& start = Site{}, const CountOptions& options = {});
// Only the last layer, with two rolling buffers.
CountLayer count_final(const Environment& env, std::int64_t n, CountMode mode,
                       const Site& start = Site{}, const CountOptions& options = {});

// log N(from, to); -inf when no open path joins them. The DP is confined to the
// intersection of the forward cone of `from` and the backward cone of `to`.
double log_count_between(const Environment& env, const Site& from, const Site& to);
BigCount exact_count_between(const Environment& env, const Site& from, const Site& to);

enum class RegionKind { All, Point, Box, ScaledSet };
enum class Norm { L1, Linf, L2 };

// Endpoint regions. A scaled set is the closed ball {x : |x - c| <= r} in R^d,
// used as n*A; boundary lattice points are included.
struct RegionSpec {
  RegionKind kind = RegionKind::All;
  Coord point{};
  Coord lo{};
  Coord hi{};
  std::array<double, kMaxDim> center{};
  double radius = 0.0;
  Norm norm = Norm::Linf;

  static RegionSpec all() { return {}; }
  static RegionSpec at(const Coord& z);
  static RegionSpec box(const Coord& lo, const Coord& hi);
  static RegionSpec scaled_ball(std::array<double, kMaxDim> center, double radius, Norm norm);

  bool contains(const Coord& z, std::int64_t n, int d) const;
  std::string describe(int d) const;
};

struct CountReport {
  std::int64_t n = 0;
  RegionSpec region;
  CountMode mode = CountMode::Log;
  std::optional<BigCount> exact_total;  // exact mode only
  double log_total = 0.0;               // -inf for a zero count
  std::optional<std::int64_t> survival_horizon;
};

CountReport count_region(const CountLayer& layer, const RegionSpec& region);
CountReport count_region(std::span<const CountLayer> layers, const RegionSpec& region);

// ceil(0.25 n), at least 1.
std::int64_t default_survival_horizon(std::int64_t n);

// Counts only paths whose endpoint at layer n has an open path of length m onward.
CountReport surviving_count(const Environment& env, std::int64_t n, std::int64_t m,
                            const RegionSpec& region, CountMode mode = CountMode::Log);

// Zeroes entries of `layer` whose site has no open path of length m onward.
void apply_survival_mask(const Environment& env, CountLayer& layer, std::int64_t m);

// Checks N(a,c) >= N(a,b) * N(b,c) on this configuration; requires a.t < b.t < c.t.
bool concat_check(const Environment& env, const Site& a, const Site& b, const Site& c);

// (1/n)(log N_{nA,n} - log N_n); with m > 0 both counts are survival-filtered.
// Returns -inf when the region holds no open path; throws UndefinedRatioError
// when N_n = 0.
double ldp_ratio(const Environment& env, std::int64_t n, const RegionSpec& region,
                 std::int64_t m = 0);

std::string to_decimal(const BigCount& value);

}  // namespace oppaths
