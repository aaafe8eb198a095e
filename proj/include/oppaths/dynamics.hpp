#pragma once

// Occupied fronts, extinction times, the everywhere-started front and coupled
// zones, all over finite windows.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "oppaths/front.hpp"
#include "oppaths/lattice.hpp"

namespace oppaths {

// How evolve_front treats an open edge that leaves the window.
enum class BoundaryPolicy {
  Strict,  // WindowError
  Clip,    // drop the site
  Grow,    // next window = bounding box of the current front inflated by 1
};

inline constexpr std::int64_t kDefaultSurvivalHorizon = 256;

Front evolve_front(const Environment& env, const Front& front,
                   BoundaryPolicy policy = BoundaryPolicy::Strict);

struct ClusterTrace {
  std::vector<Front> fronts;       // t0 .. t0 + t_max
  Front hull;                      // union of all fronts, on the trace window
  std::optional<std::int64_t> tau; // relative extinction layer; empty = survived to cap
  std::int64_t cap = 0;

  bool survived_to_cap() const { return !tau.has_value(); }
};

// Window defaults to the bounding box of `start` inflated by t_max. All start
// sites must share one layer.
ClusterTrace run_cluster(const Environment& env, std::span<const Site> start, std::int64_t t_max);
ClusterTrace run_cluster(const Environment& env, std::span<const Site> start, std::int64_t t_max,
                         const Window& window, BoundaryPolicy policy);

// The everywhere-started front at layer t, restricted to `target`. Exact: layer
// t0 is filled on `target` inflated by (t - t0).
Front full_front(const Environment& env, const Window& target, std::int64_t t0, std::int64_t t);

enum class Orientation { Forward, Reversed };

struct CoupledZoneReport {
  Site anchor;
  Orientation orientation = Orientation::Forward;
  std::int64_t n = 0;
  std::int64_t m = 0;
  Window window;
  Front zone;  // at layer n, on `window`
  // Per layer k = n..n+m, both restricted to `window` (kept for auditing).
  std::vector<Front> origin_fronts;
  std::vector<Front> full_fronts;
};

// Zone of z in `window` where the process started at the anchor agrees with the
// everywhere-started process at every layer n..n+m, in the environment seen
// from the anchor (forward, or time-reversed about the anchor's layer).
CoupledZoneReport coupled_zone(const Environment& env, const Site& anchor, std::int64_t n,
                               std::int64_t m, const Window& window,
                               Orientation orientation = Orientation::Forward);

struct ExtinctionProbe {
  bool survived = false;
  // Layers until extinction (tau of the restarted cluster) when !survived.
  std::int64_t tau = 0;
  std::size_t visited = 0;
};

// Depth-first search for an open path of length `horizon` from `site`. When no
// such path exists, the whole cluster is explored and tau is exact.
ExtinctionProbe probe_extinction(const Environment& env, const Site& site, std::int64_t horizon);

// True iff the cluster of `site` is nonempty `horizon` layers later.
bool survives(const Environment& env, const Site& site, std::int64_t horizon);

// True iff an open path joins `from` to `to`.
bool reaches(const Environment& env, const Site& from, const Site& to);

// Sites z of `window` at `layer` from which an open path of length m exists.
Front survival_mask(const Environment& env, std::int64_t layer, const Window& window,
                    std::int64_t m);

// CSV: t,count,min_z1..,max_z1.. (empty layers leave the bounds blank).
void write_trace_csv(std::ostream& os, const ClusterTrace& trace, int d);
// Binary: "OPFR" u32 version=1, u32 d, u64 layer count; then per layer
// i64 t, i32 lo[d], i32 hi[d], then ceil(volume/8) bytes, row-major, LSB first.
void write_trace_bits(std::ostream& os, const ClusterTrace& trace, int d);

}  // namespace oppaths
