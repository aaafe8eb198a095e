#include "oppaths/dynamics.hpp"

#include <algorithm>
#include <cstring>
#include <ostream>
#include <unordered_set>

#include "oppaths/errors.hpp"

namespace oppaths {

namespace {

// One layer of evolution into an explicit target window.
Front evolve_into(const Environment& env, const Front& front, const Window& target,
                  BoundaryPolicy policy) {
  const int d = env.dim();
  const std::int64_t t1 = front.layer() + 1;
  Front next(t1, target);
  const Window& src = front.window();
  front.for_each_index([&](std::size_t i) {
    const Coord z = src.coord_at(i);
    for (int dir = 0; dir < stencil_size(d); ++dir) {
      const Coord w = z + step_offset(dir);
      if (target.contains(w)) {
        if (next.test_index(target.index_of(w))) continue;
        if (env.is_open(z, t1, dir)) next.insert_index(target.index_of(w));
      } else if (policy == BoundaryPolicy::Strict && env.is_open(z, t1, dir)) {
        throw WindowError("cluster reached " + to_string(w, d) + " outside the window at t = " +
                          std::to_string(t1));
      }
    }
  });
  return next;
}

Front filled(std::int64_t t, const Window& w) {
  Front f(t, w);
  const std::size_t v = w.volume();
  for (std::size_t i = 0; i < v; ++i) f.insert_index(i);
  return f;
}

struct DepthKey {
  std::uint64_t packed;
  std::int64_t depth;
  friend bool operator==(const DepthKey&, const DepthKey&) = default;
};

struct DepthKeyHash {
  std::size_t operator()(const DepthKey& k) const noexcept {
    return static_cast<std::size_t>(
        splitmix64_finalizer(k.packed ^ (static_cast<std::uint64_t>(k.depth) * 0x9e3779b97f4a7c15ULL)));
  }
};

}  // namespace

Front evolve_front(const Environment& env, const Front& front, BoundaryPolicy policy) {
  Window target = front.window();
  if (policy == BoundaryPolicy::Grow) {
    const Window box = front.bounding_box();
    target = box.is_empty() ? Window::empty(env.dim()) : box.inflated(1);
  }
  return evolve_into(env, front, target, policy);
}

ClusterTrace run_cluster(const Environment& env, std::span<const Site> start, std::int64_t t_max) {
  const int d = env.dim();
  Window box = Window::empty(d);
  for (const Site& s : start) box = box.hull_with(Window::cube(d, s.z, 0));
  const Window window = box.is_empty() ? box : box.inflated(t_max);
  return run_cluster(env, start, t_max, window, BoundaryPolicy::Strict);
}

ClusterTrace run_cluster(const Environment& env, std::span<const Site> start, std::int64_t t_max,
                         const Window& window, BoundaryPolicy policy) {
  if (t_max < 0) throw ArgumentError("t_max must be >= 0");
  const std::int64_t t0 = start.empty() ? 0 : start.front().t;
  ClusterTrace trace;
  trace.cap = t_max;
  Front first(t0, window);
  for (const Site& s : start) {
    if (s.t != t0) throw ArgumentError("all start sites must share one layer");
    validate_coord(env.dim(), s.z);
    if (window.contains(s.z)) {
      first.insert(s.z);
    } else if (policy == BoundaryPolicy::Strict) {
      throw WindowError("start site outside the window");
    }
  }
  trace.fronts.reserve(static_cast<std::size_t>(t_max + 1));
  trace.fronts.push_back(std::move(first));
  if (trace.fronts.back().empty()) trace.tau = 0;
  for (std::int64_t k = 1; k <= t_max; ++k) {
    const Front& prev = trace.fronts.back();
    if (prev.empty()) {
      trace.fronts.emplace_back(prev.layer() + 1, prev.window());
      continue;
    }
    trace.fronts.push_back(evolve_front(env, prev, policy));
    if (trace.fronts.back().empty() && !trace.tau) trace.tau = k;
  }
  Window hull_window = Window::empty(env.dim());
  for (const Front& f : trace.fronts) hull_window = hull_window.hull_with(f.window());
  trace.hull = Front(t0 + t_max, hull_window);
  for (const Front& f : trace.fronts) trace.hull.merge(f);
  return trace;
}

Front full_front(const Environment& env, const Window& target, std::int64_t t0, std::int64_t t) {
  if (t < t0) throw ArgumentError("full_front requires t >= t0");
  const std::int64_t span = t - t0;
  Front cur = filled(t0, target.inflated(span));
  for (std::int64_t k = 1; k <= span; ++k) {
    cur = evolve_into(env, cur, target.inflated(span - k), BoundaryPolicy::Clip);
  }
  return cur;
}

CoupledZoneReport coupled_zone(const Environment& env, const Site& anchor, std::int64_t n,
                               std::int64_t m, const Window& window, Orientation orientation) {
  if (n < 0 || m < 0) throw ArgumentError("coupled_zone requires n >= 0 and m >= 0");
  const bool reversed = orientation == Orientation::Reversed;
  if (reversed && n + m > anchor.t) {
    throw AddressError("reversed coupled zone needs n + m <= anchor layer");
  }
  const Environment view = env.translated(TranslationVector{anchor.z, anchor.t, reversed});
  const int d = env.dim();
  const std::int64_t last = n + m;

  CoupledZoneReport report;
  report.anchor = anchor;
  report.orientation = orientation;
  report.n = n;
  report.m = m;
  report.window = window;

  // Process started at the origin of the view; its cone never leaves radius `last`.
  Front origin(0, Window::cube(d, Coord{}, last));
  origin.insert(Coord{});
  // Everywhere-started process, exact on `window` at every layer <= last.
  Front full = filled(0, window.inflated(last));
  for (std::int64_t k = 0; k <= last; ++k) {
    if (k > 0) {
      origin = evolve_front(view, origin, BoundaryPolicy::Strict);
      full = evolve_into(view, full, window.inflated(last - k), BoundaryPolicy::Clip);
    }
    if (k >= n) {
      report.origin_fronts.push_back(origin.restricted_to(window));
      report.full_fronts.push_back(full.restricted_to(window));
    }
  }

  report.zone = Front(n, window);
  const std::size_t volume = window.volume();
  for (std::size_t i = 0; i < volume; ++i) {
    bool agree = true;
    for (std::size_t k = 0; k < report.origin_fronts.size() && agree; ++k) {
      agree = report.origin_fronts[k].test_index(i) == report.full_fronts[k].test_index(i);
    }
    if (agree) report.zone.insert_index(i);
  }
  return report;
}

ExtinctionProbe probe_extinction(const Environment& env, const Site& site, std::int64_t horizon) {
  if (horizon < 0) throw ArgumentError("horizon must be >= 0");
  const int d = env.dim();
  ExtinctionProbe result;
  struct Frame {
    Coord z;
    std::int64_t depth;
    int next_dir;
  };
  std::vector<Frame> stack;
  stack.reserve(static_cast<std::size_t>(std::min<std::int64_t>(horizon + 1, 1 << 16)));
  std::unordered_set<DepthKey, DepthKeyHash> visited;
  visited.reserve(512);
  stack.push_back({site.z, 0, 0});
  visited.insert({pack_space(site.z), 0});
  std::int64_t max_depth = 0;
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.depth == horizon) {
      result.survived = true;
      result.visited = visited.size();
      return result;
    }
    if (top.next_dir == stencil_size(d)) {
      stack.pop_back();
      continue;
    }
    const int dir = top.next_dir++;
    if (!env.is_open(top.z, site.t + top.depth + 1, dir)) continue;
    const Coord w = top.z + step_offset(dir);
    const std::int64_t depth = top.depth + 1;
    if (visited.insert({pack_space(w), depth}).second) {
      max_depth = std::max(max_depth, depth);
      stack.push_back({w, depth, 0});
    }
  }
  result.survived = false;
  result.tau = max_depth + 1;
  result.visited = visited.size();
  return result;
}

bool survives(const Environment& env, const Site& site, std::int64_t horizon) {
  if (horizon < 1) throw ArgumentError("survives requires horizon >= 1");
  return probe_extinction(env, site, horizon).survived;
}

bool reaches(const Environment& env, const Site& from, const Site& to) {
  const std::int64_t span = to.t - from.t;
  if (span < 0) return false;
  if (norm_l1(to.z - from.z) > span) return false;
  if (span == 0) return true;
  const int d = env.dim();
  struct Frame {
    Coord z;
    std::int64_t depth;
    int next_dir;
  };
  std::vector<Frame> stack{{from.z, 0, 0}};
  std::unordered_set<DepthKey, DepthKeyHash> visited;
  visited.insert({pack_space(from.z), 0});
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.depth == span) return true;  // only the target is admissible at this depth
    if (top.next_dir == stencil_size(d)) {
      stack.pop_back();
      continue;
    }
    const int dir = top.next_dir++;
    const Coord w = top.z + step_offset(dir);
    const std::int64_t depth = top.depth + 1;
    if (norm_l1(to.z - w) > span - depth) continue;
    if (!env.is_open(top.z, from.t + depth, dir)) continue;
    if (visited.insert({pack_space(w), depth}).second) stack.push_back({w, depth, 0});
  }
  return false;
}

Front survival_mask(const Environment& env, std::int64_t layer, const Window& window,
                    std::int64_t m) {
  if (m < 0) throw ArgumentError("survival horizon must be >= 0");
  const int d = env.dim();
  Front alive = filled(layer + m, window.inflated(m));
  for (std::int64_t j = m - 1; j >= 0; --j) {
    const Window w = window.inflated(j);
    Front cur(layer + j, w);
    const std::size_t volume = w.volume();
    for (std::size_t i = 0; i < volume; ++i) {
      const Coord z = w.coord_at(i);
      for (int dir = 0; dir < stencil_size(d); ++dir) {
        if (alive.contains(z + step_offset(dir)) && env.is_open(z, layer + j + 1, dir)) {
          cur.insert_index(i);
          break;
        }
      }
    }
    alive = std::move(cur);
  }
  return alive;
}

void write_trace_csv(std::ostream& os, const ClusterTrace& trace, int d) {
  os << "t,count";
  for (int i = 0; i < d; ++i) os << ",min_z" << i + 1;
  for (int i = 0; i < d; ++i) os << ",max_z" << i + 1;
  os << '\n';
  for (const Front& f : trace.fronts) {
    os << f.layer() << ',' << f.count();
    const Window box = f.bounding_box();
    const bool blank = box.is_empty();
    for (int i = 0; i < d; ++i) {
      os << ',';
      if (!blank) os << box.lo[i];
    }
    for (int i = 0; i < d; ++i) {
      os << ',';
      if (!blank) os << box.hi[i];
    }
    os << '\n';
  }
}

namespace {
template <class T>
void put_le(std::ostream& os, T value) {
  unsigned char buf[sizeof(T)];
  auto u = static_cast<std::make_unsigned_t<T>>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}
}  // namespace

void write_trace_bits(std::ostream& os, const ClusterTrace& trace, int d) {
  os.write("OPFR", 4);
  put_le<std::uint32_t>(os, 1);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  put_le<std::uint64_t>(os, trace.fronts.size());
  for (const Front& f : trace.fronts) {
    put_le<std::int64_t>(os, f.layer());
    const Window& w = f.window();
    for (int i = 0; i < d; ++i) put_le<std::int32_t>(os, w.lo[i]);
    for (int i = 0; i < d; ++i) put_le<std::int32_t>(os, w.hi[i]);
    const std::size_t volume = w.volume();
    std::vector<unsigned char> bytes((volume + 7) / 8, 0);
    f.for_each_index([&](std::size_t i) { bytes[i >> 3] |= static_cast<unsigned char>(1U << (i & 7)); });
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
}

}  // namespace oppaths
