#include "oppaths/counting.hpp"

#include <cmath>
#include <sstream>

#include "oppaths/dynamics.hpp"
#include "oppaths/errors.hpp"
#include "oppaths/stats.hpp"

namespace oppaths {

const char* to_string(CountMode mode) { return mode == CountMode::Exact ? "exact" : "log"; }

BigCount CountLayer::exact_at(const Coord& z) const {
  if (!window.contains(z)) return 0;
  if (mode == CountMode::Exact) return exact[window.index_of(z)];
  const double v = log[window.index_of(z)];
  if (v == kNegInf) return 0;
  throw ArgumentError("exact value requested from a log-mode layer");
}

double CountLayer::log_at(const Coord& z) const {
  if (!window.contains(z)) return kNegInf;
  const std::size_t i = window.index_of(z);
  if (mode == CountMode::Log) return log[i];
  if (exact[i] == 0) return kNegInf;
  // cpp_int -> double saturates beyond ~1e308; fine for reporting purposes.
  const unsigned bits = boost::multiprecision::msb(exact[i]);
  if (bits < 1000) return std::log(exact[i].convert_to<double>());
  const unsigned shift = bits - 60;
  BigCount top = exact[i] >> shift;
  return std::log(top.convert_to<double>()) + shift * std::log(2.0);
}

bool CountLayer::positive_index(std::size_t i) const {
  return mode == CountMode::Exact ? exact[i] != 0 : log[i] != kNegInf;
}

bool CountLayer::positive_at(const Coord& z) const {
  return window.contains(z) && positive_index(window.index_of(z));
}

Window CountLayer::support() const {
  Window box = Window::empty(window.d);
  const std::size_t v = window.volume();
  for (std::size_t i = 0; i < v; ++i) {
    if (positive_index(i)) box = box.hull_with(Window::cube(window.d, window.coord_at(i), 0));
  }
  return box;
}

namespace {

CountLayer seed_layer(int d, const Site& start, CountMode mode) {
  CountLayer layer;
  layer.t = start.t;
  layer.mode = mode;
  layer.window = Window::cube(d, start.z, 0);
  if (mode == CountMode::Exact) {
    layer.exact.assign(1, 1);
  } else {
    layer.log.assign(1, 0.0);
  }
  return layer;
}

// One DP step into `target` (already intersected with any cone constraint).
CountLayer step(const Environment& env, const CountLayer& prev, const Window& target) {
  const int d = env.dim();
  const int k = stencil_size(d);
  CountLayer next;
  next.t = prev.t + 1;
  next.mode = prev.mode;
  next.window = target;
  const std::size_t volume = target.volume();
  if (prev.mode == CountMode::Exact) {
    next.exact.assign(volume, 0);
  } else {
    next.log.assign(volume, kNegInf);
  }
  std::array<double, 2 * kMaxDim + 1> terms{};
  for (std::size_t i = 0; i < volume; ++i) {
    const Coord zt = target.coord_at(i);
    int nterms = 0;
    double top = kNegInf;
    for (int dir = 0; dir < k; ++dir) {
      const Coord zs = zt - step_offset(dir);
      if (!prev.window.contains(zs)) continue;
      const std::size_t j = prev.window.index_of(zs);
      if (!prev.positive_index(j)) continue;
      if (!env.is_open(zs, next.t, dir)) continue;
      if (prev.mode == CountMode::Exact) {
        next.exact[i] += prev.exact[j];
      } else {
        terms[nterms++] = prev.log[j];
        top = std::max(top, prev.log[j]);
      }
    }
    if (prev.mode == CountMode::Log && nterms > 0) {
      double acc = 0.0;
      for (int q = 0; q < nterms; ++q) acc += std::exp(terms[q] - top);
      next.log[i] = top + std::log(acc);
    }
  }
  return next;
}

void check_exact_budget(int d, std::int64_t n, const CountOptions& options) {
  const double bits_per_step = std::log2(static_cast<double>(stencil_size(d)));
  double bytes = 0.0;
  for (std::int64_t t = 0; t <= n; ++t) {
    const double sites = std::pow(2.0 * static_cast<double>(t) + 1.0, d);
    bytes += sites * (static_cast<double>(t) * bits_per_step / 8.0 + sizeof(BigCount));
    if (bytes > static_cast<double>(options.exact_memory_limit)) {
      throw ResourceError("exact-mode counting to n = " + std::to_string(n) +
                          " exceeds the memory guard");
    }
  }
}

Window next_window(const CountLayer& prev) {
  const Window s = prev.support();
  return s.is_empty() ? s : s.inflated(1);
}

}  // namespace

CountStepper::CountStepper(const Environment& env, const Site& start, CountMode mode)
    : env_(env), layer_(seed_layer(env.dim(), start, mode)) {
  validate_coord(env.dim(), start.z);
}

void CountStepper::advance() { layer_ = step(env_, layer_, next_window(layer_)); }

double CountStepper::log_total() const {
  return count_region(layer_, RegionSpec::all()).log_total;
}

std::vector<CountLayer> count_forward(const Environment& env, std::int64_t n, CountMode mode,
                                      const Site& start, const CountOptions& options) {
  if (n < 0) throw ArgumentError("count_forward requires n >= 0");
  validate_coord(env.dim(), start.z);
  if (mode == CountMode::Exact) check_exact_budget(env.dim(), n, options);
  std::vector<CountLayer> layers;
  layers.reserve(static_cast<std::size_t>(n + 1));
  layers.push_back(seed_layer(env.dim(), start, mode));
  for (std::int64_t t = 1; t <= n; ++t) {
    const CountLayer& prev = layers.back();
    layers.push_back(step(env, prev, next_window(prev)));
  }
  return layers;
}

CountLayer count_final(const Environment& env, std::int64_t n, CountMode mode, const Site& start,
                       const CountOptions& options) {
  if (n < 0) throw ArgumentError("count_final requires n >= 0");
  validate_coord(env.dim(), start.z);
  if (mode == CountMode::Exact) check_exact_budget(env.dim(), n, options);
  CountLayer cur = seed_layer(env.dim(), start, mode);
  for (std::int64_t t = 1; t <= n; ++t) cur = step(env, cur, next_window(cur));
  return cur;
}

namespace {

CountLayer count_between(const Environment& env, const Site& from, const Site& to,
                         CountMode mode) {
  const std::int64_t span = to.t - from.t;
  if (span < 0) throw ArgumentError("target layer precedes the source layer");
  const int d = env.dim();
  CountLayer cur = seed_layer(d, from, mode);
  for (std::int64_t k = 1; k <= span; ++k) {
    const Window fwd = next_window(cur);
    if (fwd.is_empty()) return step(env, cur, fwd);
    const Window target = fwd.intersect(Window::cube(d, to.z, span - k));
    cur = step(env, cur, target);
  }
  return cur;
}

}  // namespace

double log_count_between(const Environment& env, const Site& from, const Site& to) {
  if (norm_l1(to.z - from.z) > to.t - from.t) return kNegInf;
  return count_between(env, from, to, CountMode::Log).log_at(to.z);
}

BigCount exact_count_between(const Environment& env, const Site& from, const Site& to) {
  if (norm_l1(to.z - from.z) > to.t - from.t) return 0;
  return count_between(env, from, to, CountMode::Exact).exact_at(to.z);
}

RegionSpec RegionSpec::at(const Coord& z) {
  RegionSpec r;
  r.kind = RegionKind::Point;
  r.point = z;
  return r;
}

RegionSpec RegionSpec::box(const Coord& lo, const Coord& hi) {
  RegionSpec r;
  r.kind = RegionKind::Box;
  r.lo = lo;
  r.hi = hi;
  return r;
}

RegionSpec RegionSpec::scaled_ball(std::array<double, kMaxDim> center, double radius, Norm norm) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw ArgumentError("scaled set radius must be finite and >= 0");
  }
  RegionSpec r;
  r.kind = RegionKind::ScaledSet;
  r.center = center;
  r.radius = radius;
  r.norm = norm;
  return r;
}

bool RegionSpec::contains(const Coord& z, std::int64_t n, int d) const {
  switch (kind) {
    case RegionKind::All:
      return true;
    case RegionKind::Point:
      return z == point;
    case RegionKind::Box:
      for (int i = 0; i < d; ++i) {
        if (z[i] < lo[i] || z[i] > hi[i]) return false;
      }
      return true;
    case RegionKind::ScaledSet: {
      const double scale = static_cast<double>(n);
      double dist = 0.0;
      for (int i = 0; i < d; ++i) {
        const double delta = std::abs(static_cast<double>(z[i]) - scale * center[i]);
        switch (norm) {
          case Norm::L1: dist += delta; break;
          case Norm::Linf: dist = std::max(dist, delta); break;
          case Norm::L2: dist += delta * delta; break;
        }
      }
      if (norm == Norm::L2) dist = std::sqrt(dist);
      const double bound = scale * radius;
      return dist <= bound + 1e-9 * std::max(1.0, bound);
    }
  }
  return false;
}

std::string RegionSpec::describe(int d) const {
  std::ostringstream os;
  switch (kind) {
    case RegionKind::All: return "all";
    case RegionKind::Point: return "point" + to_string(point, d);
    case RegionKind::Box: return "box" + to_string(lo, d) + ":" + to_string(hi, d);
    case RegionKind::ScaledSet: {
      os << "scaled-ball(center=(";
      for (int i = 0; i < d; ++i) os << (i ? "," : "") << center[i];
      os << "),radius=" << radius << ",norm="
         << (norm == Norm::L1 ? "l1" : norm == Norm::Linf ? "linf" : "l2") << ')';
      return os.str();
    }
  }
  return "unknown";
}

CountReport count_region(const CountLayer& layer, const RegionSpec& region) {
  CountReport report;
  report.n = layer.t;
  report.region = region;
  report.mode = layer.mode;
  const int d = layer.window.d;
  const std::size_t volume = layer.window.volume();
  if (layer.mode == CountMode::Exact) {
    BigCount total = 0;
    for (std::size_t i = 0; i < volume; ++i) {
      if (layer.exact[i] != 0 && region.contains(layer.window.coord_at(i), layer.t, d)) {
        total += layer.exact[i];
      }
    }
    report.log_total = total == 0 ? kNegInf : 0.0;
    if (total != 0) {
      CountLayer probe;
      probe.mode = CountMode::Exact;
      probe.window = Window::cube(d, Coord{}, 0);
      probe.exact.assign(1, total);
      report.log_total = probe.log_at(Coord{});
    }
    report.exact_total = std::move(total);
  } else {
    std::vector<double> terms;
    for (std::size_t i = 0; i < volume; ++i) {
      if (layer.log[i] != kNegInf && region.contains(layer.window.coord_at(i), layer.t, d)) {
        terms.push_back(layer.log[i]);
      }
    }
    report.log_total = log_sum_exp(terms);
  }
  return report;
}

CountReport count_region(std::span<const CountLayer> layers, const RegionSpec& region) {
  if (layers.empty()) throw ArgumentError("no layers to sum");
  return count_region(layers.back(), region);
}

std::int64_t default_survival_horizon(std::int64_t n) {
  return std::max<std::int64_t>(1, (n + 3) / 4);
}

void apply_survival_mask(const Environment& env, CountLayer& layer, std::int64_t m) {
  if (layer.window.is_empty()) return;
  const Window support = layer.support();
  if (support.is_empty()) return;
  const Front alive = survival_mask(env, layer.t, support, m);
  const std::size_t volume = layer.window.volume();
  for (std::size_t i = 0; i < volume; ++i) {
    if (!layer.positive_index(i)) continue;
    if (alive.contains(layer.window.coord_at(i))) continue;
    if (layer.mode == CountMode::Exact) {
      layer.exact[i] = 0;
    } else {
      layer.log[i] = kNegInf;
    }
  }
}

CountReport surviving_count(const Environment& env, std::int64_t n, std::int64_t m,
                            const RegionSpec& region, CountMode mode) {
  if (m < 1) throw ArgumentError("surviving_count requires m >= 1");
  CountLayer layer = count_final(env, n, mode);
  apply_survival_mask(env, layer, m);
  CountReport report = count_region(layer, region);
  report.survival_horizon = m;
  return report;
}

bool concat_check(const Environment& env, const Site& a, const Site& b, const Site& c) {
  if (!(a.t < b.t && b.t < c.t)) throw ArgumentError("concat_check requires a.t < b.t < c.t");
  const auto from_a = count_forward(env, c.t - a.t, CountMode::Exact, a);
  const BigCount n_ab = from_a[static_cast<std::size_t>(b.t - a.t)].exact_at(b.z);
  const BigCount n_ac = from_a.back().exact_at(c.z);
  const BigCount n_bc = count_final(env, c.t - b.t, CountMode::Exact, b).exact_at(c.z);
  return n_ac >= n_ab * n_bc;
}

double ldp_ratio(const Environment& env, std::int64_t n, const RegionSpec& region, std::int64_t m) {
  if (n < 1) throw ArgumentError("ldp_ratio requires n >= 1");
  CountLayer layer = count_final(env, n, CountMode::Log);
  if (m > 0) apply_survival_mask(env, layer, m);
  const double all = count_region(layer, RegionSpec::all()).log_total;
  if (all == kNegInf) throw UndefinedRatioError("N_n = 0: the ratio is undefined");
  const double part = count_region(layer, region).log_total;
  if (part == kNegInf) return kNegInf;
  return (part - all) / static_cast<double>(n);
}

std::string to_decimal(const BigCount& value) { return value.str(); }

}  // namespace oppaths
