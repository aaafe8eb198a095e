#include "oppaths/lattice.hpp"

#include <cmath>
#include <sstream>

#include "oppaths/errors.hpp"

namespace oppaths {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Address: return "address";
    case ErrorKind::Boundary: return "boundary";
    case ErrorKind::Window: return "window";
    case ErrorKind::Resource: return "resource";
    case ErrorKind::Sampling: return "sampling";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::InsufficientChain: return "insufficient-chain";
    case ErrorKind::InsufficientHits: return "insufficient-hits";
    case ErrorKind::UndefinedRatio: return "undefined-ratio";
    case ErrorKind::DegenerateFit: return "degenerate-fit";
    case ErrorKind::Domain: return "domain";
  }
  return "unknown";
}

Coord operator+(const Coord& a, const Coord& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

Coord operator-(const Coord& a, const Coord& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

Coord operator-(const Coord& a) { return {-a[0], -a[1], -a[2]}; }

Coord scaled(const Coord& a, std::int64_t k) {
  Coord out{};
  for (int i = 0; i < kMaxDim; ++i) {
    std::int64_t v = a[i] * k;
    if (v > kCoordLimit || v < -kCoordLimit) {
      throw AddressError("scaled coordinate exceeds the packed range");
    }
    out[i] = static_cast<std::int32_t>(v);
  }
  return out;
}

std::int64_t norm_l1(const Coord& z) {
  return std::abs(std::int64_t{z[0]}) + std::abs(std::int64_t{z[1]}) +
         std::abs(std::int64_t{z[2]});
}

std::int64_t norm_linf(const Coord& z) {
  std::int64_t m = 0;
  for (auto v : z) m = std::max<std::int64_t>(m, std::abs(std::int64_t{v}));
  return m;
}

std::string to_string(const Coord& z, int d) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < d; ++i) os << (i ? "," : "") << z[i];
  os << ')';
  return os.str();
}

void LatticeParams::validate() const {
  if (d < 1 || d > kMaxDim) {
    throw ArgumentError("dimension d must lie in [1, 3], got " + std::to_string(d));
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ArgumentError("edge probability p must lie in [0, 1]");
  }
}

Coord step_offset(int dir) {
  Coord off{};
  if (dir > 0) {
    const int axis = (dir - 1) / 2;
    off[axis] = (dir % 2 == 1) ? 1 : -1;
  }
  return off;
}

int opposite_dir(int dir) {
  if (dir == 0) return 0;
  return dir % 2 == 1 ? dir + 1 : dir - 1;
}

int direction_of(int d, const Coord& delta) {
  if (norm_l1(delta) > 1) throw AddressError("step longer than one lattice unit");
  for (int i = 0; i < kMaxDim; ++i) {
    if (delta[i] != 0) {
      if (i >= d) throw AddressError("step along an axis beyond d");
      return delta[i] > 0 ? 2 * i + 1 : 2 * i + 2;
    }
  }
  return 0;
}

void validate_coord(int d, const Coord& z) {
  for (int i = 0; i < kMaxDim; ++i) {
    if (i >= d && z[i] != 0) throw AddressError("nonzero coordinate beyond d");
    if (z[i] > kCoordLimit || z[i] < -kCoordLimit) {
      throw AddressError("coordinate outside |z_i| <= 2^20 - 1");
    }
  }
}

void validate_edge(int d, const EdgeAddress& edge) {
  if (edge.dir < 0 || edge.dir >= stencil_size(d)) {
    throw AddressError("direction index " + std::to_string(edge.dir) +
                       " outside [0, 2d]");
  }
  if (edge.t < 1) throw AddressError("edge target layer must be >= 1");
  validate_coord(d, edge.z);
  validate_coord(d, edge.z + step_offset(edge.dir));
}

std::uint64_t splitmix64_finalizer(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t pack_space(const Coord& z) {
  std::uint64_t packed = 0;
  for (int i = 0; i < kMaxDim; ++i) {
    packed |= (static_cast<std::uint64_t>(static_cast<std::int64_t>(z[i])) & 0x1FFFFFULL)
              << (21 * i);
  }
  return packed;
}

std::uint64_t edge_key(std::uint64_t seed, const EdgeAddress& edge) {
  const std::uint64_t time_word =
      (static_cast<std::uint64_t>(edge.t) << 3) | static_cast<std::uint64_t>(edge.dir);
  const std::uint64_t h =
      splitmix64_finalizer(pack_space(edge.z) ^
                           splitmix64_finalizer(time_word + 0x9e3779b97f4a7c15ULL));
  return splitmix64_finalizer(seed ^ h);
}

double key_to_uniform(std::uint64_t key) {
  return static_cast<double>(key >> 11) * 0x1.0p-53;
}

double edge_uniform(const LatticeParams& params, const EdgeAddress& edge) {
  validate_edge(params.d, edge);
  return key_to_uniform(edge_key(params.seed, edge));
}

bool edge_is_open(const LatticeParams& params, const EdgeAddress& edge) {
  return edge_uniform(params, edge) < params.p;
}

std::uint64_t derive_subseed(std::uint64_t master, std::uint64_t index) {
  return splitmix64_finalizer(master ^ splitmix64_finalizer(index ^ 0xd1b54a32d192ed03ULL));
}

std::vector<Site> stencil(int d, const Site& site, StencilDirection direction) {
  if (site.t < 0) throw BoundaryError("negative layer");
  if (direction == StencilDirection::Backward && site.t < 1) {
    throw BoundaryError("no layer below t = 0");
  }
  const std::int64_t t = direction == StencilDirection::Forward ? site.t + 1 : site.t - 1;
  std::vector<Site> out;
  out.reserve(stencil_size(d));
  for (int dir = 0; dir < stencil_size(d); ++dir) {
    out.push_back(Site{site.z + step_offset(dir), t});
  }
  return out;
}

EdgeAddress remap(const EdgeAddress& edge, const TranslationVector& tv) {
  EdgeAddress out;
  if (!tv.reversed) {
    out = EdgeAddress{edge.z + tv.y, edge.t + tv.h, edge.dir};
  } else {
    // Image edge (z,t-1)->(z+o,t) becomes the source edge
    // (z+o+y, h-t) -> (z+y, h-t+1).
    const Coord o = step_offset(edge.dir);
    out = EdgeAddress{edge.z + o + tv.y, tv.h - edge.t + 1, opposite_dir(edge.dir)};
  }
  if (out.t < 1) {
    throw AddressError("translated edge lands below layer 1 (target layer " +
                       std::to_string(out.t) + ")");
  }
  return out;
}

TranslationVector compose(const TranslationVector& outer, const TranslationVector& inner) {
  const Coord y = inner.y + outer.y;
  if (!inner.reversed && !outer.reversed) return {y, inner.h + outer.h, false};
  if (inner.reversed && !outer.reversed) return {y, inner.h + outer.h, true};
  if (!inner.reversed && outer.reversed) return {y, outer.h - inner.h, true};
  return {y, outer.h - inner.h, false};
}

Environment::Environment(LatticeParams params, TranslationVector view)
    : params_(params), view_(view) {
  params_.validate();
  identity_ = !view_.reversed && view_.h == 0 && view_.y == Coord{};
}

bool Environment::is_open(const EdgeAddress& edge) const {
  const EdgeAddress source = identity_ ? edge : remap(edge, view_);
  if (source.t < 1) throw AddressError("edge target layer must be >= 1");
  if (params_.p >= 1.0) return true;
  if (params_.p <= 0.0) return false;
  return key_to_uniform(edge_key(params_.seed, source)) < params_.p;
}

Environment Environment::translated(const TranslationVector& tv) const {
  if (!tv.reversed && tv.h < 0) {
    throw AddressError("forward translations require h >= 0");
  }
  return Environment(params_, compose(view_, tv));
}

}  // namespace oppaths
