#pragma once

// Lattice geometry of Z^d x N and the seeded Bernoulli edge environment.
//
// Every edge joins (z, t-1) to (z + offset(dir), t). The environment is a pure
// function of (seed, edge address): nothing is stored, so any layer can be
// queried in any order, and two values of p at the same seed are coupled
// monotonically.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace oppaths {

inline constexpr int kMaxDim = 3;
// Coordinates are packed into 21-bit two's-complement fields.
inline constexpr std::int32_t kCoordLimit = (1 << 20) - 1;

// Spatial coordinate; axes >= d are always zero.
using Coord = std::array<std::int32_t, kMaxDim>;

Coord operator+(const Coord& a, const Coord& b);
Coord operator-(const Coord& a, const Coord& b);
Coord operator-(const Coord& a);
Coord scaled(const Coord& a, std::int64_t k);
std::int64_t norm_l1(const Coord& z);
std::int64_t norm_linf(const Coord& z);
std::string to_string(const Coord& z, int d);

struct LatticeParams {
  int d = 1;
  double p = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
  LatticeParams with_seed(std::uint64_t s) const { return {d, p, s}; }
  LatticeParams with_p(double q) const { return {d, q, seed}; }
};

struct Site {
  Coord z{};
  std::int64_t t = 0;

  friend bool operator==(const Site&, const Site&) = default;
};

// Edge from (z, t-1) to (z + offset(dir), t).
struct EdgeAddress {
  Coord z{};
  std::int64_t t = 1;
  int dir = 0;

  friend bool operator==(const EdgeAddress&, const EdgeAddress&) = default;
};

// Forward: image (z,t) reads the source at (z+y, t+h).
// Reversed: image site (w,k) reads the source site (w+y, h-k), edges flipped.
struct TranslationVector {
  Coord y{};
  std::int64_t h = 0;
  bool reversed = false;

  friend bool operator==(const TranslationVector&, const TranslationVector&) = default;
};

inline constexpr int stencil_size(int d) { return 2 * d + 1; }

// dir 0 -> 0, dir 2i+1 -> +e_i, dir 2i+2 -> -e_i.
Coord step_offset(int dir);
int opposite_dir(int dir);
// Inverse of step_offset; throws AddressError when |delta|_1 > 1.
int direction_of(int d, const Coord& delta);

void validate_coord(int d, const Coord& z);
void validate_edge(int d, const EdgeAddress& edge);

// Hash contract. These are part of the external interface; changing them
// changes every simulated environment.
std::uint64_t splitmix64_finalizer(std::uint64_t x);
std::uint64_t pack_space(const Coord& z);
std::uint64_t edge_key(std::uint64_t seed, const EdgeAddress& edge);
double key_to_uniform(std::uint64_t key);

double edge_uniform(const LatticeParams& params, const EdgeAddress& edge);
bool edge_is_open(const LatticeParams& params, const EdgeAddress& edge);

// Replica seeds split from one master seed.
std::uint64_t derive_subseed(std::uint64_t master, std::uint64_t index);

enum class StencilDirection { Forward, Backward };
std::vector<Site> stencil(int d, const Site& site, StencilDirection direction);

EdgeAddress remap(const EdgeAddress& edge, const TranslationVector& tv);
// compose(outer, inner): the translation equal to applying `inner` to the
// address first and then `outer`.
TranslationVector compose(const TranslationVector& outer, const TranslationVector& inner);

// A view of the environment seen through a translation. Cheap to copy.
class Environment {
 public:
  Environment() = default;
  explicit Environment(LatticeParams params, TranslationVector view = {});

  const LatticeParams& params() const { return params_; }
  const TranslationVector& view() const { return view_; }
  int dim() const { return params_.d; }
  double p() const { return params_.p; }

  bool is_open(const EdgeAddress& edge) const;
  // Edge leaving (from, t_target-1) in direction dir.
  bool is_open(const Coord& from, std::int64_t t_target, int dir) const {
    return is_open(EdgeAddress{from, t_target, dir});
  }

  // Environment seen from `site` as the new origin.
  Environment translated(const TranslationVector& tv) const;
  Environment anchored_at(const Site& site) const {
    return translated(TranslationVector{site.z, site.t, false});
  }

 private:
  LatticeParams params_{};
  TranslationVector view_{};
  bool identity_ = true;
};

}  // namespace oppaths
