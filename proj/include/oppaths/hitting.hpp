#pragma once

// Essential hitting times, regenerating times and their partial sums, and the
// rejection sampler that stands in for the law conditioned on survival.
//
// Every infinite time is proxied by survival over a fixed horizon: a restarted
// cluster that is still alive `survival_horizon` layers later counts as
// infinite. The horizon is carried in every record.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oppaths/dynamics.hpp"
#include "oppaths/lattice.hpp"

namespace oppaths {

struct HittingCaps {
  std::int64_t survival_horizon = kDefaultSurvivalHorizon;
  std::int64_t iter_cap = 10000;      // u/v loop turns
  std::int64_t layer_cap = 1 << 20;   // layers of the origin front
};

enum class HittingStatus {
  Success,
  Inconclusive,   // iteration or layer cap reached
  OriginExtinct,  // the origin front died inside the loop (horizon proxy failed)
};
const char* to_string(HittingStatus status);

struct HittingRecord {
  Coord x{};
  std::vector<std::int64_t> u_seq;                // u_0 = 0, u_1, ...
  std::vector<std::optional<std::int64_t>> v_seq; // v_0 = 0; nullopt = infinite
  std::int64_t K = 0;
  std::optional<std::int64_t> sigma;
  std::int64_t horizon = 0;
  std::int64_t iter_cap = 0;
  HittingStatus status = HittingStatus::Inconclusive;

  bool ok() const { return status == HittingStatus::Success; }
};

// Runs the u_k / v_k loop for target x in `env` (whose origin must survive the
// horizon; PreconditionError otherwise).
HittingRecord essential_hitting(const Environment& env, const Coord& x, const HittingCaps& caps = {});

struct RegenTime {
  std::int64_t s = 0;
  Site anchor;                        // (y, s) relative to the starting origin
  std::vector<std::int64_t> sigmas;   // sigma(y), then h values of sigma(0)
  HittingStatus status = HittingStatus::Inconclusive;

  bool ok() const { return status == HittingStatus::Success; }
};

// s(y,h) = sigma(y) followed by h values of sigma(0), each in the environment
// re-anchored at the previous regeneration point.
RegenTime regen_time(const Environment& env, const Coord& y, std::int64_t h,
                     const HittingCaps& caps = {});

struct RegenChain {
  Coord y{};
  std::int64_t h = 1;
  std::vector<std::int64_t> s_vals;   // s o hat-theta^k, k = 0..links-1
  std::vector<std::int64_t> S;        // S_1..S_links
  std::vector<Site> points;           // (k y, S_k), k = 1..links
  std::int64_t verified_links = 0;    // links confirmed by a fresh reachability check
  HittingStatus status = HittingStatus::Success;
  std::int64_t horizon = 0;

  std::int64_t links() const { return static_cast<std::int64_t>(S.size()); }
  bool complete(std::int64_t wanted) const { return status == HittingStatus::Success && links() >= wanted; }
};

// Iterates regen_time under the hat-translation. A failing link truncates the
// chain and records its status.
RegenChain regen_sequence(const Environment& env, const Coord& y, std::int64_t h,
                          std::int64_t n_links, const HittingCaps& caps = {});

// phi(n) = min{k : S_k >= n} with S_0 = 0.
std::int64_t first_passage_index(const RegenChain& chain, std::int64_t n);

struct ConditionedSample {
  std::uint64_t index = 0;  // sub-seed index
  std::uint64_t seed = 0;   // derived sub-seed
  std::int64_t horizon = 0;
  std::uint64_t tried = 0;    // tally when this sample was accepted
  std::uint64_t accepted = 0;
};

// Rejection sampler over sub-seeds of a master seed: a sub-seed is accepted
// when the origin cluster survives `horizon` layers.
class ConditionedSampler {
 public:
  ConditionedSampler(LatticeParams params, std::int64_t horizon, std::uint64_t budget,
                     std::uint64_t first_index = 0);

  // Throws SamplingError when the budget is exhausted or when acceptance has
  // fallen below 1e-3 after at least 1000 tries.
  ConditionedSample next();
  std::vector<ConditionedSample> take(std::size_t count);

  std::uint64_t tried() const { return tried_; }
  std::uint64_t accepted() const { return accepted_; }
  double acceptance_rate() const;
  std::int64_t horizon() const { return horizon_; }
  std::uint64_t next_index() const { return index_; }

 private:
  LatticeParams params_;
  std::int64_t horizon_;
  std::uint64_t budget_;
  std::uint64_t index_;
  std::uint64_t tried_ = 0;
  std::uint64_t accepted_ = 0;
};

}  // namespace oppaths
