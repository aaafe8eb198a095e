#include "oppaths/hitting.hpp"

#include <sstream>

#include "oppaths/errors.hpp"

namespace oppaths {

const char* to_string(HittingStatus status) {
  switch (status) {
    case HittingStatus::Success: return "success";
    case HittingStatus::Inconclusive: return "inconclusive";
    case HittingStatus::OriginExtinct: return "origin-extinct";
  }
  return "unknown";
}

namespace {

HittingRecord hitting_impl(const Environment& env, const Coord& x, const HittingCaps& caps,
                           bool check_origin) {
  const int d = env.dim();
  validate_coord(d, x);
  if (caps.survival_horizon < 1) throw ArgumentError("survival horizon must be >= 1");
  if (check_origin && !survives(env, Site{}, caps.survival_horizon)) {
    throw PreconditionError("origin cluster does not survive the conditioning horizon");
  }
  HittingRecord rec;
  rec.x = x;
  rec.horizon = caps.survival_horizon;
  rec.iter_cap = caps.iter_cap;
  rec.u_seq.push_back(0);
  rec.v_seq.emplace_back(0);

  Front front(0, Window::cube(d, Coord{}, 0));
  front.insert(Coord{});
  std::int64_t v = 0;
  for (std::int64_t k = 1;; ++k) {
    if (k > caps.iter_cap) {
      rec.K = k - 1;
      rec.status = HittingStatus::Inconclusive;
      return rec;
    }
    // u_k = first t > v_{k-1} with x occupied by the origin front.
    do {
      if (front.layer() >= caps.layer_cap) {
        rec.K = k - 1;
        rec.status = HittingStatus::Inconclusive;
        return rec;
      }
      front = evolve_front(env, front, BoundaryPolicy::Grow);
      if (front.empty()) {
        rec.K = k - 1;
        rec.status = HittingStatus::OriginExtinct;
        return rec;
      }
    } while (front.layer() <= v || !front.contains(x));
    const std::int64_t u = front.layer();
    rec.u_seq.push_back(u);
    const ExtinctionProbe probe = probe_extinction(env, Site{x, u}, caps.survival_horizon);
    if (probe.survived) {
      rec.v_seq.emplace_back(std::nullopt);
      rec.K = k;
      rec.sigma = u;
      rec.status = HittingStatus::Success;
      return rec;
    }
    v = u + probe.tau;
    rec.v_seq.emplace_back(v);
  }
}

RegenTime regen_impl(const Environment& env, const Coord& y, std::int64_t h,
                     const HittingCaps& caps, bool check_origin) {
  if (h < 1) throw ArgumentError("regen_time requires h >= 1");
  RegenTime out;
  const HittingRecord first = hitting_impl(env, y, caps, check_origin);
  if (!first.ok()) {
    out.status = first.status;
    return out;
  }
  out.sigmas.push_back(*first.sigma);
  Site anchor{y, *first.sigma};
  for (std::int64_t i = 0; i < h; ++i) {
    const HittingRecord rec = hitting_impl(env.anchored_at(anchor), Coord{}, caps, false);
    if (!rec.ok()) {
      out.status = rec.status;
      return out;
    }
    out.sigmas.push_back(*rec.sigma);
    anchor.t += *rec.sigma;
  }
  out.s = anchor.t;
  out.anchor = anchor;
  out.status = HittingStatus::Success;
  return out;
}

}  // namespace

HittingRecord essential_hitting(const Environment& env, const Coord& x, const HittingCaps& caps) {
  return hitting_impl(env, x, caps, true);
}

RegenTime regen_time(const Environment& env, const Coord& y, std::int64_t h,
                     const HittingCaps& caps) {
  return regen_impl(env, y, h, caps, true);
}

RegenChain regen_sequence(const Environment& env, const Coord& y, std::int64_t h,
                          std::int64_t n_links, const HittingCaps& caps) {
  if (n_links < 0) throw ArgumentError("n_links must be >= 0");
  RegenChain chain;
  chain.y = y;
  chain.h = h;
  chain.horizon = caps.survival_horizon;
  Site base{};
  for (std::int64_t k = 0; k < n_links; ++k) {
    const RegenTime link = regen_impl(env.anchored_at(base), y, h, caps, k == 0);
    if (!link.ok()) {
      chain.status = link.status;
      break;
    }
    const Site next{base.z + y, base.t + link.s};
    if (reaches(env, base, next)) ++chain.verified_links;
    chain.s_vals.push_back(link.s);
    chain.S.push_back(next.t);
    chain.points.push_back(next);
    base = next;
  }
  return chain;
}

std::int64_t first_passage_index(const RegenChain& chain, std::int64_t n) {
  if (n <= 0) return 0;
  for (std::size_t k = 0; k < chain.S.size(); ++k) {
    if (chain.S[k] >= n) return static_cast<std::int64_t>(k + 1);
  }
  throw InsufficientChainError("chain of " + std::to_string(chain.S.size()) +
                               " links does not reach level " + std::to_string(n));
}

ConditionedSampler::ConditionedSampler(LatticeParams params, std::int64_t horizon,
                                       std::uint64_t budget, std::uint64_t first_index)
    : params_(params), horizon_(horizon), budget_(budget), index_(first_index) {
  params_.validate();
  if (horizon_ < 1) throw ArgumentError("conditioning horizon must be >= 1");
}

double ConditionedSampler::acceptance_rate() const {
  return tried_ == 0 ? 0.0 : static_cast<double>(accepted_) / static_cast<double>(tried_);
}

ConditionedSample ConditionedSampler::next() {
  for (;;) {
    if (tried_ >= budget_ ||
        (tried_ >= 1000 && static_cast<double>(accepted_) < 1e-3 * static_cast<double>(tried_))) {
      std::ostringstream os;
      os << "conditioned sampling failed: " << accepted_ << " accepted out of " << tried_
         << " tries (rate " << acceptance_rate() << ") at horizon " << horizon_;
      throw SamplingError(os.str());
    }
    const std::uint64_t index = index_++;
    const std::uint64_t seed = derive_subseed(params_.seed, index);
    ++tried_;
    if (survives(Environment(params_.with_seed(seed)), Site{}, horizon_)) {
      ++accepted_;
      return ConditionedSample{index, seed, horizon_, tried_, accepted_};
    }
  }
}

std::vector<ConditionedSample> ConditionedSampler::take(std::size_t count) {
  std::vector<ConditionedSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(next());
  return out;
}

}  // namespace oppaths
