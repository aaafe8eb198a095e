#pragma once

// JSON and CSV serializers for everything the command line emits. Output is a
// pure function of the inputs (no timestamps, fixed key order), so replays
// can be compared byte for byte.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "oppaths/counting.hpp"
#include "oppaths/dynamics.hpp"
#include "oppaths/estimators.hpp"
#include "oppaths/hitting.hpp"
#include "oppaths/lattice.hpp"

namespace oppaths {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json to_json(const LatticeParams& params);
Json coord_json(const Coord& z, int d);
Json seeds_json(const SeedRange& seeds);

Json count_report_json(const CountReport& report, const LatticeParams& params);
Json hitting_json(const HittingRecord& record, int d);
Json regen_chain_json(const RegenChain& chain, int d);
Json estimate_json(const GrowthEstimate& estimate, const LatticeParams& params);
Json shape_json(const ShapeEstimate& shape, const LatticeParams& params);
Json profile_json(const GrowthProfile& profile, const LatticeParams& params);
Json martingale_json(const MartingaleTrace& trace, const LatticeParams& params);
Json tau_tail_json(const TauTailReport& report, const LatticeParams& params);

// k,s_k,S_k
void write_chain_csv(std::ostream& os, const RegenChain& chain);
// t,z1..,count (exact decimal or log value, nonzero entries only)
void write_count_csv(std::ostream& os, std::span<const CountLayer> layers, int d);
// target1..,y1..,h,value,stderr,replicas
void write_profile_csv(std::ostream& os, const GrowthProfile& profile, int d);
// n,mean_w,se_w,median_w,mean_increment,se_increment
void write_martingale_csv(std::ostream& os, const MartingaleTrace& trace);
// n,p_equal,p_tail,se_tail
void write_tau_tail_csv(std::ostream& os, const TauTailReport& report);

// FNV-1a 64-bit digest, as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace oppaths
