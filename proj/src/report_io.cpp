#include "oppaths/report_io.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace oppaths {

namespace {

// Non-finite doubles have no JSON literal; encode them as strings.
Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

Json vec_json(const std::vector<double>& values) {
  Json out = Json::array();
  for (double v : values) out.push_back(number(v));
  return out;
}

}  // namespace

Json to_json(const LatticeParams& params) {
  return Json{{"d", params.d}, {"p", params.p}, {"seed", params.seed}};
}

Json coord_json(const Coord& z, int d) {
  Json out = Json::array();
  for (int i = 0; i < d; ++i) out.push_back(z[static_cast<std::size_t>(i)]);
  return out;
}

Json seeds_json(const SeedRange& seeds) {
  return Json{{"first_index", seeds.first},
              {"end_index", seeds.last},
              {"tried", seeds.tried},
              {"accepted", seeds.accepted}};
}

Json count_report_json(const CountReport& report, const LatticeParams& params) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["params"] = to_json(params);
  out["n"] = report.n;
  out["region"] = report.region.describe(params.d);
  out["mode"] = to_string(report.mode);
  out["total"] = report.exact_total ? Json(to_decimal(*report.exact_total)) : Json(nullptr);
  out["log_total"] = number(report.log_total);
  out["survival_horizon"] = report.survival_horizon ? Json(*report.survival_horizon) : Json(nullptr);
  return out;
}

Json hitting_json(const HittingRecord& record, int d) {
  Json out;
  out["x"] = coord_json(record.x, d);
  out["u_seq"] = record.u_seq;
  Json v = Json::array();
  for (const auto& entry : record.v_seq) v.push_back(entry ? Json(*entry) : Json(nullptr));
  out["v_seq"] = v;
  out["K"] = record.K;
  out["sigma"] = record.sigma ? Json(*record.sigma) : Json(nullptr);
  out["horizon"] = record.horizon;
  out["iter_cap"] = record.iter_cap;
  out["status"] = to_string(record.status);
  return out;
}

Json regen_chain_json(const RegenChain& chain, int d) {
  Json out;
  out["y"] = coord_json(chain.y, d);
  out["h"] = chain.h;
  out["links"] = chain.links();
  out["verified_links"] = chain.verified_links;
  out["status"] = to_string(chain.status);
  out["horizon"] = chain.horizon;
  out["s"] = chain.s_vals;
  out["S"] = chain.S;
  return out;
}

Json estimate_json(const GrowthEstimate& estimate, const LatticeParams& params) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["params"] = to_json(params);
  out["seeds"] = seeds_json(estimate.seeds);
  out["method"] = to_string(estimate.method);
  out["direction"] = vec_json(estimate.direction);
  out["n"] = estimate.n_used;
  out["value"] = number(estimate.value);
  out["stderr"] = number(estimate.std_error);
  out["replicas"] = estimate.replicas;
  out["excluded"] = estimate.excluded;
  out["horizons"] = Json{{"conditioning", estimate.horizon},
                         {"survival_m", estimate.survival_m ? Json(*estimate.survival_m) : Json(nullptr)}};
  if (estimate.mean_layers > 0.0) out["mean_layers"] = estimate.mean_layers;
  out["within_bound"] = estimate.within_bound(params.d, params.p);
  return out;
}

Json shape_json(const ShapeEstimate& shape, const LatticeParams& params) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["params"] = to_json(params);
  out["method"] = shape.method;
  Json entries = Json::array();
  for (const ShapeEntry& e : shape.entries) {
    Json j;
    j["x"] = coord_json(e.x, params.d);
    j["mu"] = number(e.mu);
    j["stderr"] = number(e.std_error);
    j["n_list"] = e.n_list;
    j["means"] = vec_json(e.means);
    j["stderrs"] = vec_json(e.std_errors);
    j["used"] = e.used;
    j["excluded"] = e.excluded;
    entries.push_back(j);
  }
  out["entries"] = entries;
  return out;
}

Json profile_json(const GrowthProfile& profile, const LatticeParams& params) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["params"] = to_json(params);
  out["grid"] = Json{{"resolution", profile.grid.resolution},
                     {"scale", profile.grid.scale},
                     {"notes", profile.grid.notes}};
  Json points = Json::array();
  for (std::size_t i = 0; i < profile.grid.points.size(); ++i) {
    const GridPoint& gp = profile.grid.points[i];
    Json j;
    j["z"] = coord_json(gp.z, params.d);
    j["l"] = gp.l;
    j["y"] = coord_json(gp.y, params.d);
    j["h"] = gp.h;
    j["target"] = vec_json(gp.target);
    j["estimate"] = profile.estimates[i] ? estimate_json(*profile.estimates[i], params) : Json(nullptr);
    points.push_back(j);
  }
  out["points"] = points;
  out["notes"] = profile.notes;
  Json sym = Json::array();
  for (const auto& c : profile.symmetry) {
    sym.push_back(Json{{"a", c.a}, {"b", c.b}, {"difference", number(c.difference)},
                       {"pooled_se", number(c.pooled)}, {"ok", c.ok}});
  }
  out["symmetry"] = sym;
  Json conc = Json::array();
  for (const auto& c : profile.concavity) {
    conc.push_back(Json{{"a", c.a}, {"mid", c.mid}, {"b", c.b}, {"slack", number(c.slack)},
                        {"pooled_se", number(c.pooled)}, {"ok", c.ok}});
  }
  out["concavity"] = conc;
  out["maximum"] = Json{{"center_index", profile.center_index},
                        {"max_index", profile.max_index},
                        {"excess", number(profile.max_excess)},
                        {"pooled_se", number(profile.max_pooled)},
                        {"at_center", profile.max_at_center}};
  return out;
}

Json martingale_json(const MartingaleTrace& trace, const LatticeParams& params) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["params"] = to_json(params);
  out["seeds"] = seeds_json(trace.seeds);
  out["n_max"] = trace.n_max;
  out["replicas"] = trace.replicas;
  out["mean_w"] = vec_json(trace.mean_w);
  out["se_w"] = vec_json(trace.se_w);
  out["median_w"] = vec_json(trace.median_w);
  out["mean_increment"] = vec_json(trace.mean_increment);
  out["se_increment"] = vec_json(trace.se_increment);
  return out;
}

Json tau_tail_json(const TauTailReport& report, const LatticeParams& params) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["params"] = to_json(params);
  out["cap"] = report.cap;
  out["replicas"] = report.replicas;
  out["survived"] = report.survived;
  out["survival_fraction"] = number(report.survival_fraction);
  out["survival_stderr"] = number(report.survival_se);
  if (report.fit) {
    out["fit"] = Json{{"A", number(report.fit->A)}, {"B", number(report.fit->B)},
                      {"points", report.fit->points}};
  } else {
    out["fit"] = nullptr;
    out["fit_note"] = report.fit_note;
  }
  return out;
}

void write_chain_csv(std::ostream& os, const RegenChain& chain) {
  os << "k,s_k,S_k\n";
  for (std::size_t k = 0; k < chain.S.size(); ++k) {
    os << (k + 1) << ',' << chain.s_vals[k] << ',' << chain.S[k] << '\n';
  }
}

void write_count_csv(std::ostream& os, std::span<const CountLayer> layers, int d) {
  os << 't';
  for (int i = 0; i < d; ++i) os << ",z" << (i + 1);
  os << ",count\n";
  for (const CountLayer& layer : layers) {
    const std::size_t volume = layer.window.is_empty() ? 0 : layer.window.volume();
    for (std::size_t i = 0; i < volume; ++i) {
      if (!layer.positive_index(i)) continue;
      const Coord z = layer.window.coord_at(i);
      os << layer.t;
      for (int k = 0; k < d; ++k) os << ',' << z[static_cast<std::size_t>(k)];
      os << ',';
      if (layer.mode == CountMode::Exact) {
        os << to_decimal(layer.exact[i]);
      } else {
        os << fmt(layer.log[i]);
      }
      os << '\n';
    }
  }
}

void write_profile_csv(std::ostream& os, const GrowthProfile& profile, int d) {
  for (int i = 0; i < d; ++i) os << "target" << (i + 1) << ',';
  for (int i = 0; i < d; ++i) os << "y" << (i + 1) << ',';
  os << "h,value,stderr,replicas\n";
  for (std::size_t k = 0; k < profile.grid.points.size(); ++k) {
    const GridPoint& gp = profile.grid.points[k];
    const auto& est = profile.estimates[k];
    for (int i = 0; i < d; ++i) {
      // Realized direction when available, planned target otherwise.
      os << fmt(est ? est->direction[static_cast<std::size_t>(i)] : gp.target[static_cast<std::size_t>(i)]) << ',';
    }
    for (int i = 0; i < d; ++i) os << gp.y[static_cast<std::size_t>(i)] << ',';
    os << gp.h << ',';
    if (est) {
      os << fmt(est->value) << ',' << fmt(est->std_error) << ',' << est->replicas << '\n';
    } else {
      os << ",,0\n";
    }
  }
}

void write_martingale_csv(std::ostream& os, const MartingaleTrace& trace) {
  os << "n,mean_w,se_w,median_w,mean_increment,se_increment\n";
  for (std::size_t n = 0; n < trace.mean_w.size(); ++n) {
    os << n << ',' << fmt(trace.mean_w[n]) << ',' << fmt(trace.se_w[n]) << ',' << fmt(trace.median_w[n]) << ',';
    if (n < trace.mean_increment.size()) {
      os << fmt(trace.mean_increment[n]) << ',' << fmt(trace.se_increment[n]);
    } else {
      os << ',';
    }
    os << '\n';
  }
}

void write_tau_tail_csv(std::ostream& os, const TauTailReport& report) {
  os << "n,p_equal,p_tail,se_tail\n";
  for (const auto& row : report.table) {
    os << row.n << ',' << fmt(row.p_equal) << ',' << fmt(row.p_tail) << ',' << fmt(row.se_tail) << '\n';
  }
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace oppaths
