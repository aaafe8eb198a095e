// Acceptance run: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "oppaths/counting.hpp"
#include "oppaths/dynamics.hpp"
#include "oppaths/estimators.hpp"
#include "oppaths/hitting.hpp"
#include "oppaths/oracle.hpp"
#include "oppaths/stats.hpp"

using namespace oppaths;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const double kLog3 = std::log(3.0);

// 1
Outcome oracle_equivalence() {
  std::size_t compared = 0, bad = 0;
  for (double p : {0.3, 0.7, 1.0}) {
    for (std::uint64_t s = 0; s < 50; ++s) {
      const Environment env(LatticeParams{1, p, derive_subseed(101, s)});
      const auto layers = count_forward(env, 8, CountMode::Exact);
      for (std::int64_t n = 0; n <= 8; ++n) {
        const auto ref = oracle::enumerate_paths_count(env, n);
        const CountLayer& layer = layers[static_cast<std::size_t>(n)];
        std::size_t nonzero = 0;
        for (std::size_t i = 0; i < layer.window.volume(); ++i) {
          const BigCount v = layer.exact[i];
          if (v == 0) continue;
          ++nonzero;
          const auto it = ref.endpoint_counts.find(layer.window.coord_at(i));
          if (it == ref.endpoint_counts.end() || v != it->second) ++bad;
        }
        if (nonzero != ref.endpoint_counts.size()) ++bad;
        ++compared;
      }
    }
  }
  return {bad == 0, std::to_string(compared) + " layers compared, " + std::to_string(bad) + " mismatches"};
}

// 2
Outcome mean_law() {
  RunningStats s;
  for (int r = 0; r < 20000; ++r) {
    const Environment env(LatticeParams{1, 0.7, derive_subseed(202, r)});
    s.push(std::exp(count_region(count_final(env, 10, CountMode::Log), RegionSpec::all()).log_total));
  }
  const double expect = std::pow(2.1, 10);
  const double z = (s.mean() - expect) / s.stderr_of_mean();
  return {std::abs(z) < 3.0, "mean " + fmt("%.2f", s.mean()) + " vs " + fmt("%.2f", expect) + ", z = " + fmt("%.2f", z)};
}

// 3
Outcome martingale_drift() {
  const auto tr = track_martingale(LatticeParams{1, 0.7, 303}, 20, 20000);
  double worst = 0.0;
  for (std::size_t n = 0; n < tr.mean_increment.size(); ++n) {
    worst = std::max(worst, std::abs(tr.mean_increment[n]) / tr.se_increment[n]);
  }
  return {worst < 3.0, "max |mean increment| / se = " + fmt("%.2f", worst) + " over n < 20"};
}

// 4
Outcome p1_closed_forms() {
  bool ok = true;
  std::string why;
  const auto layers = count_forward(Environment(LatticeParams{1, 1.0, 404}), 20, CountMode::Exact);
  BigCount pow3 = 1;
  for (const auto& layer : layers) {
    if (count_region(layer, RegionSpec::all()).exact_total != pow3) {
      ok = false;
      why += " N_n";
    }
    pow3 *= 3;
  }
  const Environment open(LatticeParams{1, 1.0, 404});
  for (std::int32_t x : {0, 1, -1, 3, -3}) {
    const auto rec = essential_hitting(open, Coord{x, 0, 0});
    if (!rec.ok() || *rec.sigma != std::max<std::int64_t>(std::abs(x), 1)) {
      ok = false;
      why += " sigma(" + std::to_string(x) + ")";
    }
  }
  for (std::int32_t x : {1, -1, 3, -3}) {
    const auto e = estimate_mu(LatticeParams{1, 1.0, 404}, Coord{x, 0, 0}, {1, 4, 16}, 3);
    if (std::abs(e.mu - std::abs(x)) > 1e-12) {
      ok = false;
      why += " mu(" + std::to_string(x) + ")";
    }
  }
  const auto a = estimate_alpha0(LatticeParams{1, 1.0, 404}, 64, 4);
  if (std::abs(a.value - kLog3) > 1e-12 || a.std_error > 1e-12) {
    ok = false;
    why += " alpha0";
  }
  return {ok, ok ? "N_n = 3^n to n = 20, sigma, mu and alpha0 = log 3 (|err| " +
                       fmt("%.1e", std::abs(a.value - kLog3)) + ")"
                 : "failed:" + why};
}

// 5
Outcome restart_bound() {
  const int R = 10000;
  ConditionedSampler sampler(LatticeParams{1, 0.7, 505}, kDefaultSurvivalHorizon, 1000000);
  int k_gt_1 = 0, failed = 0;
  for (const auto& s : sampler.take(R)) {
    const auto rec = essential_hitting(Environment(LatticeParams{1, 0.7, s.seed}), Coord{1, 0, 0});
    if (!rec.ok()) {
      ++failed;
      continue;
    }
    k_gt_1 += rec.K > 1;
  }
  const int used = R - failed;
  int died = 0;
  for (int r = 0; r < R; ++r) {
    died += !survives(Environment(LatticeParams{1, 0.7, derive_subseed(5050, r)}), Site{}, kDefaultSurvivalHorizon);
  }
  const double pk = static_cast<double>(k_gt_1) / used;
  const double pt = static_cast<double>(died) / R;
  const double se = std::sqrt(pk * (1 - pk) / used + pt * (1 - pt) / R);
  return {pk <= pt + 3 * se, "P(K>1) = " + fmt("%.4f", pk) + ", P(tau<inf) = " + fmt("%.4f", pt) +
                                 ", 3 se = " + fmt("%.4f", 3 * se)};
}

// 6
Outcome regen_lln() {
  ConditionedSampler sampler(LatticeParams{1, 0.8, 606}, kDefaultSurvivalHorizon, 1000000);
  RunningStats ratio, first;
  int short_chains = 0;
  while (ratio.count() < 200) {
    const auto s = sampler.next();
    const auto chain = regen_sequence(Environment(LatticeParams{1, 0.8, s.seed}), Coord{1, 0, 0}, 1, 500);
    if (!chain.complete(500)) {
      ++short_chains;
      continue;
    }
    ratio.push(static_cast<double>(chain.S.back()) / 500.0);
    first.push(static_cast<double>(chain.s_vals.front()));
  }
  const double rel = std::abs(ratio.mean() - first.mean()) / first.mean();
  return {rel < 0.05, "S_500/500 = " + fmt("%.3f", ratio.mean()) + ", mean s = " + fmt("%.3f", first.mean()) +
                          ", relative error " + fmt("%.4f", rel) + ", " + std::to_string(short_chains) +
                          " truncated chains"};
}

// 7
Outcome growth_stabilization() {
  const LatticeParams params{1, 0.8, 707};
  const auto a = estimate_alpha0(params, 256, 100);
  const auto b = estimate_alpha0(params, 512, 100);
  const double diff = std::abs(a.value - b.value);
  const bool in_range = b.value > 0.0 && b.value <= std::log(2.4) && a.value > 0.0 && a.value <= std::log(2.4);
  return {diff < 0.02 && in_range, "alpha0(256) = " + fmt("%.4f", a.value) + ", alpha0(512) = " + fmt("%.4f", b.value) +
                                       ", diff " + fmt("%.4f", diff)};
}

// 8
Outcome plain_vs_surviving() {
  const auto pair = estimate_alpha0_pair(LatticeParams{1, 0.8, 808}, 256, 100);
  const double diff = std::abs(pair.plain.value - pair.surviving.value);
  const double pooled = pooled_se(pair.plain.std_error, pair.surviving.std_error);
  return {diff < 3 * pooled, "plain " + fmt("%.4f", pair.plain.value) + ", surviving " +
                                 fmt("%.4f", pair.surviving.value) + ", diff " + fmt("%.4f", diff) + " < 3 se " +
                                 fmt("%.4f", 3 * pooled)};
}

// 9
Outcome profile_shape() {
  const LatticeParams params{1, 0.8, 909};
  const std::int64_t l = 4;
  ShapeEstimate shape;
  shape.d = 1;
  for (std::int32_t z : {1, -1, 3, -3}) shape.entries.push_back(estimate_mu(params, Coord{z, 0, 0}, {8, 16, 32}, 100));
  const RunningStats s0 = estimate_sigma0(params, 400);
  const DirectionGrid grid = build_direction_grid(1, l, shape, s0.mean(), 4);
  if (grid.points.size() < 7) return {false, "grid has only " + std::to_string(grid.points.size()) + " points"};
  const GrowthProfile prof = estimate_profile(params, grid, 60, 60);
  std::size_t missing = 0;
  for (const auto& e : prof.estimates) missing += !e.has_value();
  bool sym = !prof.symmetry.empty(), conc = !prof.concavity.empty();
  double worst_sym = 0, worst_conc = 0;
  for (const auto& s : prof.symmetry) {
    sym = sym && s.ok;
    worst_sym = std::max(worst_sym, s.difference / s.pooled);
  }
  for (const auto& c : prof.concavity) {
    conc = conc && c.ok;
    worst_conc = std::max(worst_conc, -c.slack / c.pooled);
  }
  return {missing == 0 && sym && conc && prof.max_at_center,
          std::to_string(grid.points.size()) + " directions; worst symmetry " + fmt("%.2f", worst_sym) +
              " se, worst concavity deficit " + fmt("%.2f", worst_conc) + " se, max excess " +
              fmt("%.4f", prof.max_excess) + " (3 se " + fmt("%.4f", 3 * prof.max_pooled) + ")"};
}

// 10
Outcome subsequence_consistency() {
  const LatticeParams params{1, 0.8, 1010};
  const auto sub = directional_subsequence_estimate(params, Coord{}, 1, 512, 100);
  EstimatorConfig other;
  other.first_index = 1000000;
  const auto a0 = estimate_alpha0(params, 512, 100, std::nullopt, other);
  const double diff = std::abs(sub.value - a0.value);
  const double pooled = pooled_se(sub.std_error, a0.std_error);
  return {diff < 3 * pooled, "subsequence " + fmt("%.4f", sub.value) + ", alpha0 " + fmt("%.4f", a0.value) +
                                 ", diff " + fmt("%.4f", diff) + " < 3 se " + fmt("%.4f", 3 * pooled) +
                                 ", kept fraction " + fmt("%.3f", sub.kept_fraction)};
}

// Fronts by set iteration, checked against the library's front-based zone.
std::vector<std::set<Coord>> set_fronts(const Environment& env, std::set<Coord> cur, std::int64_t layers) {
  std::vector<std::set<Coord>> out{cur};
  for (std::int64_t t = 0; t < layers; ++t) {
    std::set<Coord> next;
    for (const Coord& z : cur) {
      for (int dir = 0; dir < 3; ++dir) {
        if (env.is_open(z, t + 1, dir)) next.insert(z + step_offset(dir));
      }
    }
    cur.swap(next);
    out.push_back(cur);
  }
  return out;
}

// 11
Outcome coupled_zone_property() {
  const std::int64_t n = 32, m = 32;
  const std::int32_t r = 32;
  const Window w = Window::cube(1, Coord{}, r);
  int set_errors = 0, nesting_errors = 0, cert_errors = 0;
  std::size_t zone_sites = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Environment env(LatticeParams{1, 0.8, derive_subseed(1111, s)});
    const auto rep = coupled_zone(env, Site{}, n, m, w);
    const auto wider = coupled_zone(env, Site{}, n, m + 1, w);
    if (!wider.zone.subset_of(rep.zone)) ++nesting_errors;
    zone_sites += rep.zone.count();

    const auto origin = set_fronts(env, {Coord{}}, n + m);
    std::set<Coord> everywhere;
    const std::int32_t reach = r + static_cast<std::int32_t>(n + m);
    for (std::int32_t x = -reach; x <= reach; ++x) everywhere.insert(Coord{x, 0, 0});
    const auto full = set_fronts(env, everywhere, n + m);
    for (std::int32_t x = -r; x <= r; ++x) {
      const Coord z{x, 0, 0};
      bool agree = true;
      for (std::int64_t k = n; k <= n + m; ++k) {
        agree = agree && (origin[k].count(z) == full[k].count(z));
      }
      if (agree != rep.zone.contains(z)) ++set_errors;
      if (rep.zone.contains(z)) {
        for (std::int64_t k = n; k <= n + m; k += 8) {
          if (full[k].count(z) && !reaches(env, Site{}, Site{z, k})) ++cert_errors;
        }
      }
    }
  }
  return {set_errors == 0 && nesting_errors == 0 && cert_errors == 0,
          std::to_string(zone_sites) + " zone sites over 100 configurations; set mismatches " +
              std::to_string(set_errors) + ", nesting failures " + std::to_string(nesting_errors) +
              ", reachability failures " + std::to_string(cert_errors)};
}

// 12
Outcome monotone_coupling() {
  int violations = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::uint64_t seed = derive_subseed(1212, s);
    const Site o{};
    const auto lo = run_cluster(Environment(LatticeParams{1, 0.6, seed}), std::span<const Site>(&o, 1), 200);
    const auto hi = run_cluster(Environment(LatticeParams{1, 0.8, seed}), std::span<const Site>(&o, 1), 200);
    for (std::size_t t = 0; t <= 200; ++t) violations += !lo.fronts[t].subset_of(hi.fronts[t]);
  }
  return {violations == 0, "20 seeds, n <= 200, " + std::to_string(violations) + " violations"};
}

// 13
Outcome martingale_vanishes() {
  const auto tr = track_martingale(LatticeParams{1, 0.8, 1313}, 400, 1000);
  return {tr.median_w[400] < tr.median_w[50],
          "median W_50 = " + fmt("%.4g", tr.median_w[50]) + ", median W_400 = " + fmt("%.4g", tr.median_w[400])};
}

// 14
Outcome manifest_determinism() {
  const fs::path root = fs::temp_directory_path() / "oppaths_acceptance";
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> runs = {
      {"count", "--d", "2", "--p", "0.6", "--n", "40", "--dump", "--seed", "14"},
      {"alpha", "--d", "1", "--p", "0.8", "--n", "64", "--replicas", "10", "--seed", "14"},
      {"sigma", "--d", "1", "--p", "0.8", "--x", "3", "--y", "1", "--links", "20", "--seed", "14"},
      {"martingale", "--d", "1", "--p", "0.7", "--n", "30", "--replicas", "50", "--seed", "14"},
  };
  int bad = 0;
  std::size_t files = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const fs::path a = root / ("run" + std::to_string(i)) / "a";
    const fs::path b = root / ("run" + std::to_string(i)) / "b";
    std::ostringstream sink, err;
    auto args = runs[i];
    args.insert(args.end(), {"--out", a.string()});
    if (cli::run_cli(args, sink, err) != 0) return {false, "run failed: " + err.str()};
    args = runs[i];
    args.insert(args.end(), {"--out", b.string(), "--threads", "2"});
    if (cli::run_cli(args, sink, err) != 0) return {false, "run failed: " + err.str()};
    std::ostringstream rep;
    if (cli::run_cli({"replay", "--manifest", (a / "manifest.json").string()}, rep, err) != 0) ++bad;
    for (const auto& entry : fs::directory_iterator(a)) {
      if (!entry.is_regular_file()) continue;
      auto read = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
      };
      const std::string name = entry.path().filename().string();
      if (read(a / name) != read(b / name) || read(a / name) != read(a / "replay" / name)) ++bad;
      ++files;
    }
  }
  fs::remove_all(root);
  return {bad == 0, std::to_string(files) + " files compared across re-runs and replays, " + std::to_string(bad) +
                        " differences"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"mean law", mean_law},
      {"martingale drift", martingale_drift},
      {"p = 1 closed forms", p1_closed_forms},
      {"restart count bound", restart_bound},
      {"regenerating sums LLN", regen_lln},
      {"growth stabilization", growth_stabilization},
      {"N vs Nbar agreement", plain_vs_surviving},
      {"profile symmetry and concavity", profile_shape},
      {"subsequence consistency", subsequence_consistency},
      {"coupled-zone property", coupled_zone_property},
      {"monotone coupling", monotone_coupling},
      {"W -> 0 in d = 1", martingale_vanishes},
      {"manifest determinism", manifest_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("%s %2zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
