#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "oppaths/counting.hpp"
#include "oppaths/dynamics.hpp"
#include "oppaths/errors.hpp"
#include "oppaths/estimators.hpp"
#include "oppaths/hitting.hpp"
#include "oppaths/oracle.hpp"
#include "oppaths/report_io.hpp"

namespace oppaths::cli {

namespace fs = std::filesystem;

double default_p(int d) {
  switch (d) {
    case 1: return 0.75;
    case 2: return 0.5;
    case 3: return 0.4;
    default: throw ArgumentError("dimension d must lie in [1, 3], got " + std::to_string(d));
  }
}

namespace {

// Flags shared by every experiment subcommand.
struct Common {
  int d = 1;
  std::optional<double> p;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out_dir;
  std::int64_t horizon = kDefaultSurvivalHorizon;

  LatticeParams params() const {
    LatticeParams lp{d, p ? *p : default_p(d), seed};
    lp.validate();
    return lp;
  }
  EstimatorConfig config() const {
    EstimatorConfig cfg;
    cfg.horizon = horizon;
    cfg.threads = std::max(1u, threads);
    return cfg;
  }
};

// Files produced by one run, written only after the command succeeded.
struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;
  Json manifest_extra = Json::object();

  void add(const std::string& name, const std::string& bytes) { files.emplace_back(name, bytes); }
  void add_json(const std::string& name, const Json& j) { add(name, j.dump(2) + "\n"); }
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

std::int64_t parse_int(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw ArgumentError("not an integer: '" + s + "'");
  }
  if (used != s.size()) throw ArgumentError("not an integer: '" + s + "'");
  return v;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ArgumentError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ArgumentError("not a number: '" + s + "'");
  return v;
}

Coord parse_coord(const std::string& s, int d) {
  const auto parts = split(s, ',');
  if (static_cast<int>(parts.size()) != d) {
    throw ArgumentError("expected " + std::to_string(d) + " comma-separated coordinates, got '" + s + "'");
  }
  Coord z{};
  for (int i = 0; i < d; ++i) {
    const std::int64_t v = parse_int(parts[static_cast<std::size_t>(i)]);
    if (v < -kCoordLimit || v > kCoordLimit) throw AddressError("coordinate out of range: " + s);
    z[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(v);
  }
  return z;
}

std::vector<std::int64_t> parse_int_list(const std::string& s) {
  std::vector<std::int64_t> out;
  for (const auto& part : split(s, ',')) out.push_back(parse_int(part));
  if (out.empty()) throw ArgumentError("empty integer list");
  return out;
}

// all | point:Z | box:LO:HI | ball:C:R[:l1|linf|l2]  (Z, LO, HI, C comma-separated)
RegionSpec parse_region(const std::string& s, int d) {
  const auto parts = split(s, ':');
  const std::string& kind = parts[0];
  if (kind == "all" && parts.size() == 1) return RegionSpec::all();
  if (kind == "point" && parts.size() == 2) return RegionSpec::at(parse_coord(parts[1], d));
  if (kind == "box" && parts.size() == 3) {
    return RegionSpec::box(parse_coord(parts[1], d), parse_coord(parts[2], d));
  }
  if (kind == "ball" && (parts.size() == 3 || parts.size() == 4)) {
    const auto cs = split(parts[1], ',');
    if (static_cast<int>(cs.size()) != d) throw ArgumentError("ball center needs d coordinates");
    std::array<double, kMaxDim> c{};
    for (int i = 0; i < d; ++i) c[static_cast<std::size_t>(i)] = parse_double(cs[static_cast<std::size_t>(i)]);
    Norm norm = Norm::Linf;
    if (parts.size() == 4) {
      if (parts[3] == "l1") {
        norm = Norm::L1;
      } else if (parts[3] == "l2") {
        norm = Norm::L2;
      } else if (parts[3] != "linf") {
        throw ArgumentError("unknown norm '" + parts[3] + "'");
      }
    }
    return RegionSpec::scaled_ball(c, parse_double(parts[2]), norm);
  }
  throw ArgumentError("cannot parse region '" + s + "'");
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Argument:
    case ErrorKind::Address:
    case ErrorKind::Boundary:
    case ErrorKind::Domain:
      return kExitUsage;
    case ErrorKind::Window:
    case ErrorKind::Resource:
      return kExitResource;
    case ErrorKind::Sampling:
    case ErrorKind::Precondition:
    case ErrorKind::InsufficientChain:
    case ErrorKind::InsufficientHits:
    case ErrorKind::UndefinedRatio:
    case ErrorKind::DegenerateFit:
      return kExitSampling;
  }
  return kExitFailure;
}

void emit_error(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  Json j;
  j["error"] = Json{{"kind", kind}, {"message", message}};
  j["exit_code"] = code;
  err << j.dump() << '\n';
}

// Arguments to record in a manifest: everything except output placement and
// the worker count, which do not affect the bytes produced.
std::vector<std::string> recordable_args(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--out" || a == "--threads") {
      ++i;
      continue;
    }
    if (a.rfind("--out=", 0) == 0 || a.rfind("--threads=", 0) == 0) continue;
    out.push_back(a);
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ResourceError("cannot write " + path.string());
  os << bytes;
  if (!os) throw ResourceError("write failed for " + path.string());
}

void write_artifacts(const Common& c, const std::string& command, const std::vector<std::string>& args,
                     const Artifacts& art) {
  if (c.out_dir.empty()) return;
  const fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ResourceError("cannot create " + dir.string() + ": " + ec.message());
  Json outputs = Json::object();
  for (const auto& [name, bytes] : art.files) {
    write_file(dir / name, bytes);
    outputs[name] = fnv1a64_hex(bytes);
  }
  Json m;
  m["schema_version"] = kSchemaVersion;
  m["tool_version"] = kToolVersion;
  m["command"] = command;
  m["args"] = recordable_args(args);
  m["params"] = to_json(c.params());
  m["horizon"] = c.horizon;
  for (const auto& [key, value] : art.manifest_extra.items()) m[key] = value;
  m["outputs"] = outputs;
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

Json with_meta(Json body, const std::string& command) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  for (const auto& [key, value] : body.items()) {
    if (key != "schema_version") j[key] = value;
  }
  return j;
}

void add_common(CLI::App* sub, Common& c) {
  sub->set_help_flag("--help", "print this help");
  sub->add_option("--d", c.d, "lattice dimension (1..3)")->capture_default_str();
  sub->add_option("--p", c.p, "edge probability (default: calibrated per d)");
  sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
  sub->add_option("--threads", c.threads, "worker threads")->capture_default_str();
  sub->add_option("--out", c.out_dir, "output directory (files + manifest.json)");
  sub->add_option("--horizon", c.horizon, "survival horizon standing in for tau = infinity")
      ->capture_default_str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"oriented percolation path counts and growth estimates", "oppaths"};
  app.set_help_flag("--help", "print this help");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  Common c;
  // Flags that are shared in spirit but only meaningful for some commands.
  std::int64_t n = -1;
  std::size_t replicas = 0;
  std::optional<std::int64_t> survival_m;
  std::optional<std::int64_t> window;
  std::string mode = "log";
  std::string region = "all";
  std::vector<std::string> xs;
  std::string y = "";
  std::int64_t h = 1;
  std::int64_t links = 0;
  std::int64_t t_max = 128;
  std::size_t seeds = 50;
  std::string n_list = "8,16,32";
  std::string method = "sigma";
  std::int64_t resolution = 4;
  std::int64_t scale = 1;
  std::size_t mu_replicas = 50;
  std::size_t sigma0_replicas = 100;
  std::optional<double> mu_y;
  bool dump = false;
  bool require_fit = false;
  double target = 0.95;
  std::string start = "";
  std::string manifest_path;

  auto* simulate = app.add_subcommand("simulate", "cluster trace of one configuration");
  add_common(simulate, c);
  simulate->add_option("--n", n, "layers to evolve")->required();
  simulate->add_option("--window", window, "half-width of the simulation window (default n)");
  simulate->add_option("--start", start, "start site, comma-separated (default origin)");

  auto* count = app.add_subcommand("count", "open-path counts N_n, N_{x,n}, N_{A,n}");
  add_common(count, c);
  count->add_option("--n", n, "path length")->required();
  count->add_option("--mode", mode, "exact | log")->capture_default_str();
  count->add_option("--region", region, "all | point:Z | box:LO:HI | ball:C:R[:norm]")
      ->capture_default_str();
  count->add_option("--survival-m", survival_m, "count only endpoints surviving m more layers");
  count->add_option("--window", window, "refuse when the final support exceeds this half-width");
  count->add_flag("--dump", dump, "write per-site counts of the final layer");

  auto* sigma = app.add_subcommand("sigma", "essential hitting times and regenerating chains");
  add_common(sigma, c);
  sigma->add_option("--x", xs, "target site (repeatable)");
  sigma->add_option("--y", y, "chain displacement y (enables chain mode with --links)");
  sigma->add_option("--h", h, "number of sigma(0) steps per link")->capture_default_str();
  sigma->add_option("--links", links, "chain length");

  auto* alpha = app.add_subcommand("alpha", "growth rate of the number of paths");
  add_common(alpha, c);
  alpha->add_option("--n", n, "path length")->required();
  alpha->add_option("--replicas", replicas, "conditioned replicas")->required();
  alpha->add_option("--survival-m", survival_m, "survival filter length (default ceil(n/4), 0 = none)");

  auto* profile = app.add_subcommand("profile", "directional growth profile on a grid");
  add_common(profile, c);
  profile->add_option("--resolution", resolution, "grid denominator l")->capture_default_str();
  profile->add_option("--scale", scale, "encoding scale n")->capture_default_str();
  profile->add_option("--links", links, "chain length per estimate")->required();
  profile->add_option("--replicas", replicas, "replicas per grid point")->required();
  profile->add_option("--n-list", n_list, "n values of the shape reference")->capture_default_str();
  profile->add_option("--mu-replicas", mu_replicas, "replicas of the shape reference")
      ->capture_default_str();
  profile->add_option("--sigma0-replicas", sigma0_replicas, "replicas of E sigma(0)")
      ->capture_default_str();

  auto* subseq = app.add_subcommand("subseq", "growth along the reachable subsequence k (y,h)");
  add_common(subseq, c);
  subseq->add_option("--y", y, "displacement per step (default 0)");
  subseq->add_option("--h", h, "layers per step")->capture_default_str();
  subseq->add_option("--n", n, "largest k")->required();
  subseq->add_option("--replicas", replicas, "conditioned replicas")->required();
  subseq->add_option("--mu", mu_y, "known shape value mu(y), checked against h");

  auto* mu = app.add_subcommand("mu", "shape norm estimate");
  add_common(mu, c);
  mu->add_option("--x", xs, "direction (repeatable)");
  mu->add_option("--n-list", n_list, "n values (sigma method)")->capture_default_str();
  mu->add_option("--n", n, "layers (hull method)");
  mu->add_option("--replicas", replicas, "conditioned replicas")->required();
  mu->add_option("--method", method, "sigma | hull")->capture_default_str();

  auto* martingale = app.add_subcommand("martingale", "W_n = N_n / ((2d+1)p)^n");
  add_common(martingale, c);
  martingale->add_option("--n", n, "last level")->required();
  martingale->add_option("--replicas", replicas, "unconditioned replicas")->required();

  auto* tau_tail = app.add_subcommand("tau-tail", "extinction-time tail and survival fraction");
  add_common(tau_tail, c);
  tau_tail->add_option("--replicas", replicas, "unconditioned replicas")->required();
  tau_tail->add_option("--t-max", t_max, "cap standing in for tau = infinity")->capture_default_str();
  tau_tail->add_flag("--require-fit", require_fit, "fail when the tail cannot be fitted");

  auto* calibrate = app.add_subcommand("calibrate", "default p from survival fractions");
  add_common(calibrate, c);
  calibrate->add_option("--target", target, "survival fraction to reach")->capture_default_str();
  calibrate->add_option("--replicas", replicas, "replicas per p (default 400)");
  calibrate->add_option("--t-max", t_max, "survival cap")->capture_default_str();

  auto* oracle_check = app.add_subcommand("oracle-check", "DP counts against brute-force enumeration");
  add_common(oracle_check, c);
  oracle_check->add_option("--n", n, "largest path length")->required();
  oracle_check->add_option("--seeds", seeds, "number of sub-seeds")->capture_default_str();

  auto* replay = app.add_subcommand("replay", "re-run a manifest and compare output digests");
  replay->set_help_flag("--help", "print this help");
  replay->add_option("--manifest", manifest_path, "manifest.json to replay")->required();
  replay->add_option("--out", c.out_dir, "directory for the replayed outputs (default <dir>/replay)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "usage", e.what(), kExitUsage);
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Artifacts art;
    Json result;

    if (command == "replay") {
      const fs::path mpath(manifest_path);
      const Json manifest = Json::parse(read_file(mpath));
      std::vector<std::string> rerun = manifest.at("args").get<std::vector<std::string>>();
      const fs::path dir = c.out_dir.empty() ? mpath.parent_path() / "replay" : fs::path(c.out_dir);
      rerun.push_back("--out");
      rerun.push_back(dir.string());
      std::ostringstream sink_out, sink_err;
      const int code = run_cli(rerun, sink_out, sink_err);
      if (code != kExitOk) {
        err << sink_err.str();
        return code;
      }
      bool all = true;
      Json files = Json::array();
      for (const auto& [name, digest] : manifest.at("outputs").items()) {
        const std::string replayed = fs::exists(dir / name) ? fnv1a64_hex(read_file(dir / name)) : "";
        const bool same = replayed == digest.get<std::string>();
        all = all && same;
        files.push_back(Json{{"name", name}, {"recorded", digest}, {"replayed", replayed}, {"match", same}});
      }
      const bool manifest_same = read_file(dir / "manifest.json") == read_file(mpath);
      all = all && manifest_same;
      result["schema_version"] = kSchemaVersion;
      result["command"] = "replay";
      result["status"] = all ? "identical" : "mismatch";
      result["manifest_identical"] = manifest_same;
      result["files"] = files;
      out << result.dump(2) << '\n';
      return all ? kExitOk : kExitFailure;
    }

    const LatticeParams params = c.params();
    const EstimatorConfig cfg = c.config();
    const int d = params.d;
    if (c.horizon < 1) throw ArgumentError("--horizon must be >= 1");

    if (command == "simulate") {
      if (n < 0) throw ArgumentError("--n must be >= 0");
      const Coord s0 = start.empty() ? Coord{} : parse_coord(start, d);
      const std::int64_t r = window.value_or(n);
      if (r < 0) throw ArgumentError("--window must be >= 0");
      if (r > kCoordLimit) throw WindowError("--window exceeds the coordinate range");
      const Window win = Window::cube(d, s0, static_cast<std::int32_t>(r));
      const Site origin{s0, 0};
      const ClusterTrace trace = run_cluster(Environment(params), std::span<const Site>(&origin, 1), n, win,
                                             r >= n ? BoundaryPolicy::Strict : BoundaryPolicy::Clip);
      std::ostringstream csv, bits;
      write_trace_csv(csv, trace, d);
      write_trace_bits(bits, trace, d);
      art.add("trace.csv", csv.str());
      art.add("fronts.bin", bits.str());
      result["params"] = to_json(params);
      result["start"] = coord_json(s0, d);
      result["n"] = n;
      result["window_half_width"] = r;
      result["exact"] = r >= n;
      result["tau"] = trace.tau ? Json(*trace.tau) : Json(nullptr);
      result["survived_to_cap"] = trace.survived_to_cap();
      result["final_count"] = trace.fronts.back().count();
      result["hull_size"] = trace.hull.count();
      result = with_meta(result, command);
      art.add_json("simulate.json", result);
    } else if (command == "count") {
      if (n < 0) throw ArgumentError("--n must be >= 0");
      CountMode cm;
      if (mode == "exact") {
        cm = CountMode::Exact;
      } else if (mode == "log") {
        cm = CountMode::Log;
      } else {
        throw ArgumentError("--mode must be exact or log");
      }
      const RegionSpec spec = parse_region(region, d);
      const Environment env(params);
      CountLayer layer = count_final(env, n, cm);
      if (window) {
        const Window support = layer.support();
        if (!support.is_empty()) {
          for (int i = 0; i < d; ++i) {
            const auto k = static_cast<std::size_t>(i);
            if (std::max(std::abs(std::int64_t{support.lo[k]}), std::abs(std::int64_t{support.hi[k]})) > *window) {
              throw WindowError("final support exceeds --window " + std::to_string(*window));
            }
          }
        }
      }
      if (survival_m) {
        if (*survival_m < 1) throw ArgumentError("--survival-m must be >= 1");
        apply_survival_mask(env, layer, *survival_m);
      }
      CountReport report = count_region(layer, spec);
      if (survival_m) report.survival_horizon = *survival_m;
      result = with_meta(count_report_json(report, params), command);
      art.add_json("count.json", result);
      if (dump) {
        std::ostringstream csv;
        write_count_csv(csv, std::span<const CountLayer>(&layer, 1), d);
        art.add("counts.csv", csv.str());
      }
    } else if (command == "sigma") {
      const Environment env(params);
      const HittingCaps caps = cfg.hitting_caps();
      if (!survives(env, Site{}, c.horizon)) {
        throw PreconditionError("the origin cluster of this seed dies before the horizon " +
                                std::to_string(c.horizon));
      }
      result["params"] = to_json(params);
      result["horizon"] = c.horizon;
      Json records = Json::array();
      std::vector<Coord> targets;
      for (const auto& x : xs) targets.push_back(parse_coord(x, d));
      if (targets.empty() && y.empty()) targets.push_back(Coord{});
      for (const Coord& z : targets) records.push_back(hitting_json(essential_hitting(env, z, caps), d));
      result["records"] = records;
      if (!y.empty()) {
        if (links < 1) throw ArgumentError("chain mode needs --links >= 1");
        const RegenChain chain = regen_sequence(env, parse_coord(y, d), h, links, caps);
        result["chain"] = regen_chain_json(chain, d);
        std::ostringstream csv;
        write_chain_csv(csv, chain);
        art.add("chain.csv", csv.str());
      }
      result = with_meta(result, command);
      art.add_json("sigma.json", result);
    } else if (command == "alpha") {
      const AlphaPair pair = estimate_alpha0_pair(params, n, replicas, survival_m, cfg);
      result["estimate"] = estimate_json(pair.surviving, params);
      result["plain"] = estimate_json(pair.plain, params);
      const double pooled = pooled_se(pair.plain.std_error, pair.surviving.std_error);
      result["agreement"] = Json{{"difference", pair.plain.value - pair.surviving.value},
                                 {"pooled_se", pooled},
                                 {"within_3se", std::abs(pair.plain.value - pair.surviving.value) <= 3.0 * pooled}};
      result = with_meta(result, command);
      art.add_json("alpha.json", result);
      art.manifest_extra["seeds"] = seeds_json(pair.surviving.seeds);
    } else if (command == "profile") {
      const auto nl = parse_int_list(n_list);
      ShapeEstimate shape;
      shape.d = d;
      // Every primitive direction of the grid box needs a shape entry.
      const Window box = Window::cube(d, Coord{}, static_cast<std::int32_t>(resolution));
      for (std::size_t i = 0; i < box.volume(); ++i) {
        const Coord z = box.coord_at(i);
        std::int64_t g = 0;
        for (int k = 0; k < d; ++k) g = std::gcd(g, std::int64_t{z[static_cast<std::size_t>(k)]});
        if (g != 1) continue;
        shape.entries.push_back(estimate_mu(params, z, nl, mu_replicas, cfg));
      }
      const RunningStats s0 = estimate_sigma0(params, sigma0_replicas, cfg);
      const DirectionGrid grid = build_direction_grid(d, resolution, shape, s0.mean(), scale);
      const GrowthProfile prof = estimate_profile(params, grid, links, replicas, cfg);
      result = with_meta(profile_json(prof, params), command);
      result["mean_sigma0"] = s0.mean();
      result["mean_sigma0_stderr"] = s0.stderr_of_mean();
      art.add_json("profile.json", result);
      art.add_json("shape.json", shape_json(shape, params));
      std::ostringstream csv;
      write_profile_csv(csv, prof, d);
      art.add("profile.csv", csv.str());
    } else if (command == "subseq") {
      const Coord yy = y.empty() ? Coord{} : parse_coord(y, d);
      const GrowthEstimate est = directional_subsequence_estimate(params, yy, h, n, replicas, cfg, mu_y);
      result = with_meta(estimate_json(est, params), command);
      result["y"] = coord_json(yy, d);
      result["h"] = h;
      result["ratio_value"] = est.ratio_value ? Json(*est.ratio_value) : Json(nullptr);
      result["ratio_stderr"] = est.ratio_std_error ? Json(*est.ratio_std_error) : Json(nullptr);
      result["kept_fraction"] = est.kept_fraction;
      art.add_json("subseq.json", result);
      art.manifest_extra["seeds"] = seeds_json(est.seeds);
    } else if (command == "mu") {
      ShapeEstimate shape;
      shape.d = d;
      std::vector<Coord> dirs;
      for (const auto& x : xs) dirs.push_back(parse_coord(x, d));
      if (dirs.empty()) dirs.push_back(Coord{1, 0, 0});
      for (const Coord& z : dirs) {
        if (method == "sigma") {
          shape.entries.push_back(estimate_mu(params, z, parse_int_list(n_list), replicas, cfg));
        } else if (method == "hull") {
          if (n < 1) throw ArgumentError("hull method needs --n >= 1");
          shape.method = "hull-based";
          shape.entries.push_back(estimate_mu_hull(params, z, n, replicas, cfg));
        } else {
          throw ArgumentError("--method must be sigma or hull");
        }
      }
      result = with_meta(shape_json(shape, params), command);
      art.add_json("mu.json", result);
    } else if (command == "martingale") {
      const MartingaleTrace trace = track_martingale(params, n, replicas, cfg);
      result = with_meta(martingale_json(trace, params), command);
      art.add_json("martingale.json", result);
      std::ostringstream csv;
      write_martingale_csv(csv, trace);
      art.add("martingale.csv", csv.str());
      art.manifest_extra["seeds"] = seeds_json(trace.seeds);
    } else if (command == "tau-tail") {
      const TauTailReport report = estimate_tau_tail(params, replicas, t_max, cfg);
      if (require_fit) report.require_fit();
      result = with_meta(tau_tail_json(report, params), command);
      art.add_json("tau_tail.json", result);
      std::ostringstream csv;
      write_tau_tail_csv(csv, report);
      art.add("tau_tail.csv", csv.str());
      art.manifest_extra["t_max"] = t_max;
    } else if (command == "calibrate") {
      const std::size_t reps = replicas ? replicas : 400;
      const double p = calibrate_default_p(d, c.seed, target, reps, t_max);
      result["d"] = d;
      result["target"] = target;
      result["replicas"] = reps;
      result["t_max"] = t_max;
      result["p"] = p;
      result = with_meta(result, command);
      art.add_json("calibrate.json", result);
    } else if (command == "oracle-check") {
      if (n < 0) throw ArgumentError("--n must be >= 0");
      Json mismatches = Json::array();
      std::uint64_t compared = 0;
      for (std::size_t s = 0; s < seeds; ++s) {
        const LatticeParams sp = params.with_seed(derive_subseed(params.seed, s));
        const Environment env(sp);
        const auto layers = count_forward(env, n, CountMode::Exact);
        for (std::int64_t len = 0; len <= n; ++len) {
          const auto brute = oracle::enumerate_paths_count(env, len);
          const CountLayer& layer = layers[static_cast<std::size_t>(len)];
          BigCount dp_total = 0;
          bool same = true;
          const std::size_t volume = layer.window.is_empty() ? 0 : layer.window.volume();
          for (std::size_t i = 0; i < volume; ++i) {
            const BigCount v = layer.exact[i];
            dp_total += v;
            const auto it = brute.endpoint_counts.find(layer.window.coord_at(i));
            const std::uint64_t b = it == brute.endpoint_counts.end() ? 0 : it->second;
            if (v != b) same = false;
          }
          if (dp_total != brute.open_paths) same = false;
          ++compared;
          if (!same) mismatches.push_back(Json{{"seed_index", s}, {"n", len}});
        }
      }
      result["params"] = to_json(params);
      result["n"] = n;
      result["seeds"] = seeds;
      result["comparisons"] = compared;
      result["mismatches"] = mismatches;
      result["status"] = mismatches.empty() ? "all equal" : "mismatch";
      result = with_meta(result, command);
      art.add_json("oracle_check.json", result);
      art.manifest_extra["seeds"] = Json{{"first_index", 0}, {"end_index", seeds}};
      write_artifacts(c, command, args, art);
      out << result.dump(2) << '\n';
      return mismatches.empty() ? kExitOk : kExitFailure;
    }

    write_artifacts(c, command, args, art);
    out << result.dump(2) << '\n';
    return kExitOk;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    emit_error(err, to_string(e.kind()), e.what(), code);
    return code;
  } catch (const Json::exception& e) {
    emit_error(err, "manifest", e.what(), kExitUsage);
    return kExitUsage;
  } catch (const std::bad_alloc&) {
    emit_error(err, "resource", "out of memory", kExitResource);
    return kExitResource;
  } catch (const std::exception& e) {
    emit_error(err, "internal", e.what(), kExitFailure);
    return kExitFailure;
  }
}

}  // namespace oppaths::cli
