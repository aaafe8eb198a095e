#include "oppaths/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "oppaths/counting.hpp"
#include "oppaths/dynamics.hpp"
#include "oppaths/errors.hpp"

namespace oppaths {

const char* to_string(GrowthMethod method) {
  switch (method) {
    case GrowthMethod::Plain: return "plain";
    case GrowthMethod::Surviving: return "surviving";
    case GrowthMethod::RegenSubsequence: return "regen-subsequence";
    case GrowthMethod::DirectionalSubsequence: return "directional-subsequence";
  }
  return "unknown";
}

bool GrowthEstimate::within_bound(int d, double p) const {
  if (!(value > 0.0)) return false;
  return value <= std::log(stencil_size(d) * p) + 3.0 * std_error + 1e-12;
}

namespace {

void require_replicas(std::size_t replicas) {
  if (replicas == 0) throw ArgumentError("replicas must be >= 1");
}

struct Conditioned {
  std::vector<ConditionedSample> samples;
  SeedRange seeds;
};

Conditioned draw_conditioned(const LatticeParams& params, std::int64_t horizon,
                             std::size_t replicas, const EstimatorConfig& cfg) {
  params.validate();
  require_replicas(replicas);
  const std::uint64_t budget =
      std::max<std::uint64_t>(cfg.budget_per_replica * replicas, 1000);
  ConditionedSampler sampler(params, horizon, budget, cfg.first_index);
  Conditioned out;
  out.samples = sampler.take(replicas);
  out.seeds = SeedRange{cfg.first_index, sampler.next_index(), sampler.tried(), sampler.accepted()};
  return out;
}

void summarize(GrowthEstimate& est, const std::vector<double>& values) {
  RunningStats stats;
  for (double v : values) stats.push(v);
  est.samples = values;
  est.replicas = stats.count();
  est.value = stats.mean();
  est.std_error = stats.stderr_of_mean();
}

std::vector<double> to_direction(const Coord& y, int d, double scale) {
  std::vector<double> out(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] * scale;
  return out;
}

// Least-squares slope on x in y ~ a + b x + c l; nullopt when singular.
std::optional<double> log_corrected_slope(const std::vector<double>& x, const std::vector<double>& l,
                                          const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, ml = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    ml += l[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  ml /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sll = 0, sxl = 0, sxy = 0, sly = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dl = l[i] - ml, dy = y[i] - my;
    sxx += dx * dx;
    sll += dl * dl;
    sxl += dx * dl;
    sxy += dx * dy;
    sly += dl * dy;
  }
  const double det = sxx * sll - sxl * sxl;
  if (!(det > 1e-12 * sxx * sll)) return std::nullopt;
  return (sxy * sll - sly * sxl) / det;
}

struct AlphaSample {
  double plain = 0.0;
  double surviving = 0.0;
};

}  // namespace

AlphaPair estimate_alpha0_pair(const LatticeParams& params, std::int64_t n, std::size_t replicas,
                               std::optional<std::int64_t> m, const EstimatorConfig& cfg) {
  if (n < 1) throw ArgumentError("estimate_alpha0 requires n >= 1");
  const std::int64_t mm = m.value_or(default_survival_horizon(n));
  if (mm < 0) throw ArgumentError("survival horizon m must be >= 0");
  const std::int64_t horizon = std::max(cfg.horizon, n + mm);
  const Conditioned drawn = draw_conditioned(params, horizon, replicas, cfg);

  auto values = parallel_map<AlphaSample>(drawn.samples.size(), cfg.threads, [&](std::size_t i) {
    const Environment env(params.with_seed(drawn.samples[i].seed));
    CountLayer layer = count_final(env, n, CountMode::Log);
    AlphaSample s;
    s.plain = count_region(layer, RegionSpec::all()).log_total / static_cast<double>(n);
    if (mm > 0) apply_survival_mask(env, layer, mm);
    s.surviving = count_region(layer, RegionSpec::all()).log_total / static_cast<double>(n);
    return s;
  });

  AlphaPair out;
  std::vector<double> plain, surviving;
  for (const auto& v : values) {
    plain.push_back(v.plain);
    surviving.push_back(v.surviving);
  }
  for (GrowthEstimate* est : {&out.plain, &out.surviving}) {
    est->direction.assign(static_cast<std::size_t>(params.d), 0.0);
    est->n_used = n;
    est->horizon = horizon;
    est->seeds = drawn.seeds;
  }
  out.plain.method = GrowthMethod::Plain;
  out.surviving.method = mm > 0 ? GrowthMethod::Surviving : GrowthMethod::Plain;
  out.surviving.survival_m = mm;
  summarize(out.plain, plain);
  summarize(out.surviving, surviving);
  return out;
}

GrowthEstimate estimate_alpha0(const LatticeParams& params, std::int64_t n, std::size_t replicas,
                               std::optional<std::int64_t> m, const EstimatorConfig& cfg) {
  AlphaPair pair = estimate_alpha0_pair(params, n, replicas, m, cfg);
  return pair.surviving;
}

GrowthEstimate estimate_alpha_dir(const LatticeParams& params, const Coord& y, std::int64_t h,
                                  std::int64_t n_links, std::size_t replicas,
                                  const EstimatorConfig& cfg) {
  if (n_links < 1) throw ArgumentError("n_links must be >= 1");
  if (h < 1) throw ArgumentError("h must be >= 1");
  validate_coord(params.d, y);
  const Conditioned drawn = draw_conditioned(params, cfg.horizon, replicas, cfg);
  const HittingCaps caps = cfg.hitting_caps();

  struct DirSample {
    bool ok = false;
    double value = 0.0;
    std::int64_t S = 0;
  };
  auto results = parallel_map<DirSample>(drawn.samples.size(), cfg.threads, [&](std::size_t i) {
    const Environment env(params.with_seed(drawn.samples[i].seed));
    DirSample s;
    RegenChain chain;
    try {
      chain = regen_sequence(env, y, h, n_links, caps);
    } catch (const PreconditionError&) {
      return s;
    }
    if (!chain.complete(n_links)) return s;
    const Site end = chain.points[static_cast<std::size_t>(n_links - 1)];
    const double logn = log_count_between(env, Site{}, end);
    if (logn == kNegInf) return s;
    s.ok = true;
    s.S = end.t;
    s.value = logn / static_cast<double>(end.t);
    return s;
  });

  GrowthEstimate est;
  est.method = GrowthMethod::RegenSubsequence;
  est.n_used = n_links;
  est.horizon = cfg.horizon;
  est.seeds = drawn.seeds;
  std::vector<double> values;
  RunningStats layers;
  for (const auto& r : results) {
    if (!r.ok) {
      ++est.excluded;
      continue;
    }
    values.push_back(r.value);
    layers.push(static_cast<double>(r.S));
  }
  if (values.empty()) {
    throw InsufficientChainError("no regenerating chain reached " + std::to_string(n_links) +
                                 " links");
  }
  summarize(est, values);
  est.mean_layers = layers.mean();
  est.direction = to_direction(y, params.d, static_cast<double>(n_links) / layers.mean());
  return est;
}

std::optional<double> ShapeEstimate::evaluate(const Coord& z) const {
  if (norm_l1(z) == 0) return 0.0;
  for (const ShapeEntry& e : entries) {
    if (norm_l1(e.x) == 0) continue;
    // z = c x with c > 0: every coordinate ratio must agree.
    double c = 0.0;
    bool have_c = false;
    bool parallel = true;
    for (int i = 0; i < d && parallel; ++i) {
      const auto xi = e.x[static_cast<std::size_t>(i)];
      const auto zi = z[static_cast<std::size_t>(i)];
      if (xi == 0) {
        parallel = zi == 0;
        continue;
      }
      const double ratio = static_cast<double>(zi) / static_cast<double>(xi);
      if (!have_c) {
        c = ratio;
        have_c = true;
      } else if (std::abs(ratio - c) > 1e-12 * std::abs(c)) {
        parallel = false;
      }
    }
    if (parallel && c > 0.0) return c * e.mu;
  }
  return std::nullopt;
}

ShapeEntry estimate_mu(const LatticeParams& params, const Coord& x,
                       const std::vector<std::int64_t>& n_list, std::size_t replicas,
                       const EstimatorConfig& cfg) {
  if (n_list.empty()) throw ArgumentError("n_list must be nonempty");
  for (auto n : n_list) {
    if (n < 1) throw ArgumentError("n_list entries must be >= 1");
    validate_coord(params.d, scaled(x, n));
  }
  const Conditioned drawn = draw_conditioned(params, cfg.horizon, replicas, cfg);
  const HittingCaps caps = cfg.hitting_caps();

  // sigma(n x) per replica per n; nullopt for failed records.
  using Row = std::vector<std::optional<std::int64_t>>;
  auto rows = parallel_map<Row>(drawn.samples.size(), cfg.threads, [&](std::size_t i) {
    const Environment env(params.with_seed(drawn.samples[i].seed));
    Row row;
    for (auto n : n_list) {
      const HittingRecord rec = essential_hitting(env, scaled(x, n), caps);
      row.push_back(rec.ok() ? rec.sigma : std::nullopt);
    }
    return row;
  });

  ShapeEntry entry;
  entry.x = x;
  entry.n_list = n_list;
  std::size_t best = 0;
  for (std::size_t j = 0; j < n_list.size(); ++j) {
    RunningStats stats;
    for (const Row& row : rows) {
      if (row[j]) {
        stats.push(static_cast<double>(*row[j]) / static_cast<double>(n_list[j]));
      } else {
        ++entry.excluded;
      }
    }
    entry.means.push_back(stats.count() ? stats.mean() : std::nan(""));
    entry.std_errors.push_back(stats.stderr_of_mean());
    entry.used.push_back(stats.count());
    if (stats.count() && (std::isnan(entry.means[best]) || entry.means[j] < entry.means[best])) {
      best = j;
    }
  }
  if (entry.used[best] == 0) throw InsufficientHitsError("every hitting record failed");
  entry.mu = entry.means[best];
  entry.std_error = entry.std_errors[best];
  return entry;
}

ShapeEntry estimate_mu_hull(const LatticeParams& params, const Coord& x, std::int64_t n,
                            std::size_t replicas, const EstimatorConfig& cfg) {
  if (n < 1) throw ArgumentError("n must be >= 1");
  if (norm_l1(x) == 0) throw ArgumentError("hull estimate needs x != 0");
  const Conditioned drawn = draw_conditioned(params, std::max(cfg.horizon, n), replicas, cfg);
  auto values = parallel_map<double>(drawn.samples.size(), cfg.threads, [&](std::size_t i) {
    const Environment env(params.with_seed(drawn.samples[i].seed));
    const Site origin{};
    const ClusterTrace trace = run_cluster(env, std::span<const Site>(&origin, 1), n);
    std::int64_t j = 0;
    while (true) {
      const Coord next = scaled(x, j + 1);
      if (!trace.hull.window().contains(next) || !trace.hull.contains(next)) break;
      ++j;
    }
    return j > 0 ? static_cast<double>(n) / static_cast<double>(j)
                 : std::numeric_limits<double>::infinity();
  });
  ShapeEntry entry;
  entry.x = x;
  entry.n_list = {n};
  RunningStats stats;
  for (double v : values) {
    if (std::isfinite(v)) {
      stats.push(v);
    } else {
      ++entry.excluded;
    }
  }
  if (stats.count() == 0) throw InsufficientHitsError("hull never contained x");
  entry.means = {stats.mean()};
  entry.std_errors = {stats.stderr_of_mean()};
  entry.used = {stats.count()};
  entry.mu = stats.mean();
  entry.std_error = stats.stderr_of_mean();
  return entry;
}

RunningStats estimate_sigma0(const LatticeParams& params, std::size_t replicas,
                             const EstimatorConfig& cfg) {
  const Conditioned drawn = draw_conditioned(params, cfg.horizon, replicas, cfg);
  const HittingCaps caps = cfg.hitting_caps();
  auto values = parallel_map<double>(drawn.samples.size(), cfg.threads, [&](std::size_t i) {
    const Environment env(params.with_seed(drawn.samples[i].seed));
    const HittingRecord rec = essential_hitting(env, Coord{}, caps);
    return rec.ok() ? static_cast<double>(*rec.sigma) : std::nan("");
  });
  RunningStats stats;
  for (double v : values) {
    if (!std::isnan(v)) stats.push(v);
  }
  if (stats.count() == 0) throw InsufficientHitsError("every sigma(0) record failed");
  return stats;
}

DirectionGrid build_direction_grid(int d, std::int64_t resolution, const ShapeEstimate& mu_ref,
                                   double mean_sigma0, std::int64_t scale) {
  if (d < 1 || d > kMaxDim) throw ArgumentError("d must be in 1..3");
  if (resolution < 1) throw ArgumentError("resolution must be >= 1");
  if (scale < 1) throw ArgumentError("scale must be >= 1");
  if (!(mean_sigma0 > 0.0)) throw ArgumentError("mean sigma(0) must be > 0");
  DirectionGrid grid;
  grid.scale = scale;
  grid.resolution = resolution;
  const auto l = static_cast<std::int32_t>(resolution);
  const Window box = Window::cube(d, Coord{}, l);
  for (std::size_t i = 0; i < box.volume(); ++i) {
    const Coord z = box.coord_at(i);
    const auto mu = mu_ref.evaluate(z);
    if (!mu) {
      grid.notes.push_back("skipped " + to_string(z, d) + ": no shape estimate along it");
      continue;
    }
    if (!(*mu < static_cast<double>(l))) {
      std::ostringstream os;
      os << "skipped " << to_string(z, d) << "/" << l << ": mu=" << *mu << " outside the unit ball";
      grid.notes.push_back(os.str());
      continue;
    }
    GridPoint gp;
    gp.z = z;
    gp.l = l;
    gp.y = scaled(z, scale);
    validate_coord(d, gp.y);
    const double raw = static_cast<double>(scale) * (static_cast<double>(l) - *mu) / mean_sigma0;
    gp.h = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(raw - 1e-9)));
    const double expected_s = static_cast<double>(scale) * *mu + static_cast<double>(gp.h) * mean_sigma0;
    gp.target = to_direction(gp.y, d, 1.0 / expected_s);
    grid.points.push_back(gp);
  }
  return grid;
}

namespace {

double dir_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double dir_norm(const std::vector<double>& a) {
  return dir_distance(a, std::vector<double>(a.size(), 0.0));
}

}  // namespace

void attach_profile_diagnostics(GrowthProfile& profile) {
  profile.symmetry.clear();
  profile.concavity.clear();
  const auto& pts = profile.grid.points;
  const auto& est = profile.estimates;
  const std::size_t count = pts.size();
  if (count == 0) return;

  // z and -z are mirror images; estimates along them should agree.
  for (std::size_t a = 0; a < count; ++a) {
    for (std::size_t b = a + 1; b < count; ++b) {
      if (!(pts[b].z == -pts[a].z) || norm_l1(pts[a].z) == 0) continue;
      if (!est[a] || !est[b]) continue;
      SymmetryCheck c;
      c.a = a;
      c.b = b;
      c.difference = est[a]->value - est[b]->value;
      c.pooled = pooled_se(est[a]->std_error, est[b]->std_error);
      c.ok = std::abs(c.difference) < 3.0 * c.pooled || c.difference == 0.0;
      profile.symmetry.push_back(c);
    }
  }

  // Triples whose middle z is the exact midpoint of the outer ones.
  for (std::size_t a = 0; a < count; ++a) {
    for (std::size_t b = a + 1; b < count; ++b) {
      const Coord sum = pts[a].z + pts[b].z;
      bool even = true;
      for (auto c : sum) even = even && (c % 2 == 0);
      if (!even) continue;
      Coord mid{};
      for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = sum[i] / 2;
      for (std::size_t k = 0; k < count; ++k) {
        if (k == a || k == b || !(pts[k].z == mid)) continue;
        if (!est[a] || !est[b] || !est[k]) continue;
        ConcavityCheck c;
        c.a = a;
        c.mid = k;
        c.b = b;
        // Chord value at the realized direction of the middle point.
        const auto& da = est[a]->direction;
        const auto& db = est[b]->direction;
        const auto& dm = est[k]->direction;
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < da.size(); ++i) {
          num += (dm[i] - da[i]) * (db[i] - da[i]);
          den += (db[i] - da[i]) * (db[i] - da[i]);
        }
        const double lambda = den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : 0.5;
        c.slack = est[k]->value - ((1.0 - lambda) * est[a]->value + lambda * est[b]->value);
        c.pooled = std::sqrt(est[k]->std_error * est[k]->std_error +
                             (1.0 - lambda) * (1.0 - lambda) * est[a]->std_error * est[a]->std_error +
                             lambda * lambda * est[b]->std_error * est[b]->std_error);
        c.ok = c.slack >= -3.0 * c.pooled;
        profile.concavity.push_back(c);
      }
    }
  }

  // Center: the available grid point with the smallest realized direction.
  bool have = false;
  for (std::size_t i = 0; i < count; ++i) {
    if (!est[i]) continue;
    const double r = dir_norm(est[i]->direction);
    if (!have || r < dir_norm(est[profile.center_index]->direction)) {
      profile.center_index = i;
      have = true;
    }
  }
  if (!have) return;
  profile.max_index = profile.center_index;
  for (std::size_t i = 0; i < count; ++i) {
    if (est[i] && est[i]->value > est[profile.max_index]->value) profile.max_index = i;
  }
  const auto& top = *est[profile.max_index];
  const auto& center = *est[profile.center_index];
  profile.max_excess = top.value - center.value;
  profile.max_pooled = pooled_se(top.std_error, center.std_error);
  profile.max_at_center =
      profile.max_index == profile.center_index || profile.max_excess < 3.0 * profile.max_pooled;
}

GrowthProfile estimate_profile(const LatticeParams& params, const DirectionGrid& grid,
                               std::int64_t n_links, std::size_t replicas,
                               const EstimatorConfig& cfg) {
  if (grid.points.empty()) throw ArgumentError("direction grid is empty");
  GrowthProfile profile;
  profile.grid = grid;
  for (const GridPoint& gp : grid.points) {
    try {
      profile.estimates.push_back(estimate_alpha_dir(params, gp.y, gp.h, n_links, replicas, cfg));
    } catch (const Error& e) {
      profile.estimates.push_back(std::nullopt);
      profile.notes.push_back(to_string(gp.z, params.d) + ": " + e.what());
    }
  }
  attach_profile_diagnostics(profile);
  return profile;
}

GrowthEstimate directional_subsequence_estimate(const LatticeParams& params, const Coord& y,
                                                std::int64_t h, std::int64_t n_max,
                                                std::size_t replicas, const EstimatorConfig& cfg,
                                                std::optional<double> mu_of_y) {
  if (h < 1) throw ArgumentError("h must be >= 1");
  if (n_max < 1) throw ArgumentError("n_max must be >= 1");
  validate_coord(params.d, scaled(y, n_max));
  if (mu_of_y && !(*mu_of_y < static_cast<double>(h))) {
    throw PreconditionError("subsequence estimate needs mu(y) < h");
  }
  if (norm_l1(y) > h) throw PreconditionError("|y|_1 > h: k (y,h) is never reachable");
  const Conditioned drawn = draw_conditioned(params, cfg.horizon, replicas, cfg);

  struct SubSample {
    std::int64_t kept = 0;
    std::int64_t last_k = 0;
    double ratio = 0.0;      // (1/(K h)) log N at the last kept K
    double slope = 0.0;  // log-corrected slope
  };
  auto results = parallel_map<SubSample>(drawn.samples.size(), cfg.threads, [&](std::size_t i) {
    const Environment env(params.with_seed(drawn.samples[i].seed));
    CountStepper stepper(env, Site{}, CountMode::Log);
    std::vector<std::pair<std::int64_t, double>> kept;
    for (std::int64_t k = 1; k <= n_max; ++k) {
      for (std::int64_t j = 0; j < h; ++j) stepper.advance();
      const CountLayer& layer = stepper.layer();
      const Coord target = scaled(y, k);
      if (!layer.window.contains(target)) continue;
      const double lv = layer.log_at(target);
      if (lv == kNegInf) continue;
      kept.emplace_back(k, lv);
    }
    SubSample s;
    s.kept = static_cast<std::int64_t>(kept.size());
    if (kept.empty()) return s;
    const auto [K, logK] = kept.back();
    s.last_k = K;
    s.ratio = logK / static_cast<double>(K * h);
    s.slope = s.ratio;
    // log N_{k (y,h)} ~ a + alpha k h + beta log(k h) over kept k >= K/8.
    std::vector<double> xs, ls, ys;
    for (const auto& [k, lv] : kept) {
      if (8 * k < K) continue;
      xs.push_back(static_cast<double>(k * h));
      ls.push_back(std::log(static_cast<double>(k * h)));
      ys.push_back(lv);
    }
    if (xs.size() >= 3) {
      if (auto b = log_corrected_slope(xs, ls, ys)) s.slope = *b;
    }
    return s;
  });

  GrowthEstimate est;
  est.method = GrowthMethod::DirectionalSubsequence;
  est.horizon = cfg.horizon;
  est.seeds = drawn.seeds;
  est.direction = to_direction(y, params.d, 1.0 / static_cast<double>(h));
  std::vector<double> values;
  RunningStats last, ratio, kept;
  for (const auto& r : results) {
    kept.push(static_cast<double>(r.kept) / static_cast<double>(n_max));
    if (r.kept == 0) {
      ++est.excluded;
      continue;
    }
    values.push_back(r.slope);
    ratio.push(r.ratio);
    last.push(static_cast<double>(r.last_k * h));
  }
  est.kept_fraction = kept.mean();
  if (values.empty()) throw InsufficientHitsError("no k in 1.." + std::to_string(n_max) + " was reached");
  summarize(est, values);
  est.ratio_value = ratio.mean();
  est.ratio_std_error = ratio.stderr_of_mean();
  est.mean_layers = last.mean();
  est.n_used = n_max * h;
  return est;
}

MartingaleTrace track_martingale(const LatticeParams& params, std::int64_t n_max,
                                 std::size_t replicas, const EstimatorConfig& cfg) {
  params.validate();
  if (params.p <= 0.0) throw ArgumentError("W_n is undefined at p = 0");
  if (n_max < 0) throw ArgumentError("n_max must be >= 0");
  require_replicas(replicas);
  const double log_mean_step = std::log(stencil_size(params.d) * params.p);
  MartingaleTrace out;
  out.n_max = n_max;
  out.replicas = replicas;
  out.seeds = SeedRange{cfg.first_index, cfg.first_index + replicas, replicas, replicas};
  out.log_w = parallel_map<std::vector<double>>(replicas, cfg.threads, [&](std::size_t r) {
    const Environment env(params.with_seed(derive_subseed(params.seed, cfg.first_index + r)));
    CountStepper stepper(env, Site{}, CountMode::Log);
    std::vector<double> lw;
    lw.reserve(static_cast<std::size_t>(n_max + 1));
    lw.push_back(0.0);
    for (std::int64_t n = 1; n <= n_max; ++n) {
      if (lw.back() == kNegInf) {
        lw.push_back(kNegInf);
        continue;
      }
      stepper.advance();
      const double total = stepper.log_total();
      lw.push_back(total == kNegInf ? kNegInf : total - static_cast<double>(n) * log_mean_step);
    }
    return lw;
  });
  auto w = [](double lw) { return lw == kNegInf ? 0.0 : std::exp(lw); };
  for (std::int64_t n = 0; n <= n_max; ++n) {
    RunningStats stats;
    std::vector<double> column;
    column.reserve(replicas);
    for (const auto& lw : out.log_w) {
      const double v = w(lw[static_cast<std::size_t>(n)]);
      stats.push(v);
      column.push_back(v);
    }
    out.mean_w.push_back(stats.mean());
    out.se_w.push_back(stats.stderr_of_mean());
    out.median_w.push_back(median(column));
    if (n < n_max) {
      RunningStats inc;
      for (const auto& lw : out.log_w) {
        inc.push(w(lw[static_cast<std::size_t>(n + 1)]) - w(lw[static_cast<std::size_t>(n)]));
      }
      out.mean_increment.push_back(inc.mean());
      out.se_increment.push_back(inc.stderr_of_mean());
    }
  }
  return out;
}

const TauFit& TauTailReport::require_fit() const {
  if (!fit) throw DegenerateFitError(fit_note.empty() ? "no tail fit" : fit_note);
  return *fit;
}

TauTailReport estimate_tau_tail(const LatticeParams& params, std::size_t replicas,
                                std::int64_t t_max, const EstimatorConfig& cfg) {
  params.validate();
  require_replicas(replicas);
  if (t_max < 1) throw ArgumentError("t_max must be >= 1");
  // tau per replica; 0 marks survival to the cap.
  auto taus = parallel_map<std::int64_t>(replicas, cfg.threads, [&](std::size_t r) {
    const Environment env(params.with_seed(derive_subseed(params.seed, cfg.first_index + r)));
    const ExtinctionProbe probe = probe_extinction(env, Site{}, t_max);
    return probe.survived ? std::int64_t{0} : probe.tau;
  });

  TauTailReport out;
  out.cap = t_max;
  out.replicas = replicas;
  std::vector<std::size_t> equal(static_cast<std::size_t>(t_max + 2), 0);
  for (auto tau : taus) {
    if (tau == 0) {
      ++out.survived;
    } else {
      ++equal[static_cast<std::size_t>(tau)];
    }
  }
  const double total = static_cast<double>(replicas);
  out.survival_fraction = static_cast<double>(out.survived) / total;
  out.survival_se = std::sqrt(out.survival_fraction * (1.0 - out.survival_fraction) / total);

  // Tail counts: #{n <= tau < cap}.
  std::vector<std::size_t> tail(static_cast<std::size_t>(t_max + 2), 0);
  for (std::int64_t n = t_max; n >= 1; --n) {
    tail[static_cast<std::size_t>(n)] = tail[static_cast<std::size_t>(n + 1)] + equal[static_cast<std::size_t>(n)];
  }
  std::vector<double> xs, ys;
  for (std::int64_t n = 1; n <= t_max; ++n) {
    TauTailRow row;
    row.n = n;
    row.p_equal = static_cast<double>(equal[static_cast<std::size_t>(n)]) / total;
    row.p_tail = static_cast<double>(tail[static_cast<std::size_t>(n)]) / total;
    row.se_tail = std::sqrt(row.p_tail * (1.0 - row.p_tail) / total);
    out.table.push_back(row);
    if (tail[static_cast<std::size_t>(n)] >= 5) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(std::log(row.p_tail));
    }
  }
  if (out.survived == replicas) {
    out.fit_note = "every replica survived to the cap";
  } else if (out.survived == 0 && xs.size() < 3) {
    out.fit_note = "every replica died and the tail is too short to fit";
  } else if (xs.size() < 3) {
    out.fit_note = "fewer than 3 tail points with >= 5 observations";
  } else {
    const LinearFit lf = least_squares(xs, ys);
    out.fit = TauFit{std::exp(lf.intercept), -lf.slope, lf.points};
  }
  return out;
}

double calibrate_default_p(int d, std::uint64_t seed, double target, std::size_t replicas,
                           std::int64_t t_max) {
  if (!(target > 0.0 && target < 1.0)) throw ArgumentError("target must be in (0,1)");
  for (int step = 1; step <= 19; ++step) {
    const double p = 0.05 * step;
    const TauTailReport report = estimate_tau_tail(LatticeParams{d, p, seed}, replicas, t_max);
    if (report.survival_fraction >= target) return p;
  }
  return 0.95;
}

}  // namespace oppaths
