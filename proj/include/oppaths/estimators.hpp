#pragma once

// Monte Carlo estimators built on the simulation primitives: the growth
// constant at 0 and along directions, the shape norm, the martingale
// N_n / ((2d+1)p)^n and the extinction-time tail.
//
// Replicas are sub-seeds of the master seed, processed in index order; every
// reported uncertainty is the standard error across independent replicas.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oppaths/hitting.hpp"
#include "oppaths/lattice.hpp"
#include "oppaths/stats.hpp"

namespace oppaths {

struct EstimatorConfig {
  std::int64_t horizon = kDefaultSurvivalHorizon;  // conditioning and hitting horizon
  HittingCaps caps{};                              // survival_horizon synced to `horizon`
  unsigned threads = 1;
  std::uint64_t first_index = 0;                   // first sub-seed index
  std::uint64_t budget_per_replica = 1000;         // sampler tries per wanted replica

  HittingCaps hitting_caps() const {
    HittingCaps c = caps;
    c.survival_horizon = horizon;
    return c;
  }
};

enum class GrowthMethod { Plain, Surviving, RegenSubsequence, DirectionalSubsequence };
const char* to_string(GrowthMethod method);

struct SeedRange {
  std::uint64_t first = 0;
  std::uint64_t last = 0;   // one past the last index consumed
  std::uint64_t tried = 0;
  std::uint64_t accepted = 0;
};

struct GrowthEstimate {
  std::vector<double> direction;   // length d; realized direction for regen estimates
  double value = 0.0;              // nats per layer
  double std_error = 0.0;
  std::int64_t n_used = 0;
  std::size_t replicas = 0;        // contributing replicas
  std::size_t excluded = 0;        // failed chains / empty subsequences
  GrowthMethod method = GrowthMethod::Surviving;
  std::int64_t horizon = 0;        // conditioning horizon actually used
  std::optional<std::int64_t> survival_m;
  SeedRange seeds;
  std::vector<double> samples;     // per-replica values, sub-seed order
  double mean_layers = 0.0;        // mean S_n or kept level, where relevant
  // Subsequence estimates only: the plain ratio (1/(k h)) log N at the last
  // kept k, and the mean fraction of kept k.
  std::optional<double> ratio_value;
  std::optional<double> ratio_std_error;
  double kept_fraction = 1.0;

  // 0 < value <= log((2d+1)p) + 3 stderr.
  bool within_bound(int d, double p) const;
};

// (1/n) log N_n or (1/n) log Nbar_n (m > 0) averaged over conditioned replicas.
// The conditioning horizon is raised to n + m so every replica has Nbar_n >= 1.
// m = nullopt selects ceil(n/4).
GrowthEstimate estimate_alpha0(const LatticeParams& params, std::int64_t n, std::size_t replicas,
                               std::optional<std::int64_t> m = std::nullopt,
                               const EstimatorConfig& cfg = {});

// Plain and survival-filtered estimates on the same conditioned replicas.
struct AlphaPair {
  GrowthEstimate plain;
  GrowthEstimate surviving;
};
AlphaPair estimate_alpha0_pair(const LatticeParams& params, std::int64_t n, std::size_t replicas,
                               std::optional<std::int64_t> m = std::nullopt,
                               const EstimatorConfig& cfg = {});

// (1/S_n) log N_{(n y, S_n)} along regenerating chains of n_links links.
GrowthEstimate estimate_alpha_dir(const LatticeParams& params, const Coord& y, std::int64_t h,
                                  std::int64_t n_links, std::size_t replicas,
                                  const EstimatorConfig& cfg = {});

struct ShapeEntry {
  Coord x{};
  double mu = 0.0;
  double std_error = 0.0;
  std::vector<std::int64_t> n_list;
  std::vector<double> means;     // mean sigma(n x) / n (or hull ratio) per n
  std::vector<double> std_errors;
  std::vector<std::size_t> used;
  std::size_t excluded = 0;
};

struct ShapeEstimate {
  int d = 1;
  std::string method = "sigma-based";
  std::vector<ShapeEntry> entries;

  // mu at z by positive homogeneity from an entry parallel to z; nullopt if none.
  std::optional<double> evaluate(const Coord& z) const;
};

// mean sigma(n x)/n per n over conditioned replicas; mu-hat is the minimum.
ShapeEntry estimate_mu(const LatticeParams& params, const Coord& x,
                       const std::vector<std::int64_t>& n_list, std::size_t replicas,
                       const EstimatorConfig& cfg = {});

// n / max{j : j x in H_n} over conditioned replicas.
ShapeEntry estimate_mu_hull(const LatticeParams& params, const Coord& x, std::int64_t n,
                            std::size_t replicas, const EstimatorConfig& cfg = {});

// Mean sigma(0) over conditioned replicas (scale of the h encoding).
RunningStats estimate_sigma0(const LatticeParams& params, std::size_t replicas,
                             const EstimatorConfig& cfg = {});

struct GridPoint {
  Coord z{};
  std::int64_t l = 1;
  Coord y{};
  std::int64_t h = 1;
  std::vector<double> target;  // y / E s(y,h) from the reference estimates
};

struct DirectionGrid {
  std::vector<GridPoint> points;
  std::vector<std::string> notes;  // skipped directions
  std::int64_t scale = 1;
  std::int64_t resolution = 1;
};

// Rational directions z/l with |z|_inf <= l and mu(z) < l, encoded as
// (y,h) = (scale z, ceil(scale (l - mu(z)) / E sigma(0))).
DirectionGrid build_direction_grid(int d, std::int64_t resolution, const ShapeEstimate& mu_ref,
                                   double mean_sigma0, std::int64_t scale = 1);

struct SymmetryCheck {
  std::size_t a = 0, b = 0;  // indices into the grid
  double difference = 0.0;
  double pooled = 0.0;
  bool ok = true;
};

struct ConcavityCheck {
  std::size_t a = 0, mid = 0, b = 0;
  double slack = 0.0;  // value(mid) minus the chord between a and b at mid's direction
  double pooled = 0.0;
  bool ok = true;
};

struct GrowthProfile {
  DirectionGrid grid;
  std::vector<std::optional<GrowthEstimate>> estimates;  // nullopt = failed point
  std::vector<std::string> notes;
  std::vector<SymmetryCheck> symmetry;
  std::vector<ConcavityCheck> concavity;
  std::size_t center_index = 0;  // grid point nearest 0
  std::size_t max_index = 0;
  double max_excess = 0.0;       // value(max) - value(center)
  double max_pooled = 0.0;
  bool max_at_center = true;
};

GrowthProfile estimate_profile(const LatticeParams& params, const DirectionGrid& grid,
                               std::int64_t n_links, std::size_t replicas,
                               const EstimatorConfig& cfg = {});

// Recomputes the diagnostics of a profile from its estimates.
void attach_profile_diagnostics(GrowthProfile& profile);

// Scans k = 1..n_max and keeps k with (0,0) -> k (y,h). Per replica the value
// is the slope b of the least-squares fit log N_{k (y,h)} ~ a + b k h + c log(k h)
// over kept k >= K/8 (K the last kept k); the log term absorbs the polynomial
// prefactor of a point count. The plain (1/(K h)) log N_{K (y,h)} is reported
// as ratio_value.
GrowthEstimate directional_subsequence_estimate(const LatticeParams& params, const Coord& y,
                                                std::int64_t h, std::int64_t n_max,
                                                std::size_t replicas,
                                                const EstimatorConfig& cfg = {},
                                                std::optional<double> mu_of_y = std::nullopt);

struct MartingaleTrace {
  std::int64_t n_max = 0;
  std::size_t replicas = 0;
  // log_w[r][n] = log W_n for replica r; -inf when N_n = 0.
  std::vector<std::vector<double>> log_w;
  std::vector<double> mean_w, se_w, median_w;
  // Increments W_{n+1} - W_n, n = 0..n_max-1.
  std::vector<double> mean_increment, se_increment;
  SeedRange seeds;
};

// Unconditioned replicas (sub-seeds first_index ...).
MartingaleTrace track_martingale(const LatticeParams& params, std::int64_t n_max,
                                 std::size_t replicas, const EstimatorConfig& cfg = {});

struct TauTailRow {
  std::int64_t n = 0;
  double p_equal = 0.0;  // P(tau = n)
  double p_tail = 0.0;   // P(n <= tau < infinity-proxy)
  double se_tail = 0.0;
};

struct TauFit {
  double A = 0.0;
  double B = 0.0;
  std::size_t points = 0;
};

struct TauTailReport {
  std::int64_t cap = 0;
  std::size_t replicas = 0;
  std::size_t survived = 0;
  double survival_fraction = 0.0;
  double survival_se = 0.0;
  std::vector<TauTailRow> table;  // n = 1..cap
  std::optional<TauFit> fit;
  std::string fit_note;

  // Throws DegenerateFitError when no fit was possible.
  const TauFit& require_fit() const;
};

TauTailReport estimate_tau_tail(const LatticeParams& params, std::size_t replicas,
                                std::int64_t t_max, const EstimatorConfig& cfg = {});

// Smallest p on the grid 0.05, 0.10, ..., 0.95 whose empirical survival
// fraction (survival to t_max) reaches `target`; 0.95 if none does.
double calibrate_default_p(int d, std::uint64_t seed, double target = 0.95,
                           std::size_t replicas = 400, std::int64_t t_max = 128);

}  // namespace oppaths
