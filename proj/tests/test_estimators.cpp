#include <doctest.h>

#include <cmath>

#include "oppaths/errors.hpp"
#include "oppaths/estimators.hpp"
#include "oppaths/oracle.hpp"

using namespace oppaths;

namespace {

const double kLog3 = std::log(3.0);

ShapeEstimate shape_of(int d, std::initializer_list<std::pair<Coord, double>> entries) {
  ShapeEstimate s;
  s.d = d;
  for (const auto& [x, mu] : entries) {
    ShapeEntry e;
    e.x = x;
    e.mu = mu;
    s.entries.push_back(e);
  }
  return s;
}

GrowthEstimate fixed(double value, double se, double dir) {
  GrowthEstimate g;
  g.value = value;
  g.std_error = se;
  g.direction = {dir};
  return g;
}

}  // namespace

TEST_CASE("alpha0 with every edge open") {
  const auto e = estimate_alpha0(LatticeParams{1, 1.0, 1}, 40, 5);
  CHECK(std::abs(e.value - kLog3) < 1e-12);
  CHECK(e.std_error < 1e-12);
  CHECK(e.replicas == 5);
  CHECK(e.method == GrowthMethod::Surviving);
  REQUIRE(e.survival_m.has_value());
  CHECK(*e.survival_m == 10);
  CHECK(e.horizon >= 50);
  const auto plain = estimate_alpha0(LatticeParams{1, 1.0, 1}, 40, 5, 0);
  CHECK(plain.method == GrowthMethod::Plain);
  CHECK(std::abs(plain.value - kLog3) < 1e-12);
  CHECK_THROWS_AS(estimate_alpha0(LatticeParams{1, 1.0, 1}, 0, 5), ArgumentError);
  CHECK_THROWS_AS(estimate_alpha0(LatticeParams{1, 0.0, 1}, 4, 5), SamplingError);
}

TEST_CASE("alpha0 respects the first-moment bound") {
  for (int d = 1; d <= 2; ++d) {
    const double p = d == 1 ? 0.8 : 0.6;
    const auto e = estimate_alpha0(LatticeParams{d, p, 3}, 64, 20);
    CHECK(e.within_bound(d, p));
    CHECK(e.value > 0.0);
    CHECK(e.value <= std::log((2 * d + 1) * p) + 3 * e.std_error);
    CHECK(e.samples.size() == 20);
    CHECK(e.seeds.accepted == 20);
  }
}

TEST_CASE("plain and surviving alpha0 agree") {
  const auto pair = estimate_alpha0_pair(LatticeParams{1, 0.8, 9}, 128, 40);
  CHECK(pair.plain.replicas == pair.surviving.replicas);
  CHECK(pair.plain.seeds.first == pair.surviving.seeds.first);
  for (std::size_t i = 0; i < pair.plain.samples.size(); ++i) CHECK(pair.surviving.samples[i] <= pair.plain.samples[i] + 1e-12);
  CHECK(std::abs(pair.plain.value - pair.surviving.value) <
        3 * pooled_se(pair.plain.std_error, pair.surviving.std_error));
}

TEST_CASE("estimators are reproducible and thread independent") {
  EstimatorConfig one;
  EstimatorConfig four;
  four.threads = 4;
  const auto a = estimate_alpha0(LatticeParams{1, 0.8, 5}, 32, 12, std::nullopt, one);
  const auto b = estimate_alpha0(LatticeParams{1, 0.8, 5}, 32, 12, std::nullopt, four);
  CHECK(a.samples == b.samples);
  CHECK(a.value == b.value);
}

TEST_CASE("directional growth with every edge open") {
  const std::int64_t n = 50;
  const auto e = estimate_alpha_dir(LatticeParams{1, 1.0, 0}, Coord{}, 1, n, 3);
  CHECK(e.method == GrowthMethod::RegenSubsequence);
  CHECK(e.mean_layers == doctest::Approx(2.0 * n));
  CHECK(e.value == doctest::Approx(oracle::p1_log_point_count(2 * n, 0) / (2.0 * n)).epsilon(1e-12));
  CHECK(e.value < kLog3);
  const auto longer = estimate_alpha_dir(LatticeParams{1, 1.0, 0}, Coord{}, 1, 4 * n, 1);
  CHECK(longer.value > e.value);
  CHECK(kLog3 - longer.value < 0.02);

  // (y,h) = (1,1): s = 2, points (k, 2k), direction 1/2.
  const auto tilt = estimate_alpha_dir(LatticeParams{1, 1.0, 0}, Coord{1, 0, 0}, 1, 200, 1);
  REQUIRE(tilt.direction.size() == 1);
  CHECK(tilt.direction[0] == doctest::Approx(0.5));
  CHECK(tilt.value == doctest::Approx(oracle::p1_log_point_count(400, 200) / 400.0).epsilon(1e-12));
  CHECK(std::abs(tilt.value - oracle::p1_growth(0.5)) < 0.02);
}

TEST_CASE("directional growth is positive and bounded") {
  for (std::int32_t y : {-1, 0, 1}) {
    const auto e = estimate_alpha_dir(LatticeParams{1, 0.8, 12}, Coord{y, 0, 0}, 1, 30, 10);
    CHECK(e.value > 0.0);
    CHECK(e.value <= kLog3);
    CHECK(e.within_bound(1, 0.8));
    CHECK(e.replicas + e.excluded >= 10);
  }
  CHECK_THROWS_AS(estimate_alpha_dir(LatticeParams{1, 0.8, 12}, Coord{}, 0, 30, 2), ArgumentError);
}

TEST_CASE("shape estimate with every edge open") {
  const auto e = estimate_mu(LatticeParams{2, 1.0, 0}, Coord{2, -1, 0}, {1, 2, 4}, 3);
  CHECK(e.mu == doctest::Approx(3.0));
  CHECK(e.std_error == doctest::Approx(0.0));
  for (double m : e.means) CHECK(m == doctest::Approx(3.0));
  const auto zero = estimate_mu(LatticeParams{1, 1.0, 0}, Coord{}, {1, 3}, 2);
  CHECK(zero.means[0] == doctest::Approx(1.0));
  CHECK(zero.means[1] == doctest::Approx(1.0 / 3.0));
  const auto hull = estimate_mu_hull(LatticeParams{1, 1.0, 0}, Coord{1, 0, 0}, 20, 2);
  CHECK(hull.mu == doctest::Approx(1.0));
  CHECK_THROWS_AS(estimate_mu(LatticeParams{1, 1.0, 0}, Coord{1, 0, 0}, {}, 2), ArgumentError);
  CHECK_THROWS_AS(estimate_mu_hull(LatticeParams{1, 1.0, 0}, Coord{}, 5, 2), ArgumentError);
}

TEST_CASE("shape estimate trend and symmetry") {
  const LatticeParams params{1, 0.8, 44};
  const auto plus = estimate_mu(params, Coord{1, 0, 0}, {1, 2, 4, 8, 16}, 120);
  for (std::size_t i = 1; i < plus.means.size(); ++i) {
    CHECK(plus.means[i] <= plus.means[i - 1] + 3 * pooled_se(plus.std_errors[i], plus.std_errors[i - 1]));
  }
  EstimatorConfig other;
  other.first_index = 100000;
  const auto minus = estimate_mu(params, Coord{-1, 0, 0}, {1, 2, 4, 8, 16}, 120, other);
  CHECK(std::abs(plus.mu - minus.mu) < 3 * pooled_se(plus.std_error, minus.std_error));
  CHECK(plus.mu >= 1.0);
  const auto hull = estimate_mu_hull(params, Coord{1, 0, 0}, 200, 30);
  CHECK(hull.mu > 0.9);
  CHECK(hull.mu < plus.mu + 0.2);
}

TEST_CASE("shape evaluation is positively homogeneous") {
  const ShapeEstimate s = shape_of(2, {{Coord{1, 0, 0}, 1.2}, {Coord{1, 1, 0}, 2.5}});
  CHECK(*s.evaluate(Coord{3, 0, 0}) == doctest::Approx(3.6));
  CHECK(*s.evaluate(Coord{2, 2, 0}) == doctest::Approx(5.0));
  CHECK(*s.evaluate(Coord{}) == doctest::Approx(0.0));
  CHECK_FALSE(s.evaluate(Coord{-1, 0, 0}).has_value());
  CHECK_FALSE(s.evaluate(Coord{1, 2, 0}).has_value());
}

TEST_CASE("direction grid") {
  const ShapeEstimate s = shape_of(1, {{Coord{1, 0, 0}, 1.0}, {Coord{-1, 0, 0}, 1.0}, {Coord{2, 0, 0}, 2.0},
                                       {Coord{-2, 0, 0}, 2.0}});
  const DirectionGrid g = build_direction_grid(1, 2, s, 1.0);
  bool saw_half = false, saw_zero = false;
  for (const auto& pt : g.points) {
    CHECK(std::abs(pt.target[0]) < 1.0);
    CHECK(pt.h >= 1);
    CHECK(pt.y == scaled(pt.z, g.scale));
    if (pt.z[0] == 1) {
      saw_half = true;
      CHECK(pt.h == 1);
      CHECK(pt.target[0] == doctest::Approx(0.5));
    }
    if (pt.z[0] == 0) {
      saw_zero = true;
      CHECK(pt.target[0] == doctest::Approx(0.0));
      CHECK(pt.h == 2);
    }
    CHECK(std::abs(pt.z[0]) < 2);
  }
  CHECK(saw_half);
  CHECK(saw_zero);
  CHECK_FALSE(g.notes.empty());
  CHECK_THROWS_AS(build_direction_grid(1, 0, s, 1.0), ArgumentError);
  CHECK_THROWS_AS(build_direction_grid(1, 2, s, 0.0), ArgumentError);

  const DirectionGrid wide = build_direction_grid(1, 2, s, 1.0, 4);
  for (const auto& pt : wide.points) CHECK(pt.y == scaled(pt.z, 4));
}

TEST_CASE("profile diagnostics") {
  GrowthProfile prof;
  for (int i = -2; i <= 2; ++i) {
    GridPoint pt;
    pt.z = Coord{i, 0, 0};
    pt.l = 3;
    pt.target = {i / 3.0};
    prof.grid.points.push_back(pt);
  }
  auto concave = [](double x) { return 1.0 - x * x; };
  for (const auto& pt : prof.grid.points) prof.estimates.push_back(fixed(concave(pt.target[0]), 0.01, pt.target[0]));
  attach_profile_diagnostics(prof);
  CHECK(prof.center_index == 2);
  CHECK(prof.max_at_center);
  CHECK_FALSE(prof.symmetry.empty());
  for (const auto& s : prof.symmetry) CHECK(s.ok);
  CHECK_FALSE(prof.concavity.empty());
  for (const auto& c : prof.concavity) CHECK(c.ok);

  // A dip in the middle breaks concavity and moves the maximum.
  prof.estimates[2] = fixed(0.5, 0.01, 0.0);
  attach_profile_diagnostics(prof);
  bool broken = false;
  for (const auto& c : prof.concavity) broken |= !c.ok;
  CHECK(broken);
  CHECK_FALSE(prof.max_at_center);

  // Asymmetric values fail the symmetry check.
  prof.estimates[2] = fixed(1.0, 0.01, 0.0);
  prof.estimates[0] = fixed(0.2, 0.01, -2.0 / 3.0);
  attach_profile_diagnostics(prof);
  bool asym = false;
  for (const auto& s : prof.symmetry) asym |= !s.ok;
  CHECK(asym);

  // Failed points are skipped.
  prof.estimates[1].reset();
  CHECK_NOTHROW(attach_profile_diagnostics(prof));
}

TEST_CASE("profile with every edge open") {
  const ShapeEstimate s = shape_of(1, {{Coord{1, 0, 0}, 1.0}, {Coord{-1, 0, 0}, 1.0}});
  const DirectionGrid g = build_direction_grid(1, 2, s, 1.0);
  const auto prof = estimate_profile(LatticeParams{1, 1.0, 0}, g, 200, 1);
  REQUIRE(prof.estimates.size() == g.points.size());
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    REQUIRE(prof.estimates[i].has_value());
    const double t = prof.estimates[i]->direction[0];
    CHECK(std::abs(prof.estimates[i]->value - oracle::p1_growth(t)) < 0.02);
  }
  CHECK(std::abs(prof.estimates[prof.center_index]->value - kLog3) < 0.02);
  CHECK(prof.max_at_center);
  CHECK_THROWS_AS(estimate_profile(LatticeParams{1, 1.0, 0}, DirectionGrid{}, 10, 1), ArgumentError);
}

TEST_CASE("subsequence estimate with every edge open") {
  const auto e = directional_subsequence_estimate(LatticeParams{1, 1.0, 0}, Coord{}, 1, 200, 2);
  CHECK(e.kept_fraction == doctest::Approx(1.0));
  CHECK(e.method == GrowthMethod::DirectionalSubsequence);
  CHECK(std::abs(e.value - kLog3) < 1e-3);
  REQUIRE(e.ratio_value.has_value());
  CHECK(*e.ratio_value == doctest::Approx(oracle::p1_log_point_count(200, 0) / 200.0).epsilon(1e-12));
  CHECK_THROWS_AS(directional_subsequence_estimate(LatticeParams{1, 1.0, 0}, Coord{2, 0, 0}, 1, 10, 1),
                  PreconditionError);
  CHECK_THROWS_AS(directional_subsequence_estimate(LatticeParams{1, 0.8, 0}, Coord{1, 0, 0}, 2, 10, 1, {}, 2.5),
                  PreconditionError);
  CHECK_THROWS_AS(directional_subsequence_estimate(LatticeParams{1, 1.0, 0}, Coord{}, 1, 0, 1), ArgumentError);
}

TEST_CASE("subsequence estimate tracks alpha0") {
  const LatticeParams params{1, 0.8, 71};
  const auto sub = directional_subsequence_estimate(params, Coord{}, 1, 256, 40);
  const auto a0 = estimate_alpha0(params, 256, 40);
  CHECK(sub.kept_fraction > 0.5);
  CHECK(sub.kept_fraction <= 1.0);
  CHECK(std::abs(sub.value - a0.value) < 3 * pooled_se(sub.std_error, a0.std_error));
}

TEST_CASE("martingale") {
  const auto tr = track_martingale(LatticeParams{1, 0.7, 8}, 20, 2000);
  REQUIRE(tr.mean_w.size() == 21);
  CHECK(tr.mean_w[0] == doctest::Approx(1.0));
  CHECK(tr.se_w[0] == doctest::Approx(0.0));
  for (const auto& row : tr.log_w) CHECK(row[0] == doctest::Approx(0.0));
  for (std::size_t n = 0; n < tr.mean_increment.size(); ++n) {
    CHECK(std::abs(tr.mean_increment[n]) < 3 * tr.se_increment[n] + 1e-12);
  }
  for (double m : tr.median_w) CHECK(m >= 0.0);

  const auto open = track_martingale(LatticeParams{1, 1.0, 8}, 10, 3);
  for (double m : open.mean_w) CHECK(m == doctest::Approx(1.0));
  CHECK_THROWS_AS(track_martingale(LatticeParams{1, 0.0, 8}, 10, 3), ArgumentError);
}

TEST_CASE("martingale decays in one dimension") {
  const auto tr = track_martingale(LatticeParams{1, 0.8, 13}, 400, 200);
  CHECK(tr.median_w[400] < tr.median_w[50]);
}

TEST_CASE("tau tail") {
  const auto dead = estimate_tau_tail(LatticeParams{1, 0.0, 1}, 50, 10);
  CHECK(dead.table[0].p_equal == doctest::Approx(1.0));
  CHECK(dead.survived == 0);
  CHECK_FALSE(dead.fit.has_value());
  CHECK_THROWS_AS(dead.require_fit(), DegenerateFitError);

  const auto all = estimate_tau_tail(LatticeParams{1, 1.0, 1}, 50, 10);
  CHECK(all.survival_fraction == doctest::Approx(1.0));
  CHECK_THROWS_AS(all.require_fit(), DegenerateFitError);

  const auto half = estimate_tau_tail(LatticeParams{1, 0.5, 1}, 20000, 64);
  const double se = std::sqrt(0.125 * 0.875 / 20000);
  CHECK(std::abs(half.table[0].p_equal - 0.125) < 3 * se);

  const auto mid = estimate_tau_tail(LatticeParams{1, 0.7, 1}, 20000, 128);
  const auto& fit = mid.require_fit();
  CHECK(fit.B > 0.0);
  CHECK(fit.points >= 3);
  for (std::size_t i = 1; i < mid.table.size(); ++i) CHECK(mid.table[i].p_tail <= mid.table[i - 1].p_tail);
  CHECK(mid.survival_fraction > 0.0);
  CHECK(mid.survival_fraction < 1.0);
  CHECK_THROWS_AS(estimate_tau_tail(LatticeParams{1, 0.7, 1}, 10, 0), ArgumentError);
}

TEST_CASE("default p calibration") {
  CHECK(calibrate_default_p(1, 2024) == doctest::Approx(0.75));
  CHECK(calibrate_default_p(2, 2024) == doctest::Approx(0.5));
  CHECK(calibrate_default_p(3, 2024) == doctest::Approx(0.4));
  CHECK_THROWS_AS(calibrate_default_p(1, 2024, 1.5), ArgumentError);
}
