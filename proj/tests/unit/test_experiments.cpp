#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "quantamimo/constellation.hpp"
#include "quantamimo/experiments.hpp"

using namespace qmimo;

namespace {

SweepPlan small_plan() {
  SweepPlan p;
  p.base.antennas = 12;
  p.base.users = 2;
  p.base.coherence = 100;
  p.base.constellation_order = 4;
  p.base.pilots_per_user = 2;
  p.base.channel_realizations = 3;
  p.base.noise_trials = 200;
  p.base.mixture_samples = 5000;
  p.base.zf_covariance_trials = 200;
  p.base.workers = 1;
  return p;
}

// Largest minus smallest mean |output| over the amplitude rings, relative to
// their average.
double ring_spread(const std::vector<ScatterPoint>& pts) {
  std::map<long, std::pair<double, int>> rings;
  for (const auto& p : pts) {
    auto& r = rings[std::lround(std::norm(p.input) * 1000)];
    r.first += std::abs(p.output);
    r.second += 1;
  }
  std::vector<double> means;
  for (const auto& [key, r] : rings) means.push_back(r.first / r.second);
  const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  double avg = 0;
  for (double m : means) avg += m / static_cast<double>(means.size());
  return (*hi - *lo) / avg;
}

}  // namespace

TEST_CASE("percentile") {
  CHECK(nearest_rank_percentile({5, 1, 4, 2, 3, 9, 8, 7, 6, 10}, 0.1) == 1.0);
  CHECK(nearest_rank_percentile({5, 1, 4, 2, 3, 9, 8, 7, 6, 10}, 0.25) == 3.0);
  CHECK(nearest_rank_percentile({3.5}, 0.1) == 3.5);
  std::vector<double> v;
  for (int i = 1; i <= 1000; ++i) v.push_back(1001 - i);
  CHECK(nearest_rank_percentile(v, 0.1) == 100.0);
  CHECK(nearest_rank_percentile(v, 1.0) == 1000.0);
  CHECK_THROWS_AS(nearest_rank_percentile({}, 0.1), ContractViolation);
  CHECK_THROWS_AS(nearest_rank_percentile({1.0}, 0.0), ContractViolation);
}

TEST_CASE("plan variants") {
  SweepPlan p = small_plan();
  CHECK(p.variants().size() == 1);
  p.bits = {1, 3, 0};
  p.detectors = {Detector::mrc, Detector::zf};
  CHECK(p.variants().size() == 6);
}

TEST_CASE("sweep points are independent of the sweep") {
  SweepPlan p = small_plan();
  p.bits = {1, 0};
  const std::vector<double> all{-5.0, 5.0};
  const std::vector<double> one{5.0};
  const SweepResult a = sweep_snr(p, all);
  const SweepResult b = sweep_snr(p, one);
  REQUIRE(a.rows.size() == 4);
  REQUIRE(b.rows.size() == 2);
  CHECK(a.sweep_var == "snr_db");
  for (int i = 0; i < 2; ++i) {
    CHECK(a.rows[2 + i].rate.rate == b.rows[i].rate.rate);
    CHECK(a.rows[2 + i].variant.bits == b.rows[i].variant.bits);
  }
  CHECK(sweep_snr(p, std::vector<double>{}).rows.empty());
}

TEST_CASE("antenna and coherence sweeps") {
  SweepPlan p = small_plan();
  p.base.detector = Detector::zf;
  const std::vector<int> n{2, 12};
  const SweepResult r = sweep_antennas(p, n);
  CHECK(r.sweep_var == "antennas");
  for (const auto& row : r.rows) CHECK(std::isfinite(row.rate.rate));

  const std::vector<int> t{2, 50};
  const SweepResult c = sweep_coherence(p, t);
  CHECK(c.sweep_var == "coherence");
  bool saw_perfect = false;
  for (const auto& row : c.rows) {
    if (row.variant.csi == CsiMode::perfect) saw_perfect = true;
    if (row.sweep_value == 2.0 && row.variant.csi == CsiMode::estimated) CHECK(row.rate.rate == 0.0);
  }
  CHECK(saw_perfect);
}

TEST_CASE("approximation rows") {
  SweepPlan p = small_plan();
  p.rate_method = RateMethod::both;
  p.bits = {1};
  const std::vector<double> v{0.0};
  const SweepResult r = sweep_snr(p, v);
  REQUIRE(r.rows.size() == 1);
  REQUIRE(r.rows[0].approx.has_value());
  CHECK(r.rows[0].approx->rate > 0.0);

  p.rate_method = RateMethod::approx;
  p.bits = {3};
  CHECK_THROWS_AS(sweep_snr(p, v), ContractViolation);
}

TEST_CASE("sir sweep") {
  SweepPlan p = small_plan();
  p.base.bits = 0;
  p.base.snr_db = -10.0;
  const std::vector<double> xi{0.0, -20.0};
  const SweepResult r = sweep_sir(p, xi);
  CHECK(r.sweep_var == "sir_db");
  CHECK(r.rows.size() == 2);
  p.base.users = 1;
  p.base.pilots_per_user = 2;
  CHECK_THROWS_AS(sweep_sir(p, xi), ContractViolation);
}

TEST_CASE("distance spread") {
  SweepPlan p = small_plan();
  p.base.antennas = 16;
  p.base.users = 3;
  p.base.pilots_per_user = 2;
  p.base.channel_realizations = 2;
  p.base.noise_trials = 100;
  p.bits = {1, 3};
  const GeometryConfig g;
  const auto base = distance_spread_drops(g, p, 185.0, 0.0, 3);
  REQUIRE(base.size() == 2);
  CHECK(base[0].size() == 3u);
  for (const auto& v : base)
    for (double r : v) CHECK((r >= 0.0 && r <= 2.0));
  // Drops reuse their placement draws across spreads.
  CHECK(distance_spread_drops(g, p, 185.0, 0.0, 3) == base);

  DistanceSpreadOptions o;
  o.drops = 5;
  const SweepResult s = study_distance_spread(g, p, o);
  CHECK(s.sweep_var == "spread_m");
  CHECK(s.rows.size() == 4);
  const auto drops = distance_spread_drops(g, p, 185.0, 150.0, 5);
  CHECK(s.rows[2].rate.rate == nearest_rank_percentile(drops[0], 0.1));
  CHECK(s.rows[2].rate.ci_halfwidth == 0.0);
}

TEST_CASE("scatter demonstrations") {
  SimConfig c;
  c.antennas = 200;
  c.users = 1;
  c.constellation_order = 16;
  c.seed = 3;
  c.workers = 1;

  c.snr_db = 0.0;
  const auto low = scatter_demo(c, ScatterScenario::iid, 1600);
  CHECK(low.size() == 1600);
  CHECK(nearest_centroid_accuracy(low, 16) > 0.95);

  c.snr_db = 20.0;
  const auto high = scatter_demo(c, ScatterScenario::iid, 1600);
  CHECK(ring_spread(high) < ring_spread(low));

  const auto flat = scatter_demo(c, ScatterScenario::nonfading, 1600);
  const double acc = nearest_centroid_accuracy(flat, 16);
  CHECK(acc > 0.15);
  CHECK(acc < 0.4);

  const auto dithered = scatter_demo(c, ScatterScenario::nonfading_dither, 1600);
  CHECK(nearest_centroid_accuracy(dithered, 16) > acc);

  CHECK(scatter_scenario_from_name("nonfading_dither") == ScatterScenario::nonfading_dither);
  CHECK_THROWS_AS(scatter_scenario_from_name("rician"), ContractViolation);
}
