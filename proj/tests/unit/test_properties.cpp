#include <cmath>

#include "doctest.h"
#include "quantamimo/constellation.hpp"
#include "quantamimo/experiments.hpp"
#include "quantamimo/link.hpp"
#include "quantamimo/rate_approx.hpp"
#include "quantamimo/rate_mc.hpp"

using namespace qmimo;

namespace {

ComplexMatrix random_matrix(RngStream& s, int rows, int cols) {
  ComplexMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = s.cgauss(1.0);
  return m;
}

int pick(RngStream& s, int lo, int hi) { return lo + static_cast<int>(s.index(hi - lo + 1)); }

}  // namespace

TEST_CASE("zf filters null every other user") {
  RngStream s(61);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = pick(s, 1, 8);
    const int n = pick(s, k, 40);
    const ChannelEstimate e = perfect_estimate(random_matrix(s, n, k));
    const ReceiveFilter f = build_filter(e, Detector::zf);
    const ComplexMatrix g = f.a.adjoint() * e.h;
    CHECK((g - ComplexMatrix::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("noiseless infinite-precision LS is exact") {
  RngStream s(62);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = pick(s, 1, 6);
    const int n = pick(s, k, 20);
    const int p = k * pick(s, 1, 5);
    ChannelBlock b;
    b.h = random_matrix(s, n, k);
    for (int u = 0; u < k; ++u) b.powers.push_back(db_to_linear(-20 + 40 * s.uniform()));
    const PilotSchedule sched = build_pilots(k, p, b.powers);
    const ComplexMatrix r = b.h * sched.symbols();
    CHECK((ls_estimate(r, sched).h - b.h).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("pilot energy meets the power constraint with equality") {
  RngStream s(63);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = pick(s, 1, 12);
    const int t = pick(s, k, 2000);
    const int p = k * pick(s, 1, t / k);
    std::vector<double> rho(k);
    for (auto& r : rho) r = db_to_linear(-30 + 60 * s.uniform());
    const PilotSchedule sched = build_pilots(k, p, rho);
    double total = 0, budget = 0;
    for (double r : rho) {
      total += (t - p) * r;
      budget += t * r;
    }
    total += sched.energy();
    CHECK(std::abs(total - budget) <= 1e-9 * budget);
  }
}

TEST_CASE("rate never exceeds the pre-log bound") {
  RngStream s(64);
  const int orders[] = {4, 16, 64};
  for (int trial = 0; trial < 12; ++trial) {
    SimConfig c;
    c.users = pick(s, 1, 3);
    c.antennas = pick(s, c.users, 12);
    c.coherence = pick(s, 4 * c.users, 80);
    c.snr_db = -10 + 40 * s.uniform();
    c.constellation_order = orders[s.index(3)];
    c.bits = pick(s, 0, 3);
    c.detector = s.index(2) ? Detector::zf : Detector::mrc;
    c.pilots_per_user = pick(s, 1, 3);
    c.channel_realizations = 2;
    c.noise_trials = 64;
    c.seed = trial;
    c.workers = 1;
    CAPTURE(trial);
    const RateEstimate r = estimate_rate(c);
    const double bound =
        (c.coherence - r.pilots_used) / static_cast<double>(c.coherence) * std::log2(c.constellation_order);
    CHECK(r.rate >= 0.0);
    CHECK(r.rate <= bound + 1e-12);
  }
}

TEST_CASE("grid refinement never loses information") {
  // Doubling the bins splits every cell of the same box in four, and the
  // plug-in MI of a refined partition cannot be smaller.
  RngStream s(65);
  for (int trial = 0; trial < 20; ++trial) {
    const int order = trial % 2 ? 4 : 16;
    const Constellation c = Constellation::qam(order);
    const double sigma = 0.05 + s.uniform();
    std::vector<cplx> v;
    for (int m = 0; m < order; ++m)
      for (int i = 0; i < 300; ++i) v.push_back(c[m] + s.cgauss(sigma * sigma));
    double prev = 0;
    for (int bins : {4, 8, 16, 32, 64, 128}) {
      const double mi = mutual_info_grid(v, order, GridSpec{bins, 0.01});
      CHECK(mi >= prev - 1e-12);
      CHECK(mi <= std::log2(order) + 1e-12);
      prev = mi;
    }
  }
}

TEST_CASE("results are bit-identical for any worker count") {
  SimConfig c;
  c.antennas = 24;
  c.users = 3;
  c.coherence = 120;
  c.snr_db = 0.0;
  c.constellation_order = 16;
  c.channel_realizations = 8;
  c.noise_trials = 100;
  c.pilot_candidates = {1, 2, 4};
  c.mixture_samples = 3000;
  c.zf_covariance_trials = 100;
  c.seed = 1234;

  SimConfig one = c, eight = c;
  one.workers = 1;
  eight.workers = 8;
  const RateEstimate a = estimate_rate(one), b = estimate_rate(eight);
  CHECK(a.rate == b.rate);
  CHECK(a.ci_halfwidth == b.ci_halfwidth);
  CHECK(a.pilots_used == b.pilots_used);

  const RateEstimate x = approx_rate(one), y = approx_rate(eight);
  CHECK(x.rate == y.rate);
  CHECK(x.ci_halfwidth == y.ci_halfwidth);

  SweepPlan p1, p8;
  p1.base = one;
  p8.base = eight;
  p1.bits = p8.bits = {1, 3};
  p1.base.pilots_per_user = p8.base.pilots_per_user = 2;
  p1.base.channel_realizations = p8.base.channel_realizations = 2;
  const GeometryConfig g;
  const auto d1 = distance_spread_drops(g, p1, 185.0, 150.0, 4);
  const auto d8 = distance_spread_drops(g, p8, 185.0, 150.0, 4);
  CHECK(d1 == d8);
}
