// Acceptance suite.  Usage: quantamimo_acceptance [--strict] [criterion ...]
//
// Prints one "criterion N: PASS|FAIL ..." line per criterion.  The exit status
// is non-zero when a criterion cannot be evaluated (an exception) and, with
// --strict, also when one evaluates to FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "../unit/oracles.hpp"
#include "quantamimo/constellation.hpp"
#include "quantamimo/experiments.hpp"
#include "quantamimo/link.hpp"
#include "quantamimo/quantizer.hpp"
#include "quantamimo/rate_approx.hpp"
#include "quantamimo/rate_mc.hpp"

using namespace qmimo;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records one check; every check is reported, failing or not.
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [miss]");
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string pct(double v) { return fmt(100 * v, 3) + "%"; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ComplexMatrix random_matrix(RngStream& s, int rows, int cols) {
  ComplexMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = s.cgauss(1.0);
  return m;
}

const SweepRow& find_row(const SweepResult& r, double value, int bits, int order = 0) {
  for (const auto& row : r.rows)
    if (row.sweep_value == value && row.variant.bits == bits &&
        (order == 0 || row.variant.constellation_order == order))
      return row;
  throw std::runtime_error("missing sweep row");
}

// 1. Lloyd-Max labels.
void quantizer_oracle(Outcome& o) {
  const double a = std::sqrt(2.0 / M_PI);
  const QuantizerSpec q1 = lloyd_max(1, 1.0);
  const double e1 = std::max(std::abs(q1.labels()[0] + a), std::abs(q1.labels()[1] - a));
  o.check(e1 < 1e-6, "b=1 label error " + fmt(e1, 2));

  const auto ref = oracle::lloyd_labels(4);
  const QuantizerSpec q2 = lloyd_max(2, 1.0);
  double e2 = 0;
  for (int i = 0; i < 4; ++i) e2 = std::max(e2, std::abs(q2.labels()[i] - ref[i]));
  o.check(e2 < 1e-3, "b=2 labels " + fmt(q2.labels()[2], 5) + ", " + fmt(q2.labels()[3], 5) +
                         " (oracle error " + fmt(e2, 2) + ")");
}

// 2. Grid MI on the one-bit binary-input channel.
void mi_oracle(Outcome& o) {
  const int per_symbol = 500'000;
  RngStream s(2024);
  std::vector<cplx> v;
  v.reserve(2 * per_symbol);
  for (double x : {-1.0, 1.0})
    for (int i = 0; i < per_symbol; ++i)
      v.emplace_back(x + std::sqrt(0.5) * s.normal() >= 0 ? 1.0 : -1.0, 0.0);
  const double mi = mutual_info_grid(v, 2, GridSpec{});
  const double expect = 1.0 - oracle::binary_entropy(oracle::normal_cdf(-std::sqrt(2.0)));
  o.check(std::abs(mi - expect) < 0.01, "I = " + fmt(mi, 5) + " vs " + fmt(expect, 5));
}

// 3. Closed-form MRC moments against simulation, K = N = 1.
void appendix_consistency(Outcome& o) {
  const int trials = 1'000'000;
  const Constellation qam = Constellation::qam(16);
  double worst = 0;
  for (int d = 0; d < 5; ++d) {
    RngStream s(3, {static_cast<std::uint64_t>(d)});
    const ComplexMatrix h = random_matrix(s, 1, 1);
    const cplx x = qam[s.index(16)];
    const std::vector<double> rho{db_to_linear(-5 + 20 * s.uniform())};
    const MomentStats m = mrc_moments(quadrant_stats(h, rho, 0, x), 1);
    const cplx a = sign_estimate(h).h(0, 0) / 2.0;

    // Standard errors from 100 batches of 10^4 outputs each.
    const int batches = 100, per_batch = trials / batches;
    const cplx signal = h(0, 0) * std::sqrt(rho[0]) * x;
    std::vector<Eigen::Vector2d> means;
    std::vector<Eigen::Matrix2d> covs;
    Eigen::Vector2d total = Eigen::Vector2d::Zero();
    Eigen::Matrix2d total2 = Eigen::Matrix2d::Zero();
    for (int bi = 0; bi < batches; ++bi) {
      Eigen::Vector2d s1 = Eigen::Vector2d::Zero();
      Eigen::Matrix2d s2 = Eigen::Matrix2d::Zero();
      for (int t = 0; t < per_batch; ++t) {
        const cplx w = s.cgauss(1.0);
        const cplx y{signal.real() + w.real() >= 0 ? 1.0 : -1.0,
                     signal.imag() + w.imag() >= 0 ? 1.0 : -1.0};
        const cplx z = std::conj(a) * y;
        const Eigen::Vector2d v(z.real(), z.imag());
        s1 += v;
        s2 += v * v.transpose();
      }
      total += s1;
      total2 += s2;
      const Eigen::Vector2d mb = s1 / per_batch;
      means.push_back(mb);
      covs.push_back(s2 / per_batch - mb * mb.transpose());
    }
    const Eigen::Vector2d mean = total / trials;
    const Eigen::Matrix2d cov = total2 / trials - mean * mean.transpose();
    for (int i = 0; i < 2; ++i) {
      double vm = 0;
      for (const auto& mb : means) vm += (mb(i) - mean(i)) * (mb(i) - mean(i));
      const double se = std::sqrt(vm / (batches - 1) / batches);
      const double err = std::abs(mean(i) - m.mean(i));
      worst = std::max(worst, se > 0 ? err / se : (err < 1e-12 ? 0.0 : 1e9));
      for (int j = 0; j < 2; ++j) {
        double vc = 0;
        for (const auto& cb : covs) vc += (cb(i, j) - cov(i, j)) * (cb(i, j) - cov(i, j));
        const double se2 = std::sqrt(vc / (batches - 1) / batches);
        const double err2 = std::abs(cov(i, j) - m.cov(i, j));
        worst = std::max(worst, se2 > 0 ? err2 / se2 : (err2 < 1e-12 ? 0.0 : 1e9));
      }
    }
  }
  o.check(worst <= 3.0, "worst deviation " + fmt(worst, 3) + " standard errors over 5 draws");
}

SimConfig single_user_mrc(int antennas, int realizations, int trials) {
  SimConfig c;
  c.antennas = antennas;
  c.users = 1;
  c.coherence = 1142;
  c.detector = Detector::mrc;
  c.constellation_order = 16;
  c.bits = 1;
  c.channel_realizations = realizations;
  c.noise_trials = trials;
  c.seed = 4;
  return c;
}

// 4. High-SNR approximation against Monte Carlo.
void approximation_accuracy(Outcome& o) {
  SweepPlan p;
  p.base = single_user_mrc(64, 100, 1000);
  p.rate_method = RateMethod::both;
  const std::vector<double> snrs{-5, 0, 10, 20};
  const SweepResult r = sweep_snr(p, snrs);
  for (const auto& row : r.rows) {
    const double gap = std::abs(row.approx->rate - row.rate.rate);
    o.check(gap <= 0.15, fmt(row.sweep_value) + " dB: approx " + fmt(row.approx->rate) + " mc " +
                             fmt(row.rate.rate) + " gap " + fmt(gap, 3));
  }
}

// 5. Shape of the single-user one-bit rate curves.
void rate_curve_shape(Outcome& o) {
  SweepPlan p;
  p.base = single_user_mrc(64, 30, 1000);
  p.constellations = {4, 16, 64};
  std::vector<double> snrs;
  for (double v = -10; v <= 30; v += 5) snrs.push_back(v);
  const SweepResult r = sweep_snr(p, snrs);

  const double qpsk5 = find_row(r, -5, 1, 4).rate.rate;
  const double qam5 = find_row(r, -5, 1, 16).rate.rate;
  o.check(qam5 > qpsk5, "-5 dB: 16qam " + fmt(qam5) + " > qpsk " + fmt(qpsk5));

  const RateEstimate& q10 = find_row(r, 10, 1, 4).rate;
  const double ceiling = 2.0 * (1142 - q10.pilots_used) / 1142.0;
  o.check(std::abs(q10.rate - ceiling) <= 0.1,
          "qpsk 10 dB " + fmt(q10.rate) + " vs " + fmt(ceiling) + " (P* = " +
              std::to_string(q10.pilots_used) + ")");

  // A drop larger than both confidence half-widths between consecutive points.
  double biggest = 0;
  std::string where;
  for (std::size_t i = 1; i < snrs.size(); ++i) {
    const RateEstimate& a = find_row(r, snrs[i - 1], 1, 64).rate;
    const RateEstimate& b = find_row(r, snrs[i], 1, 64).rate;
    const double drop = a.rate - b.rate - a.ci_halfwidth - b.ci_halfwidth;
    if (drop > biggest) {
      biggest = drop;
      where = fmt(snrs[i - 1]) + " -> " + fmt(snrs[i]) + " dB: " + fmt(a.rate) + " -> " + fmt(b.rate);
    }
  }
  if (where.empty()) {
    where = "(no drop:";
    for (double v : snrs) where += " " + fmt(find_row(r, v, 1, 64).rate.rate);
    where += ")";
  } else {
    where = "at " + where;
  }
  o.check(biggest > 0, "64qam non-monotone " + where);
}

// 6. Multi-bit to infinite-precision ratios, ten-user ZF cell.
void resolution_ratios(Outcome& o) {
  SweepPlan p;
  p.base.antennas = 200;
  p.base.users = 10;
  p.base.coherence = 1142;
  p.base.snr_db = -10;
  p.base.constellation_order = 64;
  p.base.detector = Detector::zf;
  p.base.channel_realizations = 100;
  p.base.noise_trials = 1000;
  p.base.seed = 6;
  p.bits = {0, 1, 2, 3};
  const std::vector<double> snr{-10};
  const SweepResult r = sweep_snr(p, snr);
  const double inf = find_row(r, -10, 0).rate.rate;
  const std::map<int, std::pair<double, double>> target{{1, {0.71, 0.05}}, {2, {0.90, 0.05}},
                                                        {3, {0.97, 0.04}}};
  for (const auto& [b, t] : target) {
    const double ratio = find_row(r, -10, b).rate.rate / inf;
    o.check(std::abs(ratio - t.first) <= t.second,
            std::to_string(b) + "-bit " + pct(ratio) + " (target " + pct(t.first) + ")");
  }
  o.detail << "; infinite precision " << fmt(inf);
}

// 7. Two-user SIR study.
void sir_study(Outcome& o) {
  SweepPlan p;
  p.base.antennas = 200;
  p.base.users = 2;
  p.base.pilots_per_user = 10;
  p.base.coherence = 1142;
  p.base.snr_db = -10;
  p.base.constellation_order = 16;
  p.base.detector = Detector::zf;
  p.base.channel_realizations = 20;
  p.base.noise_trials = 3000;
  p.base.seed = 7;
  p.bits = {0, 1, 3};
  const std::vector<double> xi{0, -10, -20, -30, -40};
  const SweepResult r = sweep_sir(p, xi);

  const double inf20 = find_row(r, -20, 0).rate.rate;
  const double one = find_row(r, -20, 1).rate.rate / inf20;
  const double three = find_row(r, -20, 3).rate.rate / inf20;
  o.check(std::abs(one - 0.43) <= 0.06, "one-bit at -20 dB " + pct(one) + " (target 43%)");
  o.check(std::abs(three - 0.89) <= 0.06, "three-bit at -20 dB " + pct(three) + " (target 89%)");

  double lo = 1e9, hi = -1e9;
  for (double v : xi) {
    const double rate = find_row(r, v, 0).rate.rate;
    lo = std::min(lo, rate);
    hi = std::max(hi, rate);
  }
  o.check(hi - lo < 0.1, "infinite-precision spread " + fmt(hi - lo, 3) + " bits");
  o.detail << "; at -40 dB one-bit " << pct(find_row(r, -40, 1).rate.rate / find_row(r, -40, 0).rate.rate)
           << ", three-bit " << pct(find_row(r, -40, 3).rate.rate / find_row(r, -40, 0).rate.rate);
}

// 8. Exact properties.
void property_suite(Outcome& o) {
  RngStream s(8);
  const auto pick = [&](int lo, int hi) { return lo + static_cast<int>(s.index(hi - lo + 1)); };

  double zf_err = 0;
  for (int t = 0; t < 100; ++t) {
    const int k = pick(1, 10), n = pick(k, 64);
    const ChannelEstimate e = perfect_estimate(random_matrix(s, n, k));
    const ComplexMatrix g = build_filter(e, Detector::zf).a.adjoint() * e.h;
    zf_err = std::max(zf_err, (g - ComplexMatrix::Identity(k, k)).cwiseAbs().maxCoeff());
  }
  o.check(zf_err < 1e-9, "zf orthogonality " + fmt(zf_err, 2));

  double ls_err = 0;
  for (int t = 0; t < 100; ++t) {
    const int k = pick(1, 10), n = pick(k, 64), p = k * pick(1, 5);
    ChannelBlock b;
    b.h = random_matrix(s, n, k);
    for (int u = 0; u < k; ++u) b.powers.push_back(db_to_linear(-20 + 40 * s.uniform()));
    const PilotSchedule sched = build_pilots(k, p, b.powers);
    ls_err = std::max(ls_err, (ls_estimate(b.h * sched.symbols(), sched).h - b.h).cwiseAbs().maxCoeff());
  }
  o.check(ls_err < 1e-10, "noiseless LS " + fmt(ls_err, 2));

  double energy_err = 0;
  for (int t = 0; t < 100; ++t) {
    const int k = pick(1, 12), tt = pick(k, 2000), p = k * pick(1, tt / k);
    std::vector<double> rho(k);
    for (auto& r : rho) r = db_to_linear(-30 + 60 * s.uniform());
    double spent = build_pilots(k, p, rho).energy(), budget = 0;
    for (double r : rho) {
      spent += (tt - p) * r;
      budget += tt * r;
    }
    energy_err = std::max(energy_err, std::abs(spent - budget) / budget);
  }
  o.check(energy_err < 1e-12, "energy audit relative error " + fmt(energy_err, 2));

  bool bounded = true;
  const int orders[] = {4, 16, 64};
  for (int t = 0; t < 20; ++t) {
    SimConfig c;
    c.users = pick(1, 3);
    c.antennas = pick(c.users, 16);
    c.coherence = pick(4 * c.users, 100);
    c.snr_db = -10 + 40 * s.uniform();
    c.constellation_order = orders[s.index(3)];
    c.bits = pick(0, 3);
    c.detector = s.index(2) ? Detector::zf : Detector::mrc;
    c.pilots_per_user = pick(1, 3);
    c.channel_realizations = 2;
    c.noise_trials = 64;
    c.seed = 100 + t;
    const RateEstimate r = estimate_rate(c);
    bounded = bounded && r.rate >= 0 &&
              r.rate <= (c.coherence - r.pilots_used) / double(c.coherence) * std::log2(c.constellation_order) + 1e-12;
  }
  o.check(bounded, "rate within the pre-log bound");

  bool refine = true;
  for (int t = 0; t < 20; ++t) {
    const int order = t % 2 ? 4 : 16;
    const Constellation c = Constellation::qam(order);
    const double sigma = 0.05 + s.uniform();
    std::vector<cplx> v;
    for (int m = 0; m < order; ++m)
      for (int i = 0; i < 300; ++i) v.push_back(c[m] + s.cgauss(sigma * sigma));
    double prev = 0;
    for (int bins : {4, 8, 16, 32, 64, 128}) {
      const double mi = mutual_info_grid(v, order, GridSpec{bins, 0.01});
      refine = refine && mi >= prev - 1e-12;
      prev = mi;
    }
  }
  o.check(refine, "grid refinement monotone");

  SimConfig c;
  c.antennas = 32;
  c.users = 4;
  c.coherence = 200;
  c.snr_db = 0;
  c.channel_realizations = 16;
  c.noise_trials = 200;
  c.pilot_candidates = {1, 2, 5};
  c.mixture_samples = 5000;
  c.zf_covariance_trials = 200;
  c.seed = 88;
  SimConfig c1 = c, c8 = c;
  c1.workers = 1;
  c8.workers = 8;
  const RateEstimate a = estimate_rate(c1), b = estimate_rate(c8);
  const RateEstimate x = approx_rate(c1), y = approx_rate(c8);
  o.check(a.rate == b.rate && a.ci_halfwidth == b.ci_halfwidth && a.pilots_used == b.pilots_used &&
              x.rate == y.rate && x.ci_halfwidth == y.ci_halfwidth,
          "1 vs 8 workers bit-identical");
}

// 9. Distance-spread study.
void distance_spread(Outcome& o) {
  SweepPlan p;
  p.base.antennas = 200;
  p.base.users = 10;
  p.base.pilots_per_user = 10;
  p.base.coherence = 1142;
  p.base.constellation_order = 16;
  p.base.detector = Detector::zf;
  p.base.channel_realizations = 20;
  p.base.noise_trials = 1000;
  p.base.seed = 9;
  p.bits = {1, 3};
  DistanceSpreadOptions opt;
  opt.spreads_m = {0.0, 150.0};
  opt.drops = 50;
  const SweepResult r = study_distance_spread(GeometryConfig{}, p, opt);
  const std::map<int, double> target{{1, 0.57}, {3, 0.79}};
  for (const auto& [b, t] : target) {
    const double base = find_row(r, 0.0, b).rate.rate;
    const double ratio = find_row(r, 150.0, b).rate.rate / base;
    o.check(std::abs(ratio - t) <= 0.08, std::to_string(b) + "-bit " + pct(ratio) + " of " +
                                             fmt(base) + " (target " + pct(t) + ")");
  }
}

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "quantizer oracle", 1, quantizer_oracle},
      {2, "MI estimator oracle", 30, mi_oracle},
      {3, "closed-form MRC moments", 60, appendix_consistency},
      {4, "high-SNR approximation accuracy", 600, approximation_accuracy},
      {5, "single-user rate curve shape", 900, rate_curve_shape},
      {6, "ADC resolution ratios", 3600, resolution_ratios},
      {7, "SIR study", 1800, sir_study},
      {8, "property suite", 120, property_suite},
      {9, "distance-spread study", 3600, distance_spread},
  };

  bool strict = false;
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--strict") {
      strict = true;
    } else {
      char* end = nullptr;
      const long id = std::strtol(a.c_str(), &end, 10);
      if (*end != '\0' || id < 1 || id > 9) {
        std::fprintf(stderr, "usage: %s [--strict] [criterion 1-9 ...]\n", argv[0]);
        return 2;
      }
      wanted.push_back(static_cast<int>(id));
    }
  }
  if (wanted.empty())
    for (const auto& c : all) wanted.push_back(c.id);

  int failed = 0, errors = 0;
  for (int id : wanted) {
    const Criterion& c = all[id - 1];
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      std::printf("criterion %d: FAIL %s: error: %s\n", c.id, c.title, e.what());
      std::fflush(stdout);
      ++errors;
      continue;
    }
    const double secs = seconds_since(t0);
    o.check(secs < c.budget_s, "runtime " + fmt(secs, 3) + " s (budget " + fmt(c.budget_s) + " s)");
    std::printf("criterion %d: %s %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.title,
                o.detail.str().c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  if (errors > 0) return 1;
  return strict && failed > 0 ? 1 : 0;
}
