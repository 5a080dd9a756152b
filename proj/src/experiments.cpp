#include "quantamimo/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "quantamimo/constellation.hpp"
#include "quantamimo/link.hpp"
#include "quantamimo/parallel.hpp"
#include "quantamimo/quantizer.hpp"
#include "quantamimo/rate_approx.hpp"

namespace qmimo {

namespace {

constexpr std::uint64_t kDropTag = 7;
constexpr std::uint64_t kScatterTag = 8;

template <typename T>
std::vector<T> or_default(const std::vector<T>& values, T fallback) {
  return values.empty() ? std::vector<T>{fallback} : values;
}

void check_plan(const SweepPlan& plan) {
  for (int b : plan.bits) require(b >= 0 && b <= 8, "bits: must lie in [0, 8]");
  for (int m : plan.constellations)
    require(m == 4 || m == 16 || m == 64, "constellation: unsupported order " + std::to_string(m));
  if (plan.rate_method == RateMethod::approx)
    for (const auto& v : plan.variants())
      require(v.bits == 1 && v.csi == CsiMode::estimated,
              "rate_method: approx covers one-bit ADCs with estimated CSI only");
}

RateEstimate zero_rate(const SimConfig& cfg) {
  return {0.0, 0.0, 0, cfg.channel_realizations, cfg.noise_trials};
}

// Monte-Carlo rates of every variant at one configuration.  Variants sharing
// an alphabet are evaluated together on common draws.
std::vector<RateEstimate> evaluate_mc(const SimConfig& cfg, std::span<const SweepVariant> variants,
                                      const RngStream& root) {
  std::vector<RateEstimate> out(variants.size(), zero_rate(cfg));
  std::map<int, std::vector<std::size_t>> by_order;
  for (std::size_t i = 0; i < variants.size(); ++i)
    by_order[variants[i].constellation_order].push_back(i);

  for (const auto& [order, members] : by_order) {
    SimConfig c = cfg;
    c.constellation_order = order;
    const std::vector<int> slots = c.candidate_slots();
    std::vector<ReceiverVariant> receivers;
    std::vector<std::size_t> index;
    for (std::size_t i : members) {
      const auto& v = variants[i];
      if (v.csi == CsiMode::estimated && slots.empty()) continue;  // T < K: rate 0
      receivers.push_back({v.bits, v.detector, v.csi});
      index.push_back(i);
    }
    if (receivers.empty()) continue;
    const RateTable table = evaluate_rates(c, receivers, slots, 0, root);
    for (std::size_t r = 0; r < receivers.size(); ++r) out[index[r]] = table.best(r);
  }
  return out;
}

RateEstimate evaluate_approx(const SimConfig& cfg, const SweepVariant& v) {
  SimConfig c = cfg;
  c.bits = 1;
  c.detector = v.detector;
  c.constellation_order = v.constellation_order;
  c.csi = CsiMode::estimated;
  if (c.coherence <= c.users) return {0.0, 0.0, c.users, c.channel_realizations, 0};
  return approx_rate(c, 0);
}

bool approx_applies(const SweepVariant& v) { return v.bits == 1 && v.csi == CsiMode::estimated; }

template <typename Apply>
SweepResult run_sweep(const SweepPlan& plan, std::string var, std::span<const double> values,
                      std::span<const SweepVariant> variants, Apply&& apply) {
  check_plan(plan);
  SweepResult result;
  result.sweep_var = std::move(var);
  result.values.assign(values.begin(), values.end());
  result.seed = plan.base.seed;
  const RngStream root(plan.base.seed);

  for (double value : values) {
    const auto start = std::chrono::steady_clock::now();
    SimConfig cfg = plan.base;
    apply(cfg, value);
    cfg.validate();

    std::vector<RateEstimate> mc;
    if (plan.rate_method != RateMethod::approx) mc = evaluate_mc(cfg, variants, root);
    for (std::size_t i = 0; i < variants.size(); ++i) {
      SweepRow row;
      row.sweep_var = result.sweep_var;
      row.sweep_value = value;
      row.variant = variants[i];
      row.seed = cfg.seed;
      if (plan.rate_method == RateMethod::approx) {
        row.rate = evaluate_approx(cfg, variants[i]);
      } else {
        row.rate = mc[i];
        if (plan.rate_method == RateMethod::both && approx_applies(variants[i]))
          row.approx = evaluate_approx(cfg, variants[i]);
      }
      result.rows.push_back(row);
    }
    result.point_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return result;
}

}  // namespace

std::vector<SweepVariant> SweepPlan::variants() const {
  std::vector<SweepVariant> out;
  for (int m : or_default(constellations, base.constellation_order))
    for (Detector d : or_default(detectors, base.detector))
      for (int b : or_default(bits, base.bits))
        for (CsiMode c : or_default(csi, base.csi)) out.push_back({b, d, m, c});
  return out;
}

SweepResult sweep_snr(const SweepPlan& plan, std::span<const double> snrs_db) {
  const auto variants = plan.variants();
  return run_sweep(plan, "snr_db", snrs_db, variants, [](SimConfig& c, double v) {
    c.snr_db = v;
    c.powers.clear();
  });
}

SweepResult sweep_antennas(const SweepPlan& plan, std::span<const int> antennas) {
  const std::vector<double> values(antennas.begin(), antennas.end());
  const auto variants = plan.variants();
  return run_sweep(plan, "antennas", values, variants,
                   [](SimConfig& c, double v) { c.antennas = static_cast<int>(v); });
}

SweepResult sweep_coherence(const SweepPlan& plan, std::span<const int> coherence) {
  const std::vector<double> values(coherence.begin(), coherence.end());
  std::vector<SweepVariant> variants = plan.variants();
  const std::size_t n = variants.size();
  for (std::size_t i = 0; i < n; ++i) {
    SweepVariant ref = variants[i];
    ref.csi = CsiMode::perfect;
    const bool present = std::any_of(variants.begin(), variants.end(), [&](const SweepVariant& v) {
      return v.bits == ref.bits && v.detector == ref.detector &&
             v.constellation_order == ref.constellation_order && v.csi == ref.csi;
    });
    if (!present) variants.push_back(ref);
  }
  SweepPlan p = plan;
  if (p.rate_method == RateMethod::approx) p.rate_method = RateMethod::both;
  return run_sweep(p, "coherence", values, variants,
                   [](SimConfig& c, double v) { c.coherence = static_cast<int>(v); });
}

SweepResult sweep_sir(const SweepPlan& plan, std::span<const double> sirs_db) {
  require(plan.base.users >= 2, "users: the SIR study needs at least two users");
  const auto variants = plan.variants();
  return run_sweep(plan, "sir_db", sirs_db, variants, [](SimConfig& c, double xi_db) {
    const double rho1 = c.snr_linear();
    c.powers.assign(static_cast<std::size_t>(c.users), rho1);
    c.powers[1] = rho1 / db_to_linear(xi_db);
  });
}

double nearest_rank_percentile(std::vector<double> values, double q) {
  require(!values.empty(), "nearest_rank_percentile: empty list");
  require(q > 0.0 && q <= 1.0, "nearest_rank_percentile: q must lie in (0, 1]");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  // Guard against q * n landing a hair above an integer.
  const auto rank = static_cast<std::size_t>(std::max(1.0, std::ceil(q * n - 1e-9)));
  return values[std::min(rank, values.size()) - 1];
}

std::vector<std::vector<double>> distance_spread_drops(const GeometryConfig& geom,
                                                       const SweepPlan& plan, double d1_m,
                                                       double spread_m, int drops) {
  geom.validate();
  require(drops >= 1, "drops: must be >= 1");
  check_plan(plan);
  require(plan.rate_method != RateMethod::approx, "rate_method: the drop study uses mc");
  const auto variants = plan.variants();
  SimConfig base = plan.base;
  base.validate();
  const double rho1 = db_to_linear(snr_from_distance(geom, d1_m));

  std::vector<std::vector<double>> rates(variants.size(),
                                         std::vector<double>(static_cast<std::size_t>(drops)));
  parallel_for(static_cast<std::size_t>(drops), base.resolved_workers(), [&](std::size_t d) {
    const RngStream drop(base.seed, {kDropTag, d});
    RngStream placement = drop.child(0);
    const auto distances = drop_interferers(placement, geom, d1_m, spread_m, base.users - 1);
    SimConfig cfg = base;
    cfg.workers = 1;
    cfg.powers.assign(1, rho1);
    for (double dist : distances) cfg.powers.push_back(db_to_linear(snr_from_distance(geom, dist)));
    const auto est = evaluate_mc(cfg, variants, drop.child(1));
    for (std::size_t v = 0; v < variants.size(); ++v) rates[v][d] = est[v].rate;
  });
  return rates;
}

SweepResult study_distance_spread(const GeometryConfig& geom, const SweepPlan& plan,
                                  const DistanceSpreadOptions& options) {
  const auto variants = plan.variants();
  SweepResult result;
  result.sweep_var = "spread_m";
  result.values = options.spreads_m;
  result.seed = plan.base.seed;
  for (double spread : options.spreads_m) {
    const auto start = std::chrono::steady_clock::now();
    const auto per_drop = distance_spread_drops(geom, plan, options.d1_m, spread, options.drops);
    for (std::size_t v = 0; v < variants.size(); ++v) {
      SweepRow row;
      row.sweep_var = result.sweep_var;
      row.sweep_value = spread;
      row.variant = variants[v];
      row.seed = plan.base.seed;
      row.rate.rate = nearest_rank_percentile(per_drop[v], options.percentile);
      row.rate.pilots_used = variants[v].csi == CsiMode::perfect ? 0 : plan.base.pilot_slots();
      row.rate.channel_realizations = plan.base.channel_realizations;
      row.rate.noise_trials = plan.base.noise_trials;
      result.rows.push_back(row);
    }
    result.point_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return result;
}

std::string_view to_string(ScatterScenario scenario) {
  switch (scenario) {
    case ScatterScenario::iid:
      return "iid";
    case ScatterScenario::correlated:
      return "correlated";
    case ScatterScenario::nonfading:
      return "nonfading";
    case ScatterScenario::nonfading_dither:
      return "nonfading_dither";
  }
  return "iid";
}

ScatterScenario scatter_scenario_from_name(std::string_view name) {
  if (name == "iid") return ScatterScenario::iid;
  if (name == "correlated") return ScatterScenario::correlated;
  if (name == "nonfading") return ScatterScenario::nonfading;
  if (name == "nonfading_dither") return ScatterScenario::nonfading_dither;
  throw ContractViolation("unknown scatter scenario '" + std::string(name) + "'");
}

std::vector<ScatterPoint> scatter_demo(const SimConfig& config, ScatterScenario scenario,
                                       int symbols, int pilots) {
  require(symbols >= 0, "scatter: symbol count must be non-negative");
  require(pilots >= 1, "scatter: need at least one pilot");
  SimConfig cfg = config;
  cfg.users = 1;
  cfg.powers.clear();
  cfg.channel = scenario == ScatterScenario::iid          ? ChannelModel::iid
                : scenario == ScatterScenario::correlated ? ChannelModel::correlated
                                                          : ChannelModel::nonfading;
  cfg.dither = scenario == ScatterScenario::nonfading_dither;
  require(cfg.antennas >= 1, "antennas: must be >= 1");

  const std::vector<double> powers = cfg.user_powers();
  const Constellation alphabet = Constellation::qam(cfg.constellation_order);
  const QuantizerSpec adc = quantizer_for_bits(cfg.bits, 0.5 * (powers[0] + 1.0));
  const PilotSchedule schedule = build_pilots(1, pilots, powers);
  const double dither_snr = cfg.dither ? cfg.snr_linear() : 0.0;
  const double amp = std::sqrt(powers[0]);

  std::vector<ScatterPoint> out(static_cast<std::size_t>(symbols));
  parallel_for(out.size(), cfg.resolved_workers(), [&](std::size_t i) {
    const RngStream root(cfg.seed, {kScatterTag, i});
    RngStream fading = root.child(kFadingStream);
    const ChannelBlock block = draw_channel(cfg, fading, powers);
    RngStream pilot_stream = root.child(kPilotStream);
    const ComplexMatrix r_pilot = observe_pilots(pilot_stream, block, schedule, adc, dither_snr);
    const ChannelEstimate est = ls_estimate(r_pilot, schedule);

    const int m = static_cast<int>(i % static_cast<std::size_t>(alphabet.order()));
    RngStream data = root.child(kDataStream);
    ComplexVector y = block.h.col(0) * (amp * alphabet[m]);
    for (Eigen::Index n = 0; n < y.size(); ++n) y[n] += data.cgauss(1.0);
    if (dither_snr >= 1.0) y = add_dither(data, y, dither_snr).samples;
    const ComplexVector r = quantize(adc, y);

    cplx value = 0.0;
    if (est.h.col(0).squaredNorm() > 0.0)
      value = soft_estimate(build_filter(est, Detector::mrc), r, 0);
    out[i] = {m, alphabet[m], value};
  });
  return out;
}

double nearest_centroid_accuracy(std::span<const ScatterPoint> points, int order) {
  require(order >= 1, "nearest_centroid_accuracy: order must be >= 1");
  if (points.empty()) return 0.0;
  std::vector<cplx> centroid(static_cast<std::size_t>(order), 0.0);
  std::vector<int> count(static_cast<std::size_t>(order), 0);
  for (const auto& p : points) {
    require(p.symbol >= 0 && p.symbol < order, "nearest_centroid_accuracy: symbol out of range");
    centroid[p.symbol] += p.output;
    ++count[p.symbol];
  }
  for (int m = 0; m < order; ++m)
    if (count[m] > 0) centroid[m] /= static_cast<double>(count[m]);

  std::size_t correct = 0;
  for (const auto& p : points) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int m = 0; m < order; ++m) {
      if (count[m] == 0) continue;
      const double d = std::norm(p.output - centroid[m]);
      if (d < best_d) {
        best_d = d;
        best = m;
      }
    }
    if (best == p.symbol) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(points.size());
}

}  // namespace qmimo
