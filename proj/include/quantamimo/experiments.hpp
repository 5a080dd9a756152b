#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quantamimo/channel.hpp"
#include "quantamimo/rate_mc.hpp"
#include "quantamimo/sim_config.hpp"

namespace qmimo {

/// Receiver/alphabet combination evaluated at every sweep point.
struct SweepVariant {
  int bits = 1;
  Detector detector = Detector::zf;
  int constellation_order = 16;
  CsiMode csi = CsiMode::estimated;
};

/// Base configuration plus the combinations to evaluate.  Empty lists fall
/// back to the corresponding base value.
struct SweepPlan {
  SimConfig base;
  std::vector<int> bits;
  std::vector<Detector> detectors;
  std::vector<int> constellations;
  std::vector<CsiMode> csi;
  RateMethod rate_method = RateMethod::mc;

  std::vector<SweepVariant> variants() const;
};

struct SweepRow {
  std::string sweep_var;
  double sweep_value = 0.0;
  SweepVariant variant;
  /// Monte-Carlo estimate, or the approximation when rate_method = approx.
  RateEstimate rate;
  /// Present when rate_method = both.
  std::optional<RateEstimate> approx;
  std::uint64_t seed = 0;
};

struct SweepResult {
  std::string sweep_var;
  std::vector<double> values;
  std::vector<SweepRow> rows;
  std::uint64_t seed = 0;
  /// Wall time per sweep value, same order as `values`.
  std::vector<double> point_seconds;
};

/// Every point reuses the base seed, so evaluating a single value reproduces
/// its rows of a longer sweep exactly.
SweepResult sweep_snr(const SweepPlan& plan, std::span<const double> snrs_db);
SweepResult sweep_antennas(const SweepPlan& plan, std::span<const int> antennas);
/// Adds perfect-CSI reference rows for every estimated-CSI variant.
SweepResult sweep_coherence(const SweepPlan& plan, std::span<const int> coherence);
/// Rate of user 0 at rho_0 = base SNR while user 1 transmits at rho_0 / xi.
/// Any further users keep the base SNR.
SweepResult sweep_sir(const SweepPlan& plan, std::span<const double> sirs_db);

struct DistanceSpreadOptions {
  double d1_m = 185.0;
  std::vector<double> spreads_m{0.0, 150.0};
  int drops = 1000;
  double percentile = 0.1;
};

/// 10th-percentile rate of a user at distance d1 over random interferer
/// drops on the ring [d1 - spread, d1 + spread].  Rows carry the percentile
/// in `rate`; ci_halfwidth is zero.  Drop j uses the same uniform draws for
/// every spread.
SweepResult study_distance_spread(const GeometryConfig& geom, const SweepPlan& plan,
                                  const DistanceSpreadOptions& options);

/// Per-drop rates for every variant: out[variant][drop].
std::vector<std::vector<double>> distance_spread_drops(const GeometryConfig& geom,
                                                       const SweepPlan& plan, double d1_m,
                                                       double spread_m, int drops);

/// Nearest-rank percentile: the ceil(q n)-th smallest value (1-based), q in (0, 1].
double nearest_rank_percentile(std::vector<double> values, double q);

enum class ScatterScenario { iid, correlated, nonfading, nonfading_dither };

std::string_view to_string(ScatterScenario scenario);
ScatterScenario scatter_scenario_from_name(std::string_view name);

struct ScatterPoint {
  int symbol = 0;
  cplx input;
  cplx output;
};

/// Single-user MRC soft outputs with LS estimates from `pilots` slots.  Each
/// output uses its own channel draw; symbols cycle through the alphabet.
std::vector<ScatterPoint> scatter_demo(const SimConfig& config, ScatterScenario scenario,
                                       int symbols, int pilots = 20);

/// Fraction of outputs whose nearest class centroid belongs to their own
/// input symbol.
double nearest_centroid_accuracy(std::span<const ScatterPoint> points, int order);

}  // namespace qmimo
