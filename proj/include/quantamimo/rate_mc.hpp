#pragma once

#include <span>
#include <utility>
#include <vector>

#include "quantamimo/numerics.hpp"
#include "quantamimo/sim_config.hpp"

namespace qmimo {

/// Rectangular binning grid.  The bounding box is data-driven: min/max of the
/// samples on each rail, widened by `widen` of the range on both sides.
struct GridSpec {
  int bins_per_dim = 64;
  double widen = 0.01;
};

struct SoftSample {
  int symbol = 0;
  cplx value;
};

/// Plug-in mutual information (bits) between a uniform input symbol and the
/// binned soft estimate.  Every symbol must carry the same number of samples.
double mutual_info_grid(std::span<const SoftSample> samples, int order, const GridSpec& grid);

/// Same, with samples stored symbol-major: values[m * n + i] is the i-th
/// sample for symbol m.
double mutual_info_grid(std::span<const cplx> values, int order, const GridSpec& grid);

struct RateEstimate {
  double rate = 0.0;          ///< bits per channel use
  double ci_halfwidth = 0.0;  ///< 95% half-width across channel realizations
  int pilots_used = 0;        ///< P
  int channel_realizations = 0;
  int noise_trials = 0;
};

/// One receiver configuration evaluated on shared channel and noise draws.
struct ReceiverVariant {
  int bits = 1;
  Detector detector = Detector::zf;
  CsiMode csi = CsiMode::estimated;
};

/// rates[v][c] is variant v with pilot_slots[c] (perfect-CSI variants carry a
/// single entry with P = 0).
struct RateTable {
  std::vector<ReceiverVariant> variants;
  std::vector<int> pilot_slots;
  std::vector<std::vector<RateEstimate>> rates;

  /// Highest-rate entry of a variant; ties go to the smaller P.
  const RateEstimate& best(std::size_t variant) const;
};

/// Monte-Carlo rate of `user` for every (variant, pilot count) pair.  All
/// pairs see the same fading, pilot noise, interferer symbols and data noise,
/// drawn from substreams of `root` that depend only on the realization,
/// symbol and trial.  Results do not depend on the worker count.  A receiver
/// whose channel estimate has a singular Gram matrix scores zero in that
/// realization.
RateTable evaluate_rates(const SimConfig& config, std::span<const ReceiverVariant> variants,
                         std::span<const int> pilot_slots, int user, const RngStream& root);

/// Rate of `user` for the receiver in `config`; pilots fixed or optimized as
/// configured.
RateEstimate estimate_rate(const SimConfig& config, int user = 0);

/// Best pilot count among `candidates` (total slots P); ties go to the
/// smaller P.  All candidates share one set of random draws.
std::pair<int, RateEstimate> optimize_pilots(const SimConfig& config,
                                             std::span<const int> candidates, int user = 0);

/// Mean and 95% half-width of per-realization values.
std::pair<double, double> mean_and_halfwidth(std::span<const double> values);

}  // namespace qmimo
