#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "quantamimo/channel.hpp"
#include "quantamimo/link.hpp"

namespace qmimo {

enum class CsiMode { estimated, perfect };
enum class RateMethod { mc, approx, both };

std::string_view to_string(CsiMode mode);
std::string_view to_string(RateMethod method);
CsiMode csi_mode_from_name(std::string_view name);
RateMethod rate_method_from_name(std::string_view name);

/// Pilot counts per user tried when pilots are optimized.
std::vector<int> default_pilot_candidates();

/// Scalar parameters of one rate evaluation.
struct SimConfig {
  int antennas = 200;    ///< N
  int users = 10;        ///< K
  int coherence = 1142;  ///< T
  double snr_db = -10.0;
  /// Linear per-user SNRs; when empty every user gets snr_db.
  std::vector<double> powers;
  int constellation_order = 16;
  int bits = 1;  ///< 0 = infinite precision
  bool dither = false;
  Detector detector = Detector::zf;
  CsiMode csi = CsiMode::estimated;
  ChannelModel channel = ChannelModel::iid;
  /// Fixed pilots per user; 0 optimizes over pilot_candidates.
  int pilots_per_user = 0;
  std::vector<int> pilot_candidates = default_pilot_candidates();
  int channel_realizations = 300;
  int noise_trials = 3000;
  int grid_bins = 64;
  int mixture_samples = 200'000;
  int zf_covariance_trials = 3000;
  std::uint64_t seed = 1;
  int workers = 0;  ///< 0 = default_workers()

  double snr_linear() const;
  std::vector<double> user_powers() const;
  /// Total pilot slots P for a fixed pilot count.
  int pilot_slots() const { return pilots_per_user * users; }
  bool optimize_pilots() const { return pilots_per_user == 0; }
  /// Candidate P values (multiples of K, at most T); empty when none fits.
  std::vector<int> candidate_slots() const;
  int resolved_workers() const;

  /// Throws ContractViolation naming the offending field.
  void validate() const;
};

/// Fading block for one realization under the configured channel model.
ChannelBlock draw_channel(const SimConfig& config, RngStream& stream,
                          const std::vector<double>& powers);

/// Substream tags below a realization's stream.
enum StreamTag : std::uint64_t {
  kFadingStream = 0,
  kPilotStream = 1,
  kDataStream = 2,
  kCovarianceStream = 3,
  kMixtureStream = 4,
};

}  // namespace qmimo
