#include "quantamimo/sim_config.hpp"

#include <algorithm>
#include <string>

#include "quantamimo/parallel.hpp"

namespace qmimo {

std::string_view to_string(CsiMode mode) {
  return mode == CsiMode::perfect ? "perfect" : "estimated";
}

std::string_view to_string(RateMethod method) {
  switch (method) {
    case RateMethod::mc:
      return "mc";
    case RateMethod::approx:
      return "approx";
    case RateMethod::both:
      return "both";
  }
  return "mc";
}

CsiMode csi_mode_from_name(std::string_view name) {
  if (name == "estimated") return CsiMode::estimated;
  if (name == "perfect") return CsiMode::perfect;
  throw ContractViolation("unknown csi mode '" + std::string(name) +
                          "' (expected estimated or perfect)");
}

RateMethod rate_method_from_name(std::string_view name) {
  if (name == "mc") return RateMethod::mc;
  if (name == "approx") return RateMethod::approx;
  if (name == "both") return RateMethod::both;
  throw ContractViolation("unknown rate method '" + std::string(name) +
                          "' (expected mc, approx or both)");
}

std::vector<int> default_pilot_candidates() {
  return {1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 25, 30, 40};
}

double SimConfig::snr_linear() const { return db_to_linear(snr_db); }

std::vector<double> SimConfig::user_powers() const {
  if (!powers.empty()) return powers;
  return std::vector<double>(static_cast<std::size_t>(std::max(users, 0)), snr_linear());
}

std::vector<int> SimConfig::candidate_slots() const {
  std::vector<int> out;
  if (!optimize_pilots()) {
    // P > T leaves no data slots; callers report a zero rate.
    if (pilot_slots() <= coherence) out.push_back(pilot_slots());
    return out;
  }
  for (int per_user : pilot_candidates) {
    const int p = per_user * users;
    if (per_user >= 1 && p <= coherence) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int SimConfig::resolved_workers() const { return workers > 0 ? workers : default_workers(); }

void SimConfig::validate() const {
  require(users >= 1, "users: must be >= 1");
  require(antennas >= users, "antennas: must be >= users");
  require(coherence >= 1, "coherence: must be >= 1");
  require(constellation_order == 4 || constellation_order == 16 || constellation_order == 64,
          "constellation: unsupported order " + std::to_string(constellation_order));
  require(bits >= 0 && bits <= 8, "bits: must lie in [0, 8]");
  require(pilots_per_user >= 0, "pilots_per_user: must be >= 0");
  if (optimize_pilots())
    for (int c : pilot_candidates) require(c >= 1, "pilot_candidates: entries must be >= 1");
  require(powers.empty() || static_cast<int>(powers.size()) == users,
          "powers: need one entry per user");
  for (double p : powers) require(p >= 0.0, "powers: must be non-negative");
  require(channel_realizations >= 1, "channel_realizations: must be >= 1");
  require(noise_trials >= 1, "noise_trials: must be >= 1");
  require(grid_bins >= 2, "grid_bins: must be >= 2");
  require(mixture_samples >= 1, "mixture_samples: must be >= 1");
  require(zf_covariance_trials >= 2, "zf_covariance_trials: must be >= 2");
  require(channel == ChannelModel::iid || users == 1,
          "channel_model: correlated and nonfading channels are single-user only");
}

ChannelBlock draw_channel(const SimConfig& config, RngStream& stream,
                          const std::vector<double>& powers) {
  if (config.channel == ChannelModel::iid)
    return draw_block(stream, config.antennas, config.users, powers, config.coherence);
  return draw_degenerate(stream, config.antennas, config.channel, powers[0], config.coherence);
}

}  // namespace qmimo
