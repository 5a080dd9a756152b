#include "quantamimo/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qmimo {

std::string_view to_string(ChannelModel model) {
  switch (model) {
    case ChannelModel::iid:
      return "iid";
    case ChannelModel::correlated:
      return "correlated";
    case ChannelModel::nonfading:
      return "nonfading";
  }
  return "iid";
}

ChannelModel channel_model_from_name(std::string_view name) {
  if (name == "iid") return ChannelModel::iid;
  if (name == "correlated") return ChannelModel::correlated;
  if (name == "nonfading") return ChannelModel::nonfading;
  throw ContractViolation("unknown channel model '" + std::string(name) + "'");
}

ChannelBlock draw_block(RngStream& stream, int antennas, int users,
                        std::vector<double> powers, int coherence) {
  require(users >= 1 && antennas >= users, "draw_block: need N >= K >= 1");
  require(static_cast<int>(powers.size()) == users, "draw_block: one power per user");
  for (double p : powers) require(p >= 0.0, "draw_block: negative power");

  ChannelBlock block;
  block.h.resize(antennas, users);
  // Column-major fill: user by user.
  for (int k = 0; k < users; ++k)
    for (int n = 0; n < antennas; ++n) block.h(n, k) = stream.cgauss(1.0);
  block.powers = std::move(powers);
  block.coherence = coherence;
  return block;
}

ChannelBlock draw_degenerate(RngStream& stream, int antennas, ChannelModel kind,
                             double power, int coherence) {
  require(antennas >= 1, "draw_degenerate: need N >= 1");
  ChannelBlock block;
  block.powers = {power};
  block.coherence = coherence;
  switch (kind) {
    case ChannelModel::iid:
      return draw_block(stream, antennas, 1, {power}, coherence);
    case ChannelModel::correlated:
      block.h = ComplexMatrix::Constant(antennas, 1, stream.cgauss(1.0));
      break;
    case ChannelModel::nonfading:
      block.h = ComplexMatrix::Ones(antennas, 1);
      break;
  }
  return block;
}

void GeometryConfig::validate() const {
  require(min_distance_m > 0.0, "min_distance_m must be positive");
  require(min_distance_m < cell_radius_m, "min_distance_m must be below cell_radius_m");
  require(bandwidth_hz > 0.0, "bandwidth_hz must be positive");
}

double GeometryConfig::noise_power_dbm() const {
  return noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

double snr_from_distance(const GeometryConfig& geom, double distance_m) {
  require(distance_m >= geom.min_distance_m,
          "snr_from_distance: distance below the minimum UE distance");
  const double pathloss =
      geom.pathloss_offset_db + geom.pathloss_slope_db_per_decade * std::log10(distance_m);
  return geom.tx_power_dbm - pathloss - geom.noise_power_dbm();
}

std::vector<double> drop_interferers(RngStream& stream, const GeometryConfig& geom,
                                     double d1, double spread, int count) {
  require(spread >= 0.0, "drop_interferers: spread must be non-negative");
  require(count >= 0, "drop_interferers: negative count");
  if (spread == 0.0) return std::vector<double>(static_cast<std::size_t>(count), d1);

  const double inner = std::max(d1 - spread, geom.min_distance_m);
  const double outer = std::min(d1 + spread, geom.cell_radius_m);
  require(outer > inner, "drop_interferers: annulus is empty after clipping");

  // Area-uniform: r^2 uniform on [inner^2, outer^2].
  const double a2 = inner * inner;
  const double b2 = outer * outer;
  std::vector<double> out(static_cast<std::size_t>(count));
  for (auto& d : out) d = std::sqrt(a2 + stream.uniform() * (b2 - a2));
  return out;
}

}  // namespace qmimo
