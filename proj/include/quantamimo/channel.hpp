#pragma once

#include <string_view>
#include <vector>

#include "quantamimo/numerics.hpp"

namespace qmimo {

/// One coherence interval: small-scale fading plus per-user receive SNRs.
/// Large-scale gains live in `powers`, never in `h`.
struct ChannelBlock {
  ComplexMatrix h;            ///< N x K, unit-variance entries
  std::vector<double> powers; ///< linear per-user SNR rho_k
  int coherence = 1;          ///< T, channel uses

  Eigen::Index antennas() const noexcept { return h.rows(); }
  Eigen::Index users() const noexcept { return h.cols(); }
};

enum class ChannelModel { iid, correlated, nonfading };

std::string_view to_string(ChannelModel model);
ChannelModel channel_model_from_name(std::string_view name);

/// i.i.d. CN(0, 1) Rayleigh block.  Requires N >= K >= 1 and one
/// non-negative power per user.
ChannelBlock draw_block(RngStream& stream, int antennas, int users,
                        std::vector<double> powers, int coherence);

/// Single-user rank-one demonstration channels: `correlated` repeats one
/// CN(0, 1) draw on every antenna, `nonfading` is the all-ones vector.
ChannelBlock draw_degenerate(RngStream& stream, int antennas, ChannelModel kind,
                             double power = 1.0, int coherence = 1);

/// Cell geometry and link budget; defaults are the urban-macro table values.
struct GeometryConfig {
  double cell_radius_m = 335.0;
  double min_distance_m = 35.0;
  double pathloss_offset_db = 35.0;
  double pathloss_slope_db_per_decade = 35.0;
  double tx_power_dbm = 8.5;
  double bandwidth_hz = 20e6;
  double noise_psd_dbm_hz = -174.2;
  double noise_figure_db = 5.0;

  void validate() const;
  double noise_power_dbm() const;
};

/// Receive SNR in dB of a user `distance_m` away from the base station.
double snr_from_distance(const GeometryConfig& geom, double distance_m);

/// Distances of `count` interferers dropped uniformly (by area) on the ring
/// [d1 - spread, d1 + spread], clipped to [min_distance, cell_radius].
std::vector<double> drop_interferers(RngStream& stream, const GeometryConfig& geom,
                                     double d1, double spread, int count);

}  // namespace qmimo
