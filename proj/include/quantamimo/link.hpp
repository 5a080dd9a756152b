#pragma once

#include <string_view>
#include <vector>

#include "quantamimo/channel.hpp"
#include "quantamimo/numerics.hpp"
#include "quantamimo/quantizer.hpp"

namespace qmimo {

/// Round-robin pilot plan: slot t belongs to user t mod K, which transmits the
/// constant real pilot sqrt(K rho_k) while every other user stays idle.
struct PilotSchedule {
  int users = 0;
  int slots = 0;
  std::vector<int> active_user;   ///< per slot
  std::vector<double> amplitude;  ///< per slot, of the active user

  int pilots_per_user() const noexcept { return users > 0 ? slots / users : 0; }
  /// K x P matrix of transmitted pilot symbols.
  ComplexMatrix symbols() const;
  /// sum_t |x_t|^2 over all slots.
  double energy() const;
};

PilotSchedule build_pilots(int users, int slots, const std::vector<double>& powers);

enum class CsiMethod { ls, sign, perfect };
enum class Detector { mrc, zf };

std::string_view to_string(CsiMethod method);
std::string_view to_string(Detector detector);
Detector detector_from_name(std::string_view name);

struct ChannelEstimate {
  ComplexMatrix h;  ///< N x K
  CsiMethod method = CsiMethod::ls;
};

/// Quantized pilot observations Q(h_{u(t)} x_t + w_t [+ d_t]) as an N x P
/// matrix.  Dither of variance dither_snr - 1 is added when dither_snr >= 1.
ComplexMatrix observe_pilots(RngStream& stream, const ChannelBlock& block,
                             const PilotSchedule& schedule, const QuantizerSpec& adc,
                             double dither_snr = 0.0);

/// Least-squares estimate from pilot observations.  With round-robin pilots
/// the Gram matrix is diagonal, so each column is a matched sum over that
/// user's slots.
ChannelEstimate ls_estimate(const ComplexMatrix& r_pilot, const PilotSchedule& schedule);

/// Entrywise quadrant of the true channel: sgn(Re) + j sgn(Im), sgn(0) = +1.
ChannelEstimate sign_estimate(const ComplexMatrix& h);

ChannelEstimate perfect_estimate(const ComplexMatrix& h);

/// Linear receive filters; column k is a_k.
struct ReceiveFilter {
  ComplexMatrix a;  ///< N x K
  Detector detector = Detector::mrc;
};

/// MRC: a_k = h_k / |h_k|^2.  ZF: columns of the left pseudo-inverse.
ReceiveFilter build_filter(const ChannelEstimate& estimate, Detector detector);

/// a_k^H r.
cplx soft_estimate(const ReceiveFilter& filter, const ComplexVector& r, int k);

}  // namespace qmimo
