#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "quantamimo/constellation.hpp"
#include "quantamimo/numerics.hpp"
#include "quantamimo/rate_mc.hpp"
#include "quantamimo/sim_config.hpp"

namespace qmimo {

/// Per-antenna Gaussian arguments for the four sign variables of a one-bit
/// receiver that knows the channel quadrants (h_hat = sgn Re h + j sgn Im h):
///
///   c_rr = sgn(h^R) r^R    c_ri = sgn(h^I) r^I
///   c_ii = sgn(h^R) r^I    c_ir = sgn(h^I) r^R
///
/// Interference from the other users is modelled as Gaussian, which is exact
/// for a single user.  P(c_rr = 1) = Phi(zeta_rr), P(c_ri = 1) = Phi(zeta_ri),
/// P(c_ii = 1) = Phi(zeta_ii) and P(c_ir = 1) = Phi(-zeta_ir).
struct QuadrantStats {
  std::vector<double> zeta_rr;
  std::vector<double> zeta_ri;
  std::vector<double> zeta_ii;
  std::vector<double> zeta_ir;

  std::size_t antennas() const noexcept { return zeta_rr.size(); }
  double p_rr(std::size_t n) const { return std_normal_cdf(zeta_rr[n]); }
  double p_ri(std::size_t n) const { return std_normal_cdf(zeta_ri[n]); }
  double p_ii(std::size_t n) const { return std_normal_cdf(zeta_ii[n]); }
  double p_ir(std::size_t n) const { return std_normal_cdf(-zeta_ir[n]); }
};

/// `x` is the unit-energy symbol of user k; the transmit amplitude
/// sqrt(powers[k]) is applied here.
QuadrantStats quadrant_stats(const ComplexMatrix& h, std::span<const double> powers, int k,
                             cplx x);

/// Conditional mean and covariance of [Re x_hat, Im x_hat].
struct MomentStats {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
};

/// Closed-form MRC moments with the filter h_hat_k / (2N).
MomentStats mrc_moments(const QuadrantStats& stats, int antennas);

/// ZF moments: closed-form mean, Monte-Carlo covariance over `mc_trials`
/// draws of noise and interferer symbols (uniform over `interferers`).  The
/// filter is the pseudo-inverse column of sgn Re h + j sgn Im h.
MomentStats zf_moments(const ComplexMatrix& h, int k, cplx x, std::span<const double> powers,
                       const Constellation& interferers, int mc_trials, RngStream& stream);

/// Same with the ZF filter column a_k supplied by the caller.
MomentStats zf_moments(const ComplexMatrix& h, const ComplexVector& filter, int k, cplx x,
                       std::span<const double> powers, const Constellation& interferers,
                       int mc_trials, RngStream& stream);

/// Closed-form ZF mean alone.
Eigen::Vector2d zf_mean(const ComplexMatrix& h, int k, const ComplexVector& filter,
                        const QuadrantStats& stats);

struct MixtureComponent {
  double weight = 1.0;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
};

struct EntropyEstimate {
  double bits = 0.0;
  double standard_error = 0.0;
};

/// Monte-Carlo differential entropy (bits) of a bivariate Gaussian mixture.
/// Samples are stratified by component in proportion to the weights.
EntropyEstimate mixture_entropy(std::span<const MixtureComponent> components, int samples,
                                RngStream& stream);

/// Monte-Carlo estimate of h(mixture) - sum_m w_m h(component m) in bits,
/// i.e. the information the component label carries about the sample.  Uses
/// the same stratified draws as mixture_entropy and the per-sample log ratio
/// log2 f_m(z) / f(z), which vanishes (up to rounding) for identical components.
EntropyEstimate mixture_information(std::span<const MixtureComponent> components, int samples,
                                    RngStream& stream);

/// 0.5 log2((2 pi e)^2 det cov).
double gaussian_entropy_bits(const Eigen::Matrix2d& cov);

inline constexpr double kCovarianceRegularization = 1e-12;

/// High-SNR one-bit rate approximation for `user`:
/// (T - K)/T * (h(x_hat | H_hat) - E[0.5 log2((2 pi e)^2 det Sigma)]), averaged
/// over channel realizations.  Requires bits == 1.  Fading draws coincide with
/// those of estimate_rate for the same seed.
RateEstimate approx_rate(const SimConfig& config, int user = 0);

/// approx_rate over an explicit alphabet (used for degenerate alphabets).
RateEstimate approx_rate(const SimConfig& config, const Constellation& constellation, int user);

/// approx_rate with a caller-provided root stream.
RateEstimate approx_rate(const SimConfig& config, const Constellation& constellation, int user,
                         const RngStream& root);

}  // namespace qmimo
