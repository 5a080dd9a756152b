#include "quantamimo/rate_approx.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "quantamimo/link.hpp"
#include "quantamimo/parallel.hpp"

namespace qmimo {

namespace {

double sgn(double v) { return v >= 0.0 ? 1.0 : -1.0; }

// Cholesky factor, inverse and log2 density normalizer of a regularized
// 2x2 covariance.
struct Gauss2 {
  Eigen::Vector2d mean;
  double l11 = 1.0, l21 = 0.0, l22 = 1.0;
  double i11 = 1.0, i12 = 0.0, i22 = 1.0;
  double log_norm = 0.0;  // natural log of 1 / (2 pi sqrt(det))

  double log_pdf(double x, double y) const {
    const double dx = x - mean[0];
    const double dy = y - mean[1];
    return log_norm - 0.5 * (i11 * dx * dx + 2.0 * i12 * dx * dy + i22 * dy * dy);
  }
};

Gauss2 prepare(const MixtureComponent& c) {
  const double a = c.cov(0, 0) + kCovarianceRegularization;
  const double d = c.cov(1, 1) + kCovarianceRegularization;
  const double b = 0.5 * (c.cov(0, 1) + c.cov(1, 0));
  const double det = a * d - b * b;
  require(std::isfinite(det) && a > 0.0 && d > 0.0 && det > 0.0,
          "mixture: component covariance is not positive definite");
  Gauss2 g;
  g.mean = c.mean;
  g.l11 = std::sqrt(a);
  g.l21 = b / g.l11;
  g.l22 = std::sqrt(std::max(d - g.l21 * g.l21, 0.0));
  g.i11 = d / det;
  g.i12 = -b / det;
  g.i22 = a / det;
  g.log_norm = -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det);
  return g;
}

struct MixtureSampler {
  std::vector<Gauss2> parts;
  std::vector<double> log_weights;
  std::vector<double> weights;

  explicit MixtureSampler(std::span<const MixtureComponent> components) {
    require(!components.empty(), "mixture: no components");
    double total = 0.0;
    for (const auto& c : components) {
      require(c.weight >= 0.0, "mixture: negative weight");
      total += c.weight;
    }
    require(std::abs(total - 1.0) < 1e-9, "mixture: weights must sum to 1");
    for (const auto& c : components) {
      parts.push_back(prepare(c));
      weights.push_back(c.weight);
      log_weights.push_back(c.weight > 0.0 ? std::log(c.weight)
                                           : -std::numeric_limits<double>::infinity());
    }
  }

  // Natural log of the mixture density, via log-sum-exp.
  double log_pdf(double x, double y, std::vector<double>& scratch) const {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < parts.size(); ++m) {
      scratch[m] = log_weights[m] + parts[m].log_pdf(x, y);
      peak = std::max(peak, scratch[m]);
    }
    double acc = 0.0;
    for (std::size_t m = 0; m < parts.size(); ++m) acc += std::exp(scratch[m] - peak);
    return peak + std::log(acc);
  }

  // Stratified estimate of sum_m w_m E_m[g_m(z)].
  template <typename Fn>
  EntropyEstimate stratified(int samples, RngStream& stream, Fn&& value) const {
    require(samples >= 1, "mixture: need at least one sample");
    std::vector<double> scratch(parts.size());
    double mean = 0.0, var = 0.0;
    for (std::size_t m = 0; m < parts.size(); ++m) {
      if (weights[m] <= 0.0) continue;
      const int n = std::max(2, static_cast<int>(std::lround(samples * weights[m])));
      const Gauss2& g = parts[m];
      double s = 0.0, ss = 0.0;
      for (int i = 0; i < n; ++i) {
        const double e1 = stream.normal();
        const double e2 = stream.normal();
        const double x = g.mean[0] + g.l11 * e1;
        const double y = g.mean[1] + g.l21 * e1 + g.l22 * e2;
        const double v = value(m, x, y, scratch);
        s += v;
        ss += v * v;
      }
      const double mu = s / n;
      const double sample_var = std::max(0.0, (ss - n * mu * mu) / (n - 1));
      mean += weights[m] * mu;
      var += weights[m] * weights[m] * sample_var / n;
    }
    return {mean, std::sqrt(var)};
  }
};

}  // namespace

QuadrantStats quadrant_stats(const ComplexMatrix& h, std::span<const double> powers, int k,
                             cplx x) {
  require(k >= 0 && k < h.cols(), "quadrant_stats: user index out of range");
  require(static_cast<Eigen::Index>(powers.size()) == h.cols(),
          "quadrant_stats: need one power per user");
  require(std::isfinite(x.real()) && std::isfinite(x.imag()), "quadrant_stats: symbol not finite");
  const auto n_ant = static_cast<std::size_t>(h.rows());
  QuadrantStats out;
  out.zeta_rr.resize(n_ant);
  out.zeta_ri.resize(n_ant);
  out.zeta_ii.resize(n_ant);
  out.zeta_ir.resize(n_ant);
  for (std::size_t n = 0; n < n_ant; ++n) {
    const auto row = static_cast<Eigen::Index>(n);
    double interference = 1.0;
    for (Eigen::Index j = 0; j < h.cols(); ++j)
      if (j != k) interference += powers[j] * std::norm(h(row, j));
    const double s = std::sqrt(2.0 * powers[k] / interference);
    const double hr = h(row, k).real();
    const double hi = h(row, k).imag();
    out.zeta_rr[n] = s * (std::abs(hr) * x.real() - hi * x.imag() * sgn(hr));
    out.zeta_ri[n] = s * (std::abs(hi) * x.real() + hr * x.imag() * sgn(hi));
    out.zeta_ii[n] = s * (std::abs(hr) * x.imag() + hi * x.real() * sgn(hr));
    out.zeta_ir[n] = s * (std::abs(hi) * x.imag() - hr * x.real() * sgn(hi));
  }
  return out;
}

MomentStats mrc_moments(const QuadrantStats& stats, int antennas) {
  require(antennas >= 1 && static_cast<std::size_t>(antennas) == stats.antennas(),
          "mrc_moments: antenna count does not match the statistics");
  MomentStats out;
  double mr = 0.0, mi = 0.0, v11 = 0.0, v22 = 0.0, v12 = 0.0;
  for (std::size_t n = 0; n < stats.antennas(); ++n) {
    const double prr = stats.p_rr(n), pri = stats.p_ri(n);
    const double pii = stats.p_ii(n), pir = stats.p_ir(n);
    mr += prr + pri - 1.0;
    mi += pii - pir;
    v11 += prr * (1.0 - prr) + pri * (1.0 - pri);
    v22 += pii * (1.0 - pii) + pir * (1.0 - pir);
    v12 -= (prr + pri - 1.0) * (pii - pir);
  }
  const double inv = 1.0 / antennas;
  out.mean = {mr * inv, mi * inv};
  out.cov << v11 * inv * inv, v12 * inv * inv, v12 * inv * inv, v22 * inv * inv;
  return out;
}

Eigen::Vector2d zf_mean(const ComplexMatrix& h, int k, const ComplexVector& filter,
                        const QuadrantStats& stats) {
  require(k >= 0 && k < h.cols(), "zf_mean: user index out of range");
  require(filter.size() == h.rows() && stats.antennas() == static_cast<std::size_t>(h.rows()),
          "zf_mean: dimension mismatch");
  // alpha = a^R sgn(h^R), beta = a^I sgn(h^I).  The constant term is
  // -alpha + beta: x = 0 then gives a zero mean and K = 1 reduces to MRC.
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (std::size_t n = 0; n < stats.antennas(); ++n) {
    const auto row = static_cast<Eigen::Index>(n);
    const double alpha = filter[row].real() * sgn(h(row, k).real());
    const double beta = filter[row].imag() * sgn(h(row, k).imag());
    mean[0] += 2.0 * (alpha * stats.p_rr(n) - beta * std_normal_cdf(-stats.zeta_ri[n])) - alpha +
               beta;
    mean[1] += 2.0 * (alpha * stats.p_ii(n) - beta * stats.p_ir(n)) - alpha + beta;
  }
  return mean;
}

MomentStats zf_moments(const ComplexMatrix& h, int k, cplx x, std::span<const double> powers,
                       const Constellation& interferers, int mc_trials, RngStream& stream) {
  const ComplexVector filter = left_pseudo_inverse_column(sign_estimate(h).h, k);
  return zf_moments(h, filter, k, x, powers, interferers, mc_trials, stream);
}

MomentStats zf_moments(const ComplexMatrix& h, const ComplexVector& filter, int k, cplx x,
                       std::span<const double> powers, const Constellation& interferers,
                       int mc_trials, RngStream& stream) {
  require(mc_trials >= 2, "zf_moments: need at least two trials");
  const QuadrantStats stats = quadrant_stats(h, powers, k, x);
  MomentStats out;
  out.mean = zf_mean(h, k, filter, stats);

  const Eigen::Index n_ant = h.rows();
  const Eigen::Index users = h.cols();
  std::vector<double> amp(static_cast<std::size_t>(users));
  for (Eigen::Index j = 0; j < users; ++j) amp[j] = std::sqrt(powers[j]);
  const ComplexVector own = h.col(k) * (amp[k] * x);
  ComplexVector y(n_ant);
  Eigen::Vector2d s = Eigen::Vector2d::Zero();
  Eigen::Matrix2d ss = Eigen::Matrix2d::Zero();
  for (int t = 0; t < mc_trials; ++t) {
    y = own;
    for (Eigen::Index j = 0; j < users; ++j) {
      if (j == k) continue;
      const cplx sym = interferers[stream.index(static_cast<std::size_t>(interferers.order()))];
      y += h.col(j) * (amp[j] * sym);
    }
    cplx est = 0.0;
    for (Eigen::Index n = 0; n < n_ant; ++n) {
      const cplx v = y[n] + stream.cgauss(1.0);
      est += std::conj(filter[n]) * cplx(sgn(v.real()), sgn(v.imag()));
    }
    const Eigen::Vector2d z(est.real(), est.imag());
    s += z;
    ss += z * z.transpose();
  }
  const double n = mc_trials;
  const Eigen::Vector2d mu = s / n;
  out.cov = (ss - n * mu * mu.transpose()) / (n - 1.0);
  out.cov(0, 1) = out.cov(1, 0) = 0.5 * (out.cov(0, 1) + out.cov(1, 0));
  return out;
}

EntropyEstimate mixture_entropy(std::span<const MixtureComponent> components, int samples,
                                RngStream& stream) {
  const MixtureSampler mix(components);
  auto est = mix.stratified(samples, stream,
                            [&](std::size_t, double x, double y, std::vector<double>& scratch) {
                              return -mix.log_pdf(x, y, scratch);
                            });
  est.bits /= std::numbers::ln2;
  est.standard_error /= std::numbers::ln2;
  return est;
}

EntropyEstimate mixture_information(std::span<const MixtureComponent> components, int samples,
                                    RngStream& stream) {
  const MixtureSampler mix(components);
  auto est = mix.stratified(samples, stream,
                            [&](std::size_t m, double x, double y, std::vector<double>& scratch) {
                              return mix.parts[m].log_pdf(x, y) - mix.log_pdf(x, y, scratch);
                            });
  est.bits /= std::numbers::ln2;
  est.standard_error /= std::numbers::ln2;
  return est;
}

double gaussian_entropy_bits(const Eigen::Matrix2d& cov) {
  const double det = cov.determinant();
  require(det > 0.0, "gaussian_entropy_bits: covariance is not positive definite");
  const double two_pi_e = 2.0 * std::numbers::pi * std::numbers::e;
  return 0.5 * std::log2(two_pi_e * two_pi_e * det);
}

RateEstimate approx_rate(const SimConfig& config, int user) {
  return approx_rate(config, Constellation::qam(config.constellation_order), user,
                     RngStream(config.seed));
}

RateEstimate approx_rate(const SimConfig& config, const Constellation& constellation, int user) {
  return approx_rate(config, constellation, user, RngStream(config.seed));
}

RateEstimate approx_rate(const SimConfig& config, const Constellation& constellation, int user,
                         const RngStream& root) {
  config.validate();
  require(config.bits == 1, "bits: the rate approximation covers one-bit ADCs only");
  require(user >= 0 && user < config.users, "approx_rate: user index out of range");
  const int users = config.users;
  const int order = constellation.order();
  const std::vector<double> powers = config.user_powers();
  const Constellation interferers = Constellation::qam(config.constellation_order);
  const double fraction =
      std::max(0.0, static_cast<double>(config.coherence - users) / config.coherence);

  const auto realizations = static_cast<std::size_t>(config.channel_realizations);
  std::vector<double> rates(realizations, 0.0);
  parallel_for(realizations, config.resolved_workers(), [&](std::size_t r) {
    const RngStream realization = root.child(r);
    RngStream fading = realization.child(kFadingStream);
    const ChannelBlock block = draw_channel(config, fading, powers);
    const ComplexMatrix h_hat = sign_estimate(block.h).h;
    ComplexVector filter;
    if (config.detector == Detector::zf) {
      try {
        filter = left_pseudo_inverse_column(h_hat, user);
      } catch (const SingularGram&) {
        return;  // no usable ZF filter: zero rate, as in the Monte-Carlo estimate
      }
    }

    const RngStream cov_root = realization.child(kCovarianceStream);
    std::vector<MixtureComponent> components(static_cast<std::size_t>(order));
    for (int m = 0; m < order; ++m) {
      MomentStats moments;
      if (config.detector == Detector::mrc) {
        moments = mrc_moments(quadrant_stats(block.h, powers, user, constellation[m]),
                              config.antennas);
      } else {
        RngStream s = cov_root.child(static_cast<std::uint64_t>(m));
        moments = zf_moments(block.h, filter, user, constellation[m], powers, interferers,
                             config.zf_covariance_trials, s);
      }
      components[m] = {1.0 / order, moments.mean, moments.cov};
    }
    RngStream mixture = realization.child(kMixtureStream);
    const double info =
        mixture_information(components, config.mixture_samples, mixture).bits;
    rates[r] = fraction * info;
  });

  const auto [mean, half] = mean_and_halfwidth(rates);
  return {mean, half, users, config.channel_realizations, 0};
}

}  // namespace qmimo
