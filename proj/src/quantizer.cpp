#include "quantamimo/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

namespace qmimo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Phi(hi) - Phi(lo) evaluated on the tail that keeps precision.
double normal_mass(double lo, double hi) {
  if (lo >= 0.0) return std_normal_cdf(-lo) - std_normal_cdf(-hi);
  return std_normal_cdf(hi) - std_normal_cdf(lo);
}

// u * phi(u), zero at +-inf.
double u_phi(double u) { return std::isinf(u) ? 0.0 : u * std_normal_pdf(u); }

double phi_or_zero(double u) { return std::isinf(u) ? 0.0 : std_normal_pdf(u); }

}  // namespace

QuantizerSpec QuantizerSpec::infinite_precision() { return QuantizerSpec(0, {}, {}); }

QuantizerSpec QuantizerSpec::one_bit() { return QuantizerSpec(1, {0.0}, {-1.0, 1.0}); }

QuantizerSpec QuantizerSpec::from_levels(std::vector<double> interior_thresholds,
                                         std::vector<double> labels) {
  const std::size_t levels = labels.size();
  require(levels >= 2 && (levels & (levels - 1)) == 0,
          "QuantizerSpec: number of labels must be a power of two >= 2");
  require(interior_thresholds.size() + 1 == levels,
          "QuantizerSpec: need exactly 2^b - 1 interior thresholds");
  for (std::size_t i = 0; i < interior_thresholds.size(); ++i) {
    require(std::isfinite(interior_thresholds[i]), "QuantizerSpec: thresholds must be finite");
    if (i > 0)
      require(interior_thresholds[i] > interior_thresholds[i - 1],
              "QuantizerSpec: thresholds must be strictly increasing");
  }
  for (std::size_t i = 0; i < levels; ++i) {
    const double lo = i == 0 ? -kInf : interior_thresholds[i - 1];
    const double hi = i + 1 == levels ? kInf : interior_thresholds[i];
    require(labels[i] >= lo && labels[i] <= hi,
            "QuantizerSpec: label " + std::to_string(i) + " lies outside its cell");
  }
  int bits = 0;
  while ((std::size_t{1} << bits) < levels) ++bits;
  return QuantizerSpec(bits, std::move(interior_thresholds), std::move(labels));
}

std::vector<double> QuantizerSpec::thresholds() const {
  std::vector<double> out;
  out.reserve(thresholds_.size() + 2);
  out.push_back(-kInf);
  out.insert(out.end(), thresholds_.begin(), thresholds_.end());
  out.push_back(kInf);
  return out;
}

std::size_t QuantizerSpec::cell_index(double x) const noexcept {
  return static_cast<std::size_t>(
      std::upper_bound(thresholds_.begin(), thresholds_.end(), x) - thresholds_.begin());
}

double QuantizerSpec::apply(double x) const noexcept {
  if (bits_ == 0) return x;
  if (bits_ == 1 && thresholds_[0] == 0.0) return x >= 0.0 ? labels_[1] : labels_[0];
  return labels_[cell_index(x)];
}

std::string QuantizerSpec::describe() const {
  if (bits_ == 0) return "infinite-precision";
  std::ostringstream os;
  os << bits_ << "-bit";
  return os.str();
}

ComplexVector quantize(const QuantizerSpec& spec, const ComplexVector& y) {
  if (spec.is_infinite_precision()) return y;
  ComplexVector out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) out[i] = spec.apply(y[i]);
  return out;
}

NonConvergence::NonConvergence(int iterations, double last_movement)
    : std::runtime_error("Lloyd-Max did not converge within " + std::to_string(iterations) +
                         " iterations (last movement " + std::to_string(last_movement) + ")"),
      last_movement_(last_movement) {}

double gaussian_cell_centroid(double a, double c, double sigma) {
  const double lo = a / sigma;
  const double hi = c / sigma;
  const double mass = normal_mass(lo, hi);
  if (mass <= 0.0) return std::isinf(a) ? c : (std::isinf(c) ? a : 0.5 * (a + c));
  return sigma * (phi_or_zero(lo) - phi_or_zero(hi)) / mass;
}

double gaussian_distortion(const QuantizerSpec& spec, double variance) {
  require(variance > 0.0, "gaussian_distortion: variance must be positive");
  if (spec.is_infinite_precision()) return 0.0;
  const double sigma = std::sqrt(variance);
  const auto tau = spec.thresholds();
  double total = 0.0;
  for (int i = 0; i < spec.levels(); ++i) {
    const double lo = tau[i] / sigma;
    const double hi = tau[i + 1] / sigma;
    const double mass = normal_mass(lo, hi);
    const double first = sigma * (phi_or_zero(lo) - phi_or_zero(hi));
    const double second = variance * (mass + u_phi(lo) - u_phi(hi));
    const double q = spec.labels()[i];
    total += second - 2.0 * q * first + q * q * mass;
  }
  return total;
}

LloydMaxDesign design_lloyd_max(int bits, double variance, const LloydMaxOptions& options) {
  require(bits >= 1 && bits <= 8, "lloyd_max: bits must lie in [1, 8]");
  require(variance > 0.0, "lloyd_max: variance must be positive");
  require(options.tolerance > 0.0, "lloyd_max: tolerance must be positive");

  const int levels = 1 << bits;
  const double sigma = std::sqrt(variance);
  const boost::math::normal_distribution<double> gauss(0.0, sigma);

  std::vector<double> labels(static_cast<std::size_t>(levels));
  for (int i = 0; i < levels; ++i)
    labels[i] = boost::math::quantile(gauss, (i + 0.5) / levels);
  std::vector<double> thresholds(static_cast<std::size_t>(levels - 1));

  LloydMaxDesign design{QuantizerSpec::infinite_precision(), 0, kInf, {}};
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    for (int i = 0; i + 1 < levels; ++i) thresholds[i] = 0.5 * (labels[i] + labels[i + 1]);
    double movement = 0.0;
    for (int i = 0; i < levels; ++i) {
      const double lo = i == 0 ? -kInf : thresholds[i - 1];
      const double hi = i + 1 == levels ? kInf : thresholds[i];
      const double centroid = gaussian_cell_centroid(lo, hi, sigma);
      movement = std::max(movement, std::abs(centroid - labels[i]));
      labels[i] = centroid;
    }
    design.iterations = iter;
    design.last_movement = movement;

    std::vector<double> tau(thresholds);
    for (int i = 0; i + 1 < levels; ++i) tau[i] = 0.5 * (labels[i] + labels[i + 1]);
    const auto spec = QuantizerSpec::from_levels(tau, labels);
    design.distortion.push_back(gaussian_distortion(spec, variance));
    if (movement < options.tolerance) {
      design.spec = spec;
      return design;
    }
  }
  throw NonConvergence(design.iterations, design.last_movement);
}

QuantizerSpec quantizer_for_bits(int bits, double variance) {
  require(bits >= 0, "quantizer bits must be >= 0");
  if (bits == 0) return QuantizerSpec::infinite_precision();
  if (bits == 1) return QuantizerSpec::one_bit();
  return lloyd_max(bits, variance);
}

DitheredSignal add_dither(RngStream& stream, const ComplexVector& y, double snr) {
  if (!(snr >= 1.0)) return {y, false};
  const double variance = snr - 1.0;
  ComplexVector out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) out[i] = y[i] + stream.cgauss(variance);
  return {std::move(out), true};
}

}  // namespace qmimo
