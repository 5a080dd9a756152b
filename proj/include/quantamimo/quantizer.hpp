#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "quantamimo/numerics.hpp"

namespace qmimo {

/// Scalar quantizer applied separately to the real and imaginary rail.
///
/// Cells are [tau_i, tau_{i+1}) with tau_0 = -inf and tau_{2^b} = +inf: a
/// sample sitting exactly on a threshold goes to the upper cell, so the
/// one-bit quantizer maps 0 to +1.  A spec with zero bits is the
/// infinite-precision pass-through.
class QuantizerSpec {
 public:
  static QuantizerSpec infinite_precision();
  static QuantizerSpec one_bit();
  /// Validating constructor: 2^b - 1 strictly increasing interior thresholds
  /// and 2^b labels, each label inside its own cell.
  static QuantizerSpec from_levels(std::vector<double> interior_thresholds,
                                   std::vector<double> labels);

  /// 0 for infinite precision.
  int bits() const noexcept { return bits_; }
  bool is_infinite_precision() const noexcept { return bits_ == 0; }
  int levels() const noexcept { return static_cast<int>(labels_.size()); }

  /// Interior thresholds tau_1 .. tau_{2^b - 1}.
  const std::vector<double>& interior_thresholds() const noexcept { return thresholds_; }
  /// All 2^b + 1 thresholds including the infinite end points.
  std::vector<double> thresholds() const;
  const std::vector<double>& labels() const noexcept { return labels_; }

  std::size_t cell_index(double x) const noexcept;
  double apply(double x) const noexcept;
  cplx apply(cplx y) const noexcept { return {apply(y.real()), apply(y.imag())}; }

  std::string describe() const;

 private:
  QuantizerSpec(int bits, std::vector<double> thresholds, std::vector<double> labels)
      : bits_(bits), thresholds_(std::move(thresholds)), labels_(std::move(labels)) {}

  int bits_ = 0;
  std::vector<double> thresholds_;
  std::vector<double> labels_;
};

/// Elementwise per-rail quantization.
ComplexVector quantize(const QuantizerSpec& spec, const ComplexVector& y);

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(int iterations, double last_movement);
  double last_movement() const noexcept { return last_movement_; }

 private:
  double last_movement_;
};

struct LloydMaxOptions {
  double tolerance = 1e-9;
  int max_iterations = 10'000;
};

struct LloydMaxDesign {
  QuantizerSpec spec;
  int iterations = 0;
  double last_movement = 0.0;
  /// Mean-squared distortion after each iteration.
  std::vector<double> distortion;
};

/// Lloyd-Max quantizer for a zero-mean Gaussian source of the given variance.
/// Labels start at the Gaussian quantiles (i + 0.5) / 2^b; iteration stops once
/// the largest label movement drops below the tolerance.
LloydMaxDesign design_lloyd_max(int bits, double variance, const LloydMaxOptions& options = {});

inline QuantizerSpec lloyd_max(int bits, double variance, double tolerance = 1e-9,
                               int max_iterations = 10'000) {
  return design_lloyd_max(bits, variance, {tolerance, max_iterations}).spec;
}

/// E[X | a < X <= c] for X ~ N(0, sigma^2); a or c may be infinite.
double gaussian_cell_centroid(double a, double c, double sigma);

/// Mean-squared error of `spec` for a N(0, variance) real input.
double gaussian_distortion(const QuantizerSpec& spec, double variance);

/// Quantizer used by the rate pipeline for a given resolution: pass-through
/// for 0 bits, sign quantizer for 1 bit, Lloyd-Max on N(0, variance) otherwise.
QuantizerSpec quantizer_for_bits(int bits, double variance);

struct DitheredSignal {
  ComplexVector samples;
  bool enabled = false;
};

/// y + d with d ~ CN(0, (snr - 1) I).  For snr < 1 the input is returned
/// unchanged and `enabled` is false.
DitheredSignal add_dither(RngStream& stream, const ComplexVector& y, double snr);

}  // namespace qmimo
