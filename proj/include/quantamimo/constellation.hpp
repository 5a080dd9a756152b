#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "quantamimo/numerics.hpp"

namespace qmimo {

class UnsupportedConstellation : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

/// Square QAM alphabet with unit average symbol energy.
class Constellation {
 public:
  /// M in {4, 16, 64}.
  static Constellation qam(int order);
  /// "qpsk", "16qam" or "64qam".
  static Constellation from_name(std::string_view name);
  /// Arbitrary alphabet, used as-is (no normalization).
  static Constellation from_points(std::vector<cplx> points);

  int order() const noexcept { return static_cast<int>(points_.size()); }
  const std::vector<cplx>& points() const noexcept { return points_; }
  const cplx& operator[](std::size_t i) const { return points_[i]; }
  double average_energy() const;
  double min_distance() const;
  std::string name() const;

 private:
  explicit Constellation(std::vector<cplx> points) : points_(std::move(points)) {}
  std::vector<cplx> points_;
};

/// point * sqrt(power).
cplx scale_symbol(cplx point, double power);

/// Canonical name for a supported order (4 -> "qpsk").
std::string constellation_name(int order);
int constellation_order_from_name(std::string_view name);

}  // namespace qmimo
