#include "quantamimo/constellation.hpp"

#include <cmath>
#include <limits>

namespace qmimo {

Constellation Constellation::qam(int order) {
  if (order != 4 && order != 16 && order != 64)
    throw UnsupportedConstellation("unsupported QAM order " + std::to_string(order) +
                                   " (expected 4, 16 or 64)");
  const int side = static_cast<int>(std::lround(std::sqrt(order)));
  // Levels +-1, +-3, ..., +-(side-1); E|x|^2 = 2 (side^2 - 1) / 3.
  const double scale = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);
  std::vector<cplx> pts;
  pts.reserve(static_cast<std::size_t>(order));
  for (int i = 0; i < side; ++i) {
    for (int q = 0; q < side; ++q) {
      const double re = 2.0 * i - (side - 1);
      const double im = 2.0 * q - (side - 1);
      pts.emplace_back(scale * re, scale * im);
    }
  }
  return Constellation(std::move(pts));
}

Constellation Constellation::from_name(std::string_view name) {
  return qam(constellation_order_from_name(name));
}

Constellation Constellation::from_points(std::vector<cplx> points) {
  require(!points.empty(), "Constellation::from_points: empty alphabet");
  return Constellation(std::move(points));
}

double Constellation::average_energy() const {
  double s = 0.0;
  for (const auto& p : points_) s += std::norm(p);
  return s / static_cast<double>(points_.size());
}

double Constellation::min_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i)
    for (std::size_t j = i + 1; j < points_.size(); ++j)
      best = std::min(best, std::abs(points_[i] - points_[j]));
  return best;
}

std::string Constellation::name() const { return constellation_name(order()); }

cplx scale_symbol(cplx point, double power) {
  require(power >= 0.0, "scale_symbol: negative power");
  return point * std::sqrt(power);
}

std::string constellation_name(int order) {
  switch (order) {
    case 4:
      return "qpsk";
    case 16:
      return "16qam";
    case 64:
      return "64qam";
    default:
      return std::to_string(order) + "-ary";
  }
}

int constellation_order_from_name(std::string_view name) {
  if (name == "qpsk" || name == "4qam") return 4;
  if (name == "16qam") return 16;
  if (name == "64qam") return 64;
  throw UnsupportedConstellation("unknown constellation '" + std::string(name) +
                                 "' (expected qpsk, 16qam or 64qam)");
}

}  // namespace qmimo
