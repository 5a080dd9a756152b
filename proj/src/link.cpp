#include "quantamimo/link.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace qmimo {

std::string_view to_string(CsiMethod method) {
  switch (method) {
    case CsiMethod::ls:
      return "ls";
    case CsiMethod::sign:
      return "sign";
    case CsiMethod::perfect:
      return "perfect";
  }
  return "ls";
}

std::string_view to_string(Detector detector) {
  return detector == Detector::mrc ? "mrc" : "zf";
}

Detector detector_from_name(std::string_view name) {
  if (name == "mrc") return Detector::mrc;
  if (name == "zf") return Detector::zf;
  throw ContractViolation("unknown detector '" + std::string(name) + "' (expected mrc or zf)");
}

ComplexMatrix PilotSchedule::symbols() const {
  ComplexMatrix x = ComplexMatrix::Zero(users, slots);
  for (int t = 0; t < slots; ++t) x(active_user[t], t) = amplitude[t];
  return x;
}

double PilotSchedule::energy() const {
  double e = 0.0;
  for (double a : amplitude) e += a * a;
  return e;
}

PilotSchedule build_pilots(int users, int slots, const std::vector<double>& powers) {
  require(users >= 1, "build_pilots: need K >= 1");
  require(slots >= users && slots % users == 0,
          "build_pilots: P must be a positive multiple of K");
  require(static_cast<int>(powers.size()) == users, "build_pilots: one power per user");

  PilotSchedule s;
  s.users = users;
  s.slots = slots;
  s.active_user.resize(static_cast<std::size_t>(slots));
  s.amplitude.resize(static_cast<std::size_t>(slots));
  for (int t = 0; t < slots; ++t) {
    const int k = t % users;
    require(powers[k] >= 0.0, "build_pilots: negative power");
    s.active_user[t] = k;
    s.amplitude[t] = std::sqrt(users * powers[k]);
  }
  return s;
}

ComplexMatrix observe_pilots(RngStream& stream, const ChannelBlock& block,
                             const PilotSchedule& schedule, const QuantizerSpec& adc,
                             double dither_snr) {
  require(schedule.users == block.users(), "observe_pilots: user count mismatch");
  const Eigen::Index n = block.antennas();
  ComplexMatrix r(n, schedule.slots);
  for (int t = 0; t < schedule.slots; ++t) {
    ComplexVector y = block.h.col(schedule.active_user[t]) * schedule.amplitude[t];
    for (Eigen::Index i = 0; i < n; ++i) y[i] += stream.cgauss(1.0);
    if (dither_snr >= 1.0) y = add_dither(stream, y, dither_snr).samples;
    r.col(t) = quantize(adc, y);
  }
  return r;
}

ChannelEstimate ls_estimate(const ComplexMatrix& r_pilot, const PilotSchedule& schedule) {
  require(r_pilot.cols() == schedule.slots, "ls_estimate: pilot matrix width != P");
  ComplexMatrix h = ComplexMatrix::Zero(r_pilot.rows(), schedule.users);
  std::vector<double> energy(static_cast<std::size_t>(schedule.users), 0.0);
  for (int t = 0; t < schedule.slots; ++t) {
    const int k = schedule.active_user[t];
    h.col(k) += r_pilot.col(t) * schedule.amplitude[t];  // real pilot: conj is a no-op
    energy[k] += schedule.amplitude[t] * schedule.amplitude[t];
  }
  for (int k = 0; k < schedule.users; ++k) {
    if (!(energy[k] > 0.0)) throw SingularGram(std::numeric_limits<double>::infinity());
    h.col(k) /= energy[k];
  }
  return {std::move(h), CsiMethod::ls};
}

ChannelEstimate sign_estimate(const ComplexMatrix& h) {
  auto sgn = [](double v) { return v >= 0.0 ? 1.0 : -1.0; };
  ComplexMatrix s(h.rows(), h.cols());
  for (Eigen::Index j = 0; j < h.cols(); ++j)
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      s(i, j) = cplx(sgn(h(i, j).real()), sgn(h(i, j).imag()));
  return {std::move(s), CsiMethod::sign};
}

ChannelEstimate perfect_estimate(const ComplexMatrix& h) { return {h, CsiMethod::perfect}; }

ReceiveFilter build_filter(const ChannelEstimate& estimate, Detector detector) {
  const ComplexMatrix& h = estimate.h;
  if (detector == Detector::zf) return {left_pseudo_inverse(h), detector};

  ComplexMatrix a(h.rows(), h.cols());
  for (Eigen::Index k = 0; k < h.cols(); ++k) {
    const double norm2 = h.col(k).squaredNorm();
    if (!(norm2 > 0.0)) throw SingularGram(std::numeric_limits<double>::infinity());
    a.col(k) = h.col(k) / norm2;
  }
  return {std::move(a), detector};
}

cplx soft_estimate(const ReceiveFilter& filter, const ComplexVector& r, int k) {
  require(k >= 0 && k < filter.a.cols(), "soft_estimate: user index out of range");
  require(r.size() == filter.a.rows(), "soft_estimate: length mismatch");
  return filter.a.col(k).dot(r);  // Eigen's dot conjugates the left operand
}

}  // namespace qmimo
