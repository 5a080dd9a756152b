#include "quantamimo/numerics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/random/uniform_int_distribution.hpp>

namespace qmimo {

namespace {

std::uint64_t derive_seed(std::uint64_t master, const std::vector<std::uint64_t>& path) {
  std::uint64_t h = mix64(master ^ 0x6a09e667f3bcc908ULL);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x9e3779b97f4a7c15ULL));
  return h;
}

std::string condition_message(double condition) {
  std::ostringstream os;
  os << "singular Gram matrix (condition estimate " << condition << ")";
  return os.str();
}

}  // namespace

SingularGram::SingularGram(double condition)
    : std::runtime_error(condition_message(condition)), condition_(condition) {}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path)
    : master_seed_(master_seed),
      path_(std::move(path)),
      engine_(derive_seed(master_seed_, path_)) {}

RngStream RngStream::child(std::uint64_t index) const {
  auto p = path_;
  p.push_back(index);
  return RngStream(master_seed_, std::move(p));
}

double RngStream::uniform() {
  // 53 random mantissa bits.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t RngStream::index(std::size_t n) {
  require(n > 0, "RngStream::index: empty range");
  boost::random::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

cplx RngStream::cgauss(double variance) {
  const double s = std::sqrt(0.5 * variance);
  const double re = normal();
  const double im = normal();
  return {s * re, s * im};
}

double std_normal_cdf(double x) noexcept {
  if (std::isnan(x)) return x;
  return 0.5 * std::erfc(-x * M_SQRT1_2);
}

double std_normal_pdf(double x) noexcept {
  constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

ComplexVector sample_cgauss(RngStream& stream, std::size_t n, double variance) {
  require(variance >= 0.0, "sample_cgauss: negative variance");
  ComplexVector out(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = stream.cgauss(variance);
  return out;
}

namespace {

// Cholesky factor of M^H M after the condition-number guard.
Eigen::LLT<ComplexMatrix> checked_gram(const ComplexMatrix& m, double max_condition) {
  require(m.rows() >= m.cols() && m.cols() > 0, "pseudo-inverse: need rows >= cols >= 1");
  const ComplexMatrix gram = m.adjoint() * m;

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const double condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(condition <= max_condition)) throw SingularGram(condition);

  Eigen::LLT<ComplexMatrix> llt(gram);
  if (llt.info() != Eigen::Success) throw SingularGram(condition);
  return llt;
}

}  // namespace

ComplexMatrix left_pseudo_inverse(const ComplexMatrix& m, double max_condition) {
  const auto llt = checked_gram(m, max_condition);
  return m * llt.solve(ComplexMatrix::Identity(m.cols(), m.cols()));
}

ComplexVector left_pseudo_inverse_column(const ComplexMatrix& m, Eigen::Index k,
                                         double max_condition) {
  require(k >= 0 && k < m.cols(), "left_pseudo_inverse_column: column out of range");
  const auto llt = checked_gram(m, max_condition);
  ComplexVector e = ComplexVector::Zero(m.cols());
  e[k] = 1.0;
  return m * llt.solve(e);
}

double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) noexcept { return 10.0 * std::log10(linear); }

}  // namespace qmimo
