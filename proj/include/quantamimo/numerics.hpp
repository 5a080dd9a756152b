#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

namespace qmimo {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Raised when a caller breaks an operation's precondition.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Gram matrix M^H M is singular or too badly conditioned to invert.
class SingularGram : public std::runtime_error {
 public:
  explicit SingularGram(double condition);
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// Throws ContractViolation with `what` unless `ok`.
inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

/// Deterministic random stream addressed by (master seed, path).
///
/// The engine state is seeded from a hash of the full path, so a stream can be
/// re-created anywhere (any thread, any order) and yields the same sequence.
/// Children extend the path by one component.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path = {});
  RngStream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path)
      : RngStream(master_seed, std::vector<std::uint64_t>(path)) {}

  RngStream child(std::uint64_t index) const;

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  const std::vector<std::uint64_t>& path() const noexcept { return path_; }

  double normal() { return normal_(engine_); }
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  /// One CN(0, variance) sample.
  cplx cgauss(double variance);

 private:
  std::uint64_t master_seed_;
  std::vector<std::uint64_t> path_;
  boost::random::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
};

/// SplitMix64 finalizer; used to derive stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

double std_normal_cdf(double x) noexcept;
double std_normal_pdf(double x) noexcept;

/// i.i.d. circularly-symmetric complex Gaussian entries of the given variance.
ComplexVector sample_cgauss(RngStream& stream, std::size_t n, double variance);

inline constexpr double kMaxGramCondition = 1e12;

/// Column k of M (M^H M)^{-1}.  Throws SingularGram when the Gram matrix is
/// not positive definite or its condition number exceeds `max_condition`.
ComplexVector left_pseudo_inverse_column(const ComplexMatrix& m, Eigen::Index k,
                                         double max_condition = kMaxGramCondition);

/// All columns at once: M (M^H M)^{-1}.
ComplexMatrix left_pseudo_inverse(const ComplexMatrix& m,
                                  double max_condition = kMaxGramCondition);

double db_to_linear(double db) noexcept;
double linear_to_db(double linear) noexcept;

}  // namespace qmimo
