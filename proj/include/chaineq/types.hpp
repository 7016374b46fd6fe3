#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace chaineq {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Rng = std::mt19937_64;

/// Contiguous split of M antennas into C clusters.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<int> sizes);

  /// C equal clusters of M / C antennas; M must be divisible by C.
  static Partition equal(int antennas, int clusters);

  int clusters() const { return static_cast<int>(sizes_.size()); }
  int total() const { return offsets_.empty() ? 0 : offsets_.back(); }
  int size(int c) const { return sizes_.at(static_cast<std::size_t>(c)); }
  int offset(int c) const { return offsets_.at(static_cast<std::size_t>(c)); }
  int max_size() const;
  const std::vector<int>& sizes() const { return sizes_; }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;  // C + 1 entries, offsets_[C] == M
};

/// Numerically singular or indefinite matrix where a positive definite one was required.
class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reciprocal condition number below which a Hermitian solve is refused.
inline constexpr double kMinRcond = 1e-12;

/// Complex standard normal CN(0, 1).
cdouble complex_normal(Rng& rng);

/// Derives an independent 64-bit seed from a base seed and a list of stream coordinates.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coords);

double relative_frobenius(const CMatrix& a, const CMatrix& reference);

}  // namespace chaineq
