#pragma once

// Data-parallel inner loops. Every kernel exists twice: `serial` is the
// reference, `omp` distributes independent output entries over threads. Each
// output entry is accumulated in the same order by both, so results are
// bit-identical regardless of thread count.

#include <cstdint>
#include <vector>

#include "chaineq/types.hpp"

namespace chaineq {

class Constellation;

struct ErrorCounts {
  std::int64_t bit_errors = 0;
  std::int64_t symbol_errors = 0;
};

namespace kernels {

using ConstRef = Eigen::Ref<const CMatrix>;

#define CHAINEQ_KERNEL_DECLS                                                                   \
  /* out = (1/N) S S^H for S = samples (M x N); exactly Hermitian. */                          \
  void sample_covariance(const ConstRef& samples, CMatrix& out);                               \
  /* out = (1/N) sum_i (running_i - own_i) noise_i^H, out is K x M_c. */                       \
  void residual_correlation(const ConstRef& running, const ConstRef& own, const ConstRef& noise, \
                            CMatrix& out);                                                     \
  /* out = W Y, columns of Y are received vectors. */                                          \
  void equalize(const ConstRef& weights, const ConstRef& received, CMatrix& out);              \
  /* Hard decisions on soft (K x n) against sent symbol indices (column-major, K per RE). */   \
  ErrorCounts count_errors(const ConstRef& soft, const std::vector<int>& sent,                 \
                           const Constellation& constellation);

namespace serial {
CHAINEQ_KERNEL_DECLS
}  // namespace serial

namespace omp {
CHAINEQ_KERNEL_DECLS
}  // namespace omp

#undef CHAINEQ_KERNEL_DECLS

}  // namespace kernels
}  // namespace chaineq
