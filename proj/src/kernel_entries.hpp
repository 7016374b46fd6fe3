#pragma once

// Per-entry bodies shared by the serial and OpenMP kernel drivers. Only the
// distribution of entries over threads differs between the two.

#include <bit>
#include <vector>

#include "chaineq/detect.hpp"
#include "chaineq/types.hpp"

namespace chaineq::kernels::detail {

/// Row-major copy so that per-antenna sample sequences are contiguous.
using RowMajor = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// (1/n) sum_i x_i conj(y_i) over contiguous rows.
inline cdouble conj_dot(const cdouble* x, const cdouble* y, Eigen::Index n, double inv_n) {
  double re = 0.0;
  double im = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double yr = y[i].real(), yi = y[i].imag();
    re += xr * yr + xi * yi;
    im += xi * yr - xr * yi;
  }
  return {re * inv_n, im * inv_n};
}

/// out[:, col] = W y for one received vector.
inline void equalize_column(const Eigen::Ref<const CMatrix>& w, const cdouble* y, cdouble* out) {
  const Eigen::Index k_rows = w.rows();
  for (Eigen::Index k = 0; k < k_rows; ++k) out[k] = 0.0;
  for (Eigen::Index m = 0; m < w.cols(); ++m) {
    const double yr = y[m].real(), yi = y[m].imag();
    const cdouble* wc = w.data() + m * w.outerStride();
    for (Eigen::Index k = 0; k < k_rows; ++k) {
      const double wr = wc[k].real(), wi = wc[k].imag();
      out[k] = {out[k].real() + (wr * yr - wi * yi), out[k].imag() + (wr * yi + wi * yr)};
    }
  }
}

inline ErrorCounts column_errors(const Eigen::Ref<const CMatrix>& soft, Eigen::Index col, const int* sent,
                                 const Constellation& constellation) {
  ErrorCounts e;
  for (Eigen::Index k = 0; k < soft.rows(); ++k) {
    const int decided = constellation.decide(soft(k, col));
    const int diff = decided ^ sent[k];
    e.bit_errors += std::popcount(static_cast<unsigned>(diff));
    e.symbol_errors += diff != 0 ? 1 : 0;
  }
  return e;
}

}  // namespace chaineq::kernels::detail
