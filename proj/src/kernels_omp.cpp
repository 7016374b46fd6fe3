#include "chaineq/kernels.hpp"

#include "kernel_entries.hpp"

namespace chaineq::kernels::omp {

void sample_covariance(const ConstRef& samples, CMatrix& out) {
  const detail::RowMajor s = samples;
  const Eigen::Index m = s.rows();
  const Eigen::Index n = s.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  out.resize(m, m);
#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index c = 0; c < m; ++c) {
    for (Eigen::Index r = c; r < m; ++r) {
      cdouble v = detail::conj_dot(s.row(r).data(), s.row(c).data(), n, inv_n);
      if (r == c) v.imag(0.0);
      out(r, c) = v;
      out(c, r) = std::conj(v);
    }
  }
}

void residual_correlation(const ConstRef& running, const ConstRef& own, const ConstRef& noise, CMatrix& out) {
  const detail::RowMajor d = running - own;
  const detail::RowMajor nz = noise;
  const Eigen::Index n = nz.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  out.resize(d.rows(), nz.rows());
#pragma omp parallel for collapse(2)
  for (Eigen::Index j = 0; j < nz.rows(); ++j)
    for (Eigen::Index k = 0; k < d.rows(); ++k) out(k, j) = detail::conj_dot(d.row(k).data(), nz.row(j).data(), n, inv_n);
}

void equalize(const ConstRef& weights, const ConstRef& received, CMatrix& out) {
  out.resize(weights.rows(), received.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index col = 0; col < received.cols(); ++col)
    detail::equalize_column(weights, received.data() + col * received.outerStride(), out.col(col).data());
}

ErrorCounts count_errors(const ConstRef& soft, const std::vector<int>& sent, const Constellation& constellation) {
  std::int64_t bit_errors = 0;
  std::int64_t symbol_errors = 0;
#pragma omp parallel for schedule(static) reduction(+ : bit_errors, symbol_errors)
  for (Eigen::Index col = 0; col < soft.cols(); ++col) {
    const ErrorCounts e = detail::column_errors(soft, col, sent.data() + col * soft.rows(), constellation);
    bit_errors += e.bit_errors;
    symbol_errors += e.symbol_errors;
  }
  return {bit_errors, symbol_errors};
}

}  // namespace chaineq::kernels::omp
