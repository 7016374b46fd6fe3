#pragma once

// Centralized reference equalizers.

#include <string>

#include "chaineq/model.hpp"

namespace chaineq {

/// K x M linear equalizer with per-cluster column blocks W_c.
struct EqualizerMatrix {
  CMatrix weights;
  Partition partition;
  std::string label;

  auto block(int c) const { return weights.middleCols(partition.offset(c), partition.size(c)); }
  auto block(int c) { return weights.middleCols(partition.offset(c), partition.size(c)); }
};

/// W = (H^H R^-1 H + I/E_s)^-1 H^H R^-1 via Cholesky of R and of the K x K Gram term.
/// Throws SingularMatrixError if R is not PD or its reciprocal condition is below kMinRcond.
EqualizerMatrix mmse_centralized(const CMatrix& channel, const CMatrix& covariance, double symbol_energy,
                                 const Partition& partition);
EqualizerMatrix mmse_centralized(const CMatrix& channel, const CMatrix& covariance, double symbol_energy);

/// W = (H^H H)^-1 H^H. Throws SingularMatrixError on a rank-deficient H.
EqualizerMatrix zf_centralized(const CMatrix& channel, const Partition& partition);
EqualizerMatrix zf_centralized(const CMatrix& channel);

/// s_hat = W y.
CVector apply_equalizer(const CMatrix& weights, const CVector& received);

/// E_s ||W H - I||_F^2 + (1/N) sum_i ||W n^i||^2.
double sample_objective(const CMatrix& weights, const CMatrix& channel, const CMatrix& noise_samples,
                        double symbol_energy);

}  // namespace chaineq
