#include "chaineq/central.hpp"

#include <string>

namespace chaineq {

namespace {

Eigen::LLT<CMatrix> factor_or_throw(const CMatrix& m, const char* what) {
  Eigen::LLT<CMatrix> llt(m);
  if (llt.info() != Eigen::Success) throw SingularMatrixError(std::string(what) + ": not positive definite");
  const double rcond = llt.rcond();
  if (!(rcond >= kMinRcond))
    throw SingularMatrixError(std::string(what) + ": reciprocal condition " + std::to_string(rcond) +
                              " below threshold");
  return llt;
}

void check_dims(const CMatrix& channel, const CMatrix& covariance) {
  if (covariance.rows() != channel.rows() || covariance.cols() != channel.rows())
    throw std::invalid_argument("mmse_centralized: covariance must be M x M for an M x K channel");
}

}  // namespace

EqualizerMatrix mmse_centralized(const CMatrix& channel, const CMatrix& covariance, double symbol_energy,
                                 const Partition& partition) {
  check_dims(channel, covariance);
  const auto r = factor_or_throw(covariance, "mmse_centralized: noise covariance");
  const CMatrix whitened = r.solve(channel);  // R^-1 H
  CMatrix coupling = channel.adjoint() * whitened;
  coupling.diagonal().array() += 1.0 / symbol_energy;
  const auto t = factor_or_throw(0.5 * (coupling + coupling.adjoint()), "mmse_centralized: coupling matrix");
  return {t.solve(whitened.adjoint()), partition, "mmse"};
}

EqualizerMatrix mmse_centralized(const CMatrix& channel, const CMatrix& covariance, double symbol_energy) {
  return mmse_centralized(channel, covariance, symbol_energy, Partition({static_cast<int>(channel.rows())}));
}

EqualizerMatrix zf_centralized(const CMatrix& channel, const Partition& partition) {
  const auto gram = factor_or_throw(channel.adjoint() * channel, "zf_centralized: H^H H (rank-deficient channel)");
  return {gram.solve(channel.adjoint()), partition, "zf"};
}

EqualizerMatrix zf_centralized(const CMatrix& channel) {
  return zf_centralized(channel, Partition({static_cast<int>(channel.rows())}));
}

CVector apply_equalizer(const CMatrix& weights, const CVector& received) {
  if (weights.cols() != received.size()) throw std::invalid_argument("apply_equalizer: dimension mismatch");
  return weights * received;
}

double sample_objective(const CMatrix& weights, const CMatrix& channel, const CMatrix& noise_samples,
                        double symbol_energy) {
  const Eigen::Index k = weights.rows();
  const double bias = (weights * channel - CMatrix::Identity(k, k)).squaredNorm();
  const double noise = noise_samples.cols() == 0
                           ? 0.0
                           : (weights * noise_samples).squaredNorm() / static_cast<double>(noise_samples.cols());
  return symbol_energy * bias + noise;
}

}  // namespace chaineq
