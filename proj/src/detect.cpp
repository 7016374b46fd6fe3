#include "chaineq/detect.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace chaineq {

namespace {

int gray_to_binary(int g) {
  int b = 0;
  for (; g != 0; g >>= 1) b ^= g;
  return b;
}

int binary_to_gray(int b) { return b ^ (b >> 1); }

}  // namespace

Constellation::Constellation(int order) : order_(order) {
  if (order != 4 && order != 16 && order != 64)
    throw std::invalid_argument("constellation: order must be 4, 16 or 64, got " + std::to_string(order));
  bits_per_symbol_ = std::countr_zero(static_cast<unsigned>(order));
  levels_ = 1 << (bits_per_symbol_ / 2);
  scale_ = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);

  const int axis_bits = bits_per_symbol_ / 2;
  const int mask = levels_ - 1;
  const auto amplitude = [this](int gray) { return static_cast<double>(levels_ - 1 - 2 * gray_to_binary(gray)); };
  points_.reserve(static_cast<std::size_t>(order));
  for (int index = 0; index < order; ++index)
    points_.emplace_back(scale_ * amplitude(index >> axis_bits), scale_ * amplitude(index & mask));
}

int Constellation::decide(cdouble soft) const {
  const auto slice = [this](double x) {
    const double j = std::round((static_cast<double>(levels_ - 1) - x / scale_) / 2.0);
    const int clamped = static_cast<int>(std::clamp(j, 0.0, static_cast<double>(levels_ - 1)));
    return binary_to_gray(clamped);
  };
  return (slice(soft.real()) << (bits_per_symbol_ / 2)) | slice(soft.imag());
}

std::vector<cdouble> modulate(std::span<const std::uint8_t> bits, const Constellation& constellation) {
  const auto bps = static_cast<std::size_t>(constellation.bits_per_symbol());
  if (bits.size() % bps != 0)
    throw std::invalid_argument("modulate: bit count " + std::to_string(bits.size()) + " is not a multiple of " +
                                std::to_string(bps));
  std::vector<cdouble> symbols;
  symbols.reserve(bits.size() / bps);
  for (std::size_t s = 0; s < bits.size(); s += bps) {
    int index = 0;
    for (std::size_t b = 0; b < bps; ++b) index = (index << 1) | (bits[s + b] & 1);
    symbols.push_back(constellation.point(index));
  }
  return symbols;
}

std::vector<std::uint8_t> demodulate_hard(std::span<const cdouble> soft, const Constellation& constellation) {
  const int bps = constellation.bits_per_symbol();
  std::vector<std::uint8_t> bits;
  bits.reserve(soft.size() * static_cast<std::size_t>(bps));
  for (cdouble s : soft) {
    const int index = constellation.decide(s);
    for (int b = bps - 1; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((index >> b) & 1));
  }
  return bits;
}

ErrorStats& ErrorStats::operator+=(const ErrorStats& other) {
  bit_errors += other.bit_errors;
  symbol_errors += other.symbol_errors;
  bits += other.bits;
  symbols += other.symbols;
  return *this;
}

LinkBatch generate_link_batch(const Scenario& scenario, const ChannelSet& channels, const Constellation& constellation,
                              int n_symbols, Rng& rng) {
  const PowerLevels powers = powers_from_ratios(scenario);
  const int k = static_cast<int>(channels.target.cols());
  LinkBatch batch;
  batch.users = k;
  batch.sent.resize(static_cast<std::size_t>(k) * static_cast<std::size_t>(n_symbols));

  std::uniform_int_distribution<int> pick(0, constellation.order() - 1);
  CMatrix symbols(k, n_symbols);
  for (int i = 0; i < n_symbols; ++i) {
    for (int u = 0; u < k; ++u) {
      const int index = pick(rng);
      batch.sent[static_cast<std::size_t>(i) * static_cast<std::size_t>(k) + static_cast<std::size_t>(u)] = index;
      symbols(u, i) = constellation.point(index);
    }
  }
  batch.received = draw_colored_noise(channels, powers, n_symbols, rng);
  batch.received.noalias() += powers.symbol_scale * (channels.target * symbols);
  return batch;
}

ErrorStats evaluate_link(const LinkBatch& batch, const CMatrix& weights, const CMatrix& channel, double symbol_energy,
                         const Constellation& constellation, const LinkOptions& options) {
  CMatrix soft;
  kernels::omp::equalize(weights, batch.received, soft);

  const Eigen::Index k = weights.rows();
  CVector gain = CVector::Constant(k, std::sqrt(symbol_energy));
  if (options.unbiased) {
    const CMatrix effective = weights * channel;
    for (Eigen::Index u = 0; u < k; ++u)
      if (std::abs(effective(u, u)) > 1e-12) gain(u) *= effective(u, u);
  }
  soft = gain.cwiseInverse().asDiagonal() * soft;

  const ErrorCounts counts = kernels::omp::count_errors(soft, batch.sent, constellation);
  ErrorStats stats;
  stats.bit_errors = counts.bit_errors;
  stats.symbol_errors = counts.symbol_errors;
  stats.symbols = static_cast<std::int64_t>(batch.sent.size());
  stats.bits = stats.symbols * constellation.bits_per_symbol();
  return stats;
}

ErrorStats run_link(const Scenario& scenario, const ChannelSet& channels, const CMatrix& weights, int n_symbols,
                    Rng& rng, const LinkOptions& options) {
  const Constellation constellation(scenario.constellation);
  const LinkBatch batch = generate_link_batch(scenario, channels, constellation, n_symbols, rng);
  return evaluate_link(batch, weights, channels.target, scenario.symbol_energy, constellation, options);
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace chaineq
