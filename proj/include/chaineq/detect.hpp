#pragma once

// Square Gray-mapped QAM, hard-decision demapping and error statistics.

#include <cstdint>
#include <span>
#include <vector>

#include "chaineq/kernels.hpp"
#include "chaineq/model.hpp"

namespace chaineq {

/// Square M-QAM with per-axis Gray coding and unit average energy.
///
/// A symbol carries 2k bits; the first k select the in-phase level and the
/// last k the quadrature level, MSB first. Per axis the k bits are read as a
/// Gray code g, decoded to its binary index j, and mapped to the amplitude
/// (sqrt(order) - 1 - 2 j) before normalization. Hence an all-zero bit group
/// maps to the largest positive amplitude; for QPSK, bits 00 -> (+1 + 1j)/sqrt(2),
/// 01 -> (+1 - 1j)/sqrt(2), 10 -> (-1 + 1j)/sqrt(2), 11 -> (-1 - 1j)/sqrt(2).
class Constellation {
 public:
  /// order must be 4, 16 or 64.
  explicit Constellation(int order);

  int order() const { return order_; }
  int bits_per_symbol() const { return bits_per_symbol_; }
  int levels_per_axis() const { return levels_; }
  /// Multiplier from integer amplitudes (+-1, +-3, ...) to unit average energy.
  double scale() const { return scale_; }

  const std::vector<cdouble>& points() const { return points_; }
  /// Symbol index (0..order-1) whose bit label is the index itself, MSB first.
  cdouble point(int index) const { return points_[static_cast<std::size_t>(index)]; }

  /// Nearest point by per-axis slicing; returns the symbol index.
  int decide(cdouble soft) const;

 private:
  int order_;
  int bits_per_symbol_;
  int levels_;
  double scale_;
  std::vector<cdouble> points_;
};

/// Bits -> symbols. Throws std::invalid_argument if bits.size() is not a multiple of bits per symbol.
std::vector<cdouble> modulate(std::span<const std::uint8_t> bits, const Constellation& constellation);

std::vector<std::uint8_t> demodulate_hard(std::span<const cdouble> soft, const Constellation& constellation);

struct ErrorStats {
  std::int64_t bit_errors = 0;
  std::int64_t symbol_errors = 0;
  std::int64_t bits = 0;
  std::int64_t symbols = 0;

  double ber() const { return bits == 0 ? 0.0 : static_cast<double>(bit_errors) / static_cast<double>(bits); }
  double ser() const {
    return symbols == 0 ? 0.0 : static_cast<double>(symbol_errors) / static_cast<double>(symbols);
  }
  ErrorStats& operator+=(const ErrorStats& other);
  friend bool operator==(const ErrorStats&, const ErrorStats&) = default;
};

/// Data resource elements of one coherence block, shared by every equalizer under test.
struct LinkBatch {
  std::vector<int> sent;  // K symbol indices per RE, RE-major
  CMatrix received;       // M x n_symbols
  int users = 0;
};

/// y = sqrt(E_s) H s + n with fresh interference symbols and thermal draws per RE.
LinkBatch generate_link_batch(const Scenario& scenario, const ChannelSet& channels, const Constellation& constellation,
                              int n_symbols, Rng& rng);

struct LinkOptions {
  // Divide each stream by sqrt(E_s) (W H)_kk before slicing, removing
  // the MMSE amplitude bias. Streams with |diag| below 1e-12 are left unscaled.
  bool unbiased = true;
};

/// Equalize with W, slice and count errors. H is only used for bias removal.
ErrorStats evaluate_link(const LinkBatch& batch, const CMatrix& weights, const CMatrix& channel, double symbol_energy,
                         const Constellation& constellation, const LinkOptions& options = {});

ErrorStats run_link(const Scenario& scenario, const ChannelSet& channels, const CMatrix& weights, int n_symbols,
                    Rng& rng, const LinkOptions& options = {});

/// Gaussian tail probability Q(x).
double q_function(double x);

}  // namespace chaineq
