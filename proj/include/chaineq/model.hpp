#pragma once

// Scenario construction: channels, colored-noise samples and covariances.

#include <cstdint>
#include <vector>

#include "chaineq/types.hpp"

namespace chaineq {

/// How `Scenario::es_n0` and `Scenario::iot` are read.
enum class RatioUnits { decibel, linear };

struct Scenario {
  int antennas = 32;                         // M
  int users = 4;                             // K
  std::vector<int> cluster_sizes{8, 8, 8, 8};  // M_c, sums to M
  int noise_samples = 96;                    // N pilot REs
  int interferers = 4;                       // K_int
  double symbol_energy = 1.0;                // E_s, linear
  double es_n0 = 10.0;
  double iot = 10.0;
  RatioUnits ratio_units = RatioUnits::decibel;
  int constellation = 16;
  int coherence_symbols = 1000;
  // Per-user large-scale gains are log-uniform over [gain_lo_db, gain_hi_db]
  // and then normalized to unit mean across the user group.
  double gain_lo_db = -6.0;
  double gain_hi_db = 0.0;
  std::uint64_t seed = 1;

  int clusters() const { return static_cast<int>(cluster_sizes.size()); }
  Partition partition() const { return Partition(cluster_sizes); }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// M=32, C=4, M_c=8, K=4, K_int=4, N=96, 16-QAM.
  static Scenario desk();
  /// M=128, C=8, M_c=16, K=8, K_int=8, N=192, 16-QAM.
  static Scenario paper();
};

struct PowerLevels {
  double thermal = 0.0;       // sigma^2 per antenna
  double interference = 0.0;  // per interfering user
  double symbol_scale = 1.0;  // sqrt(E_s)
};

/// sigma^2 = E_s / (Es/N0); p_int = sigma^2 * IoT / K_int.
PowerLevels powers_from_ratios(const Scenario& scenario);

struct ChannelSet {
  CMatrix target;        // M x K
  CMatrix interference;  // M x K_int
  Eigen::VectorXd target_gains;
  Eigen::VectorXd interference_gains;
  Partition partition;

  auto block(int c) const { return target.middleRows(partition.offset(c), partition.size(c)); }
};

ChannelSet build_channel(const Scenario& scenario, Rng& rng);
ChannelSet build_channel(const Scenario& scenario);

/// `count` independent colored-noise vectors sqrt(p_int) H_int x + w as columns of an M x count matrix.
CMatrix draw_colored_noise(const ChannelSet& channels, const PowerLevels& powers, int count, Rng& rng);

struct NoisePool {
  CMatrix samples;  // M x N, column i is n^i
  Partition partition;
  double thermal = 0.0;
  double interference = 0.0;

  int size() const { return static_cast<int>(samples.cols()); }
  auto block(int c) const { return samples.middleRows(partition.offset(c), partition.size(c)); }
};

NoisePool draw_noise_pool(const ChannelSet& channels, const PowerLevels& powers, int count, Rng& rng);
NoisePool draw_noise_pool(const ChannelSet& channels, const Scenario& scenario, Rng& rng);

struct Covariance {
  CMatrix full;
  Partition partition;

  auto block(int m, int n) const {
    return full.block(partition.offset(m), partition.offset(n), partition.size(m), partition.size(n));
  }
};

/// p_int H_int H_int^H + sigma^2 I.
Covariance exact_covariance(const ChannelSet& channels, const PowerLevels& powers);

/// (1/N) sum_i n^i (n^i)^H. Throws std::invalid_argument on an empty pool.
Covariance sample_covariance(const NoisePool& pool);

}  // namespace chaineq
