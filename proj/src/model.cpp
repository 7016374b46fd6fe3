#include "chaineq/model.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "chaineq/kernels.hpp"

namespace chaineq {

namespace {

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw std::invalid_argument(std::string(field) + ": " + what);
}

double ratio_to_linear(double value, RatioUnits units) {
  return units == RatioUnits::decibel ? std::pow(10.0, value / 10.0) : value;
}

Eigen::VectorXd draw_gains(int users, double lo_db, double hi_db, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Eigen::VectorXd gains(users);
  for (int k = 0; k < users; ++k) {
    const double db = lo_db + (hi_db - lo_db) * uniform(rng);
    gains(k) = std::pow(10.0, db / 10.0);
  }
  if (users > 0) gains /= gains.mean();
  return gains;
}

CMatrix draw_rayleigh(int rows, const Eigen::VectorXd& gains, Rng& rng) {
  CMatrix h(rows, gains.size());
  for (Eigen::Index k = 0; k < h.cols(); ++k) {
    const double amplitude = std::sqrt(gains(k));
    for (Eigen::Index m = 0; m < h.rows(); ++m) h(m, k) = amplitude * complex_normal(rng);
  }
  return h;
}

}  // namespace

void Scenario::validate() const {
  require(users >= 1, "users", "must be >= 1");
  require(antennas >= users, "antennas", "must be >= users");
  require(!cluster_sizes.empty(), "cluster_sizes", "needs at least one cluster");
  for (int s : cluster_sizes) require(s >= 1, "cluster_sizes", "every cluster needs at least one antenna");
  require(std::accumulate(cluster_sizes.begin(), cluster_sizes.end(), 0) == antennas, "cluster_sizes",
          "must sum to antennas");
  require(noise_samples >= partition().max_size(), "noise_samples", "must be >= the largest cluster size");
  require(interferers >= 0, "interferers", "must be >= 0");
  require(symbol_energy > 0.0 && std::isfinite(symbol_energy), "symbol_energy", "must be positive");
  require(constellation == 4 || constellation == 16 || constellation == 64, "constellation", "must be 4, 16 or 64");
  require(coherence_symbols >= 1, "coherence_symbols", "must be >= 1");
  require(gain_lo_db <= gain_hi_db, "gain_range_db", "lower bound exceeds upper bound");
  powers_from_ratios(*this);
}

Scenario Scenario::desk() { return Scenario{}; }

Scenario Scenario::paper() {
  Scenario s;
  s.antennas = 128;
  s.users = 8;
  s.cluster_sizes.assign(8, 16);
  s.noise_samples = 192;
  s.interferers = 8;
  return s;
}

PowerLevels powers_from_ratios(const Scenario& scenario) {
  const double es_n0 = ratio_to_linear(scenario.es_n0, scenario.ratio_units);
  const double iot = ratio_to_linear(scenario.iot, scenario.ratio_units);
  require(es_n0 > 0.0 && std::isfinite(es_n0), "es_n0", "must be a finite positive ratio");
  require(iot >= 0.0 && std::isfinite(iot), "iot", "must be a finite nonnegative ratio");
  if (scenario.interferers == 0)
    require(iot == 0.0, "iot", "interference over thermal requires interferers > 0 (use -inf dB or 0 linear)");

  PowerLevels p;
  p.thermal = scenario.symbol_energy / es_n0;
  p.interference = scenario.interferers > 0 ? p.thermal * iot / scenario.interferers : 0.0;
  p.symbol_scale = std::sqrt(scenario.symbol_energy);
  return p;
}

ChannelSet build_channel(const Scenario& scenario, Rng& rng) {
  ChannelSet set;
  set.partition = scenario.partition();
  set.target_gains = draw_gains(scenario.users, scenario.gain_lo_db, scenario.gain_hi_db, rng);
  set.target = draw_rayleigh(scenario.antennas, set.target_gains, rng);
  set.interference_gains = draw_gains(scenario.interferers, scenario.gain_lo_db, scenario.gain_hi_db, rng);
  set.interference = draw_rayleigh(scenario.antennas, set.interference_gains, rng);
  return set;
}

ChannelSet build_channel(const Scenario& scenario) {
  Rng rng(scenario.seed);
  return build_channel(scenario, rng);
}

CMatrix draw_colored_noise(const ChannelSet& channels, const PowerLevels& powers, int count, Rng& rng) {
  const Eigen::Index m = channels.target.rows();
  const Eigen::Index k_int = channels.interference.cols();
  const double thermal_amp = std::sqrt(powers.thermal);
  const double int_amp = std::sqrt(powers.interference);

  CMatrix x(k_int, count);
  CMatrix w(m, count);
  for (int i = 0; i < count; ++i) {
    for (Eigen::Index k = 0; k < k_int; ++k) x(k, i) = complex_normal(rng);
    for (Eigen::Index r = 0; r < m; ++r) w(r, i) = thermal_amp * complex_normal(rng);
  }
  if (k_int == 0) return w;
  return int_amp * (channels.interference * x) + w;
}

NoisePool draw_noise_pool(const ChannelSet& channels, const PowerLevels& powers, int count, Rng& rng) {
  NoisePool pool;
  pool.samples = draw_colored_noise(channels, powers, count, rng);
  pool.partition = channels.partition;
  pool.thermal = powers.thermal;
  pool.interference = powers.interference;
  return pool;
}

NoisePool draw_noise_pool(const ChannelSet& channels, const Scenario& scenario, Rng& rng) {
  return draw_noise_pool(channels, powers_from_ratios(scenario), scenario.noise_samples, rng);
}

Covariance exact_covariance(const ChannelSet& channels, const PowerLevels& powers) {
  const Eigen::Index m = channels.target.rows();
  Covariance r;
  r.partition = channels.partition;
  r.full = powers.thermal * CMatrix::Identity(m, m);
  if (channels.interference.cols() > 0)
    r.full += powers.interference * (channels.interference * channels.interference.adjoint());
  return r;
}

Covariance sample_covariance(const NoisePool& pool) {
  if (pool.size() == 0) throw std::invalid_argument("sample_covariance: empty noise pool");
  Covariance r;
  r.partition = pool.partition;
  kernels::omp::sample_covariance(pool.samples, r.full);
  return r;
}

}  // namespace chaineq
