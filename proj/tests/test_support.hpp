#pragma once

// Shared generators for the unit tests.

#include <cstdint>
#include <vector>

#include "chaineq/central.hpp"
#include "chaineq/daisy.hpp"
#include "chaineq/model.hpp"

namespace chaineq::testing {

inline CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = complex_normal(rng);
  return m;
}

// Hermitian positive definite with eigenvalues bounded away from zero.
inline CMatrix random_pd(Eigen::Index n, Rng& rng) {
  const CMatrix a = random_matrix(n, n, rng);
  CMatrix r = a * a.adjoint() / static_cast<double>(n);
  r.diagonal().array() += 0.5;
  return r;
}

inline Scenario small_scenario(int antennas, int clusters, int users, int samples, std::uint64_t seed = 1) {
  Scenario s;
  s.antennas = antennas;
  s.users = users;
  s.cluster_sizes.assign(static_cast<std::size_t>(clusters), antennas / clusters);
  s.noise_samples = samples;
  s.interferers = users;
  s.seed = seed;
  return s;
}

struct Problem {
  Scenario scenario;
  ChannelSet channels;
  NoisePool pool;
  Covariance sample;
};

inline Problem make_problem(const Scenario& s, std::uint64_t seed) {
  Rng rng(seed);
  Problem p{s, build_channel(s, rng), {}, {}};
  p.pool = draw_noise_pool(p.channels, s, rng);
  p.sample = sample_covariance(p.pool);
  return p;
}

inline CMatrix reference_mmse(const Problem& p) {
  return mmse_centralized(p.channels.target, p.sample.full, p.scenario.symbol_energy).weights;
}

}  // namespace chaineq::testing
