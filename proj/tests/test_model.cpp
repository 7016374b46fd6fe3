#include <cmath>
#include <limits>

#include "doctest.h"
#include "test_support.hpp"

using namespace chaineq;
using namespace chaineq::testing;

TEST_CASE("powers from ratios") {
  Scenario s;
  s.es_n0 = 0.0;
  s.iot = 0.0;
  CHECK(powers_from_ratios(s).thermal == doctest::Approx(1.0).epsilon(1e-15));

  s.interferers = 1;
  s.iot = 10.0;
  CHECK(powers_from_ratios(s).interference == doctest::Approx(10.0).epsilon(1e-14));

  // sigma2 = 0.5 is Es/N0 = 2 linear; IoT 10 dB over 8 interferers.
  s.interferers = 8;
  s.es_n0 = 10.0 * std::log10(2.0);
  CHECK(powers_from_ratios(s).thermal == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(powers_from_ratios(s).interference == doctest::Approx(0.625).epsilon(1e-14));
  CHECK(powers_from_ratios(s).symbol_scale == 1.0);

  s.ratio_units = RatioUnits::linear;
  s.es_n0 = 2.0;
  s.iot = 10.0;
  CHECK(powers_from_ratios(s).thermal == 0.5);
  CHECK(powers_from_ratios(s).interference == doctest::Approx(0.625).epsilon(1e-15));
}

TEST_CASE("interference ratio without interferers is rejected") {
  Scenario s;
  s.interferers = 0;
  s.iot = 10.0;
  CHECK_THROWS_WITH_AS(powers_from_ratios(s), doctest::Contains("iot"), std::invalid_argument);
  s.iot = -std::numeric_limits<double>::infinity();
  CHECK(powers_from_ratios(s).interference == 0.0);
  s.ratio_units = RatioUnits::linear;
  s.iot = 0.0;
  CHECK_NOTHROW(powers_from_ratios(s));
}

TEST_CASE("scenario validation names the field") {
  Scenario s;
  CHECK_NOTHROW(s.validate());
  s.noise_samples = 4;
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("noise_samples"), std::invalid_argument);
  s = Scenario{};
  s.cluster_sizes = {8, 8, 8};
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("cluster_sizes"), std::invalid_argument);
  s = Scenario{};
  s.users = 40;
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("antennas"), std::invalid_argument);
  s = Scenario{};
  s.symbol_energy = 0.0;
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("symbol_energy"), std::invalid_argument);
  s = Scenario{};
  s.constellation = 8;
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("constellation"), std::invalid_argument);
  CHECK_NOTHROW(Scenario::paper().validate());
}

TEST_CASE("unit-gain channel entries have unit power") {
  Scenario s;
  s.antennas = 2;
  s.users = 1;
  s.cluster_sizes = {2};
  s.noise_samples = 2;
  s.interferers = 0;
  s.iot = -std::numeric_limits<double>::infinity();
  s.gain_lo_db = s.gain_hi_db = 0.0;
  Rng rng(11);
  double power = 0.0;
  const int draws = 50000;
  for (int i = 0; i < draws; ++i) power += build_channel(s, rng).target.squaredNorm();
  CHECK(power / (2.0 * draws) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("user gains are normalized to unit mean within the range") {
  Scenario s;
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const ChannelSet ch = build_channel(s, rng);
    CHECK(ch.target_gains.mean() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ch.target_gains.maxCoeff() / ch.target_gains.minCoeff() <= std::pow(10.0, 0.6) + 1e-12);
  }
}

TEST_CASE("channel and pool are deterministic under the seed") {
  const Scenario s = Scenario::desk();
  const ChannelSet a = build_channel(s);
  const ChannelSet b = build_channel(s);
  CHECK(a.target == b.target);
  CHECK(a.interference == b.interference);
  Rng r1(9), r2(9);
  CHECK(draw_noise_pool(a, s, r1).samples == draw_noise_pool(b, s, r2).samples);
}

TEST_CASE("no interferers gives an empty interference channel and white noise") {
  Scenario s;
  s.interferers = 0;
  s.iot = -std::numeric_limits<double>::infinity();
  const ChannelSet ch = build_channel(s);
  CHECK(ch.interference.rows() == s.antennas);
  CHECK(ch.interference.cols() == 0);
  s.es_n0 = 0.0;
  const Covariance r = exact_covariance(ch, powers_from_ratios(s));
  CHECK(r.full.isApprox(CMatrix::Identity(s.antennas, s.antennas), 0.0));
}

TEST_CASE("exact covariance of a single unit interferer is rank one") {
  ChannelSet ch;
  ch.target = CMatrix::Identity(3, 1);
  ch.interference = CMatrix::Zero(3, 1);
  ch.interference(0, 0) = 1.0;
  ch.partition = Partition({3});
  const Covariance r = exact_covariance(ch, PowerLevels{0.0, 1.0, 1.0});
  CMatrix expected = CMatrix::Zero(3, 3);
  expected(0, 0) = 1.0;
  CHECK(r.full == expected);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(r.full);
  CHECK((eig.eigenvalues().array() > 1e-12).count() == 1);
}

TEST_CASE("exact covariance matches the empirical covariance of many draws") {
  Scenario s;
  s.antennas = 4;
  s.users = 1;
  s.cluster_sizes = {2, 2};
  s.interferers = 2;
  s.es_n0 = 3.0;
  s.iot = 5.0;
  Rng rng(21);
  const ChannelSet ch = build_channel(s, rng);
  const PowerLevels p = powers_from_ratios(s);
  CMatrix acc = CMatrix::Zero(4, 4);
  const int total = 1000000;
  const int batch = 10000;
  for (int done = 0; done < total; done += batch) {
    const CMatrix n = draw_colored_noise(ch, p, batch, rng);
    acc += n * n.adjoint();
  }
  acc /= static_cast<double>(total);
  CHECK(relative_frobenius(acc, exact_covariance(ch, p).full) < 0.01);
}

TEST_CASE("noise pool sizes and the noiseless case") {
  const Scenario s = Scenario::desk();
  Rng rng(5);
  const ChannelSet ch = build_channel(s, rng);
  const NoisePool one = draw_noise_pool(ch, powers_from_ratios(s), 1, rng);
  CHECK(one.size() == 1);
  CHECK(one.samples.rows() == s.antennas);

  ChannelSet quiet = ch;
  quiet.interference.resize(s.antennas, 0);
  const NoisePool zero = draw_noise_pool(quiet, PowerLevels{0.0, 0.0, 1.0}, 16, rng);
  CHECK(zero.samples.isZero(0.0));
  CHECK(sample_covariance(zero).full.isZero(0.0));
}

TEST_CASE("sample covariance of one sample is its outer product") {
  Rng rng(6);
  NoisePool pool;
  pool.samples = random_matrix(5, 1, rng);
  pool.partition = Partition({2, 3});
  const Covariance r = sample_covariance(pool);
  const CMatrix expected = pool.samples * pool.samples.adjoint();
  CHECK((r.full - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("sample covariance matches a two-loop accumulation") {
  Rng rng(7);
  NoisePool pool;
  pool.samples = random_matrix(8, 64, rng);
  pool.partition = Partition({4, 4});
  const Covariance r = sample_covariance(pool);
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) {
      cdouble sum = 0.0;
      for (int i = 0; i < 64; ++i) sum += pool.samples(a, i) * std::conj(pool.samples(b, i));
      CHECK(std::abs(r.full(a, b) - sum / 64.0) < 1e-14);
    }
  }
}

TEST_CASE("sample covariance is Hermitian PSD with consistent blocks") {
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    Scenario s = small_scenario(12, 3, 2, 6 + t);
    const Problem p = make_problem(s, 100 + static_cast<std::uint64_t>(t));
    const CMatrix& r = p.sample.full;
    CHECK(r == r.adjoint());
    CHECK(r.diagonal().imag().isZero(0.0));
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(r);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * r.trace().real());
    for (int m = 0; m < 3; ++m)
      for (int n = 0; n < 3; ++n) CHECK(CMatrix(p.sample.block(m, n)) == CMatrix(p.sample.block(n, m)).adjoint());
  }
}

TEST_CASE("empty pool is rejected") {
  NoisePool pool;
  pool.samples.resize(4, 0);
  pool.partition = Partition({4});
  CHECK_THROWS_AS(sample_covariance(pool), std::invalid_argument);
}

TEST_CASE("partition round trip") {
  const Problem p = make_problem(small_scenario(12, 3, 2, 16), 4);
  CMatrix h(12, 2), n(12, 16), r(12, 12);
  for (int c = 0; c < 3; ++c) {
    const int o = p.channels.partition.offset(c);
    const int m = p.channels.partition.size(c);
    h.middleRows(o, m) = p.channels.block(c);
    n.middleRows(o, m) = p.pool.block(c);
    for (int d = 0; d < 3; ++d)
      r.block(o, p.sample.partition.offset(d), m, p.sample.partition.size(d)) = p.sample.block(c, d);
  }
  CHECK(h == p.channels.target);
  CHECK(n == p.pool.samples);
  CHECK(r == p.sample.full);
}

TEST_CASE("sample covariance error shrinks with the pool size") {
  Scenario s = Scenario::desk();
  Rng rng(12);
  const ChannelSet ch = build_channel(s, rng);
  const PowerLevels p = powers_from_ratios(s);
  const CMatrix exact = exact_covariance(ch, p).full;
  double previous = std::numeric_limits<double>::infinity();
  for (int n : {1000, 10000, 100000}) {
    const NoisePool pool = draw_noise_pool(ch, p, n, rng);
    const double err = (sample_covariance(pool).full - exact).norm();
    CHECK(err < previous);
    previous = err;
  }
}
