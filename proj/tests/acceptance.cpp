// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "chaineq/central.hpp"
#include "chaineq/daisy.hpp"
#include "chaineq/detect.hpp"
#include "chaineq/harness.hpp"
#include "chaineq/interconnect.hpp"
#include "chaineq/model.hpp"

using namespace chaineq;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

Scenario oracle_scenario(std::uint64_t seed) {
  Scenario s;
  s.antennas = 16;
  s.users = 4;
  s.cluster_sizes = {4, 4, 4, 4};
  s.noise_samples = 64;
  s.interferers = 4;
  s.iot = 10.0;
  s.es_n0 = 10.0;
  s.seed = seed;
  return s;
}

constexpr int kOracleInstances = 20;

Outcome global_optimum() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (int i = 0; i < kOracleInstances; ++i) {
    const Instance inst = make_instance(oracle_scenario(1), derive_seed(2024, {static_cast<std::uint64_t>(i)}));
    const CMatrix ref = mmse_centralized(inst.channels.target, inst.sample.full, 1.0).weights;
    auto dbus = make_dbu_states(inst.channels, inst.pool);
    const BcdRun run = run_bcd(dbus, {ScheduleKind::gauss_seidel_loop, 50}, 1.0);
    worst = std::max(worst, relative_frobenius(run.weights.weights, ref));
  }
  const double elapsed = seconds_since(start);

  // Diagnostic only: sweeps the same instances actually need to reach 1e-8.
  int needed = 0;
  for (int i = 0; i < kOracleInstances; ++i) {
    const Instance inst = make_instance(oracle_scenario(1), derive_seed(2024, {static_cast<std::uint64_t>(i)}));
    const CMatrix ref = mmse_centralized(inst.channels.target, inst.sample.full, 1.0).weights;
    auto dbus = make_dbu_states(inst.channels, inst.pool);
    int reached = -1;
    run_bcd(dbus, {ScheduleKind::gauss_seidel_loop, 5000}, 1.0, [&](const UpdateEvent& e) {
      if (reached < 0 && e.block == 3 && e.sweep % 10 == 0 &&
          relative_frobenius(assemble(e.dbus, "bcd").weights, ref) < 1e-8)
        reached = e.sweep;
    });
    needed = reached < 0 ? -1 : std::max(needed, reached);
    if (reached < 0) break;
  }
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "max relative distance %.3e (< 1e-8) after 50 sweeps over %d instances, %.2f s (< 5 s); "
                "1e-8 reached by sweep %d on every instance",
                worst, kOracleInstances, elapsed, needed);
  return {worst < 1e-8 && elapsed < 5.0, buf};
}

Outcome single_cluster() {
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    Scenario s = oracle_scenario(1);
    s.cluster_sizes = {16};
    const Instance inst = make_instance(s, derive_seed(77, {static_cast<std::uint64_t>(i)}));
    const CMatrix ref = mmse_centralized(inst.channels.target, inst.sample.full, 1.0).weights;

    auto dbus = make_dbu_states(inst.channels, inst.pool);
    TrafficLedger ledger(Topology(TopologyKind::uni_loop, 1));
    FlopLedger flops;
    preprocess(dbus, 1.0, ledger, flops);
    DbuState& d = dbus[0];
    d.weights.setZero();
    d.channel_image.setZero();
    d.noise_image.setZero();
    const ChainMessage zero{CMatrix::Zero(4, 4), CMatrix::Zero(4, 64), 1, 0};
    bcd_block_update(d, zero, 1.0);
    worst = std::max(worst, relative_frobenius(d.weights, ref));

    auto again = make_dbu_states(inst.channels, inst.pool);
    worst = std::max(worst, relative_frobenius(run_bcd(again, {ScheduleKind::gauss_seidel_loop, 1}, 1.0).weights.weights, ref));
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "max relative distance %.3e (< 1e-10)", worst);
  return {worst < 1e-10, buf};
}

Outcome monotone_descent() {
  int violations = 0;
  int updates = 0;
  double worst = 0.0;
  for (auto kind : {ScheduleKind::gauss_seidel_loop, ScheduleKind::symmetric_gauss_seidel}) {
    for (int i = 0; i < kOracleInstances; ++i) {
      const Instance inst = make_instance(oracle_scenario(1), derive_seed(2024, {static_cast<std::uint64_t>(i)}));
      auto dbus = make_dbu_states(inst.channels, inst.pool);
      const BcdRun run = run_bcd(dbus, {kind, 50}, 1.0);
      for (std::size_t t = 1; t < run.objectives.size(); ++t) {
        ++updates;
        const double rise = (run.objectives[t] - run.objectives[t - 1]) / run.objectives[t - 1];
        worst = std::max(worst, rise);
        violations += rise > 1e-12;
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d violations over %d block updates, largest relative rise %.3e", violations,
                updates, worst);
  return {violations == 0, buf};
}

Outcome traffic_formula() {
  bool ok = predicted_traffic(8, 192, 4) == 9664 && predicted_traffic(8, 192, 0) == 3264;
  int checked = 0;
  for (int k : {2, 4, 8}) {
    for (int n : {16, 40}) {
      for (int l : {1, 2, 4}) {
        std::vector<std::int64_t> reference_links;
        for (int m : {16, 32, 64}) {
          Scenario s = oracle_scenario(1);
          s.antennas = m;
          s.cluster_sizes.assign(4, m / 4);
          s.users = k;
          s.interferers = k;
          s.noise_samples = n;
          const Instance inst = make_instance(s, derive_seed(5, {static_cast<std::uint64_t>(checked)}));
          auto dbus = make_dbu_states(inst.channels, inst.pool);
          const BcdRun run = run_bcd(dbus, {ScheduleKind::gauss_seidel_loop, l}, 1.0);
          for (std::int64_t e : run.traffic.per_link(Phase::sweep))
            ok = ok && e == std::int64_t{l} * k * (n + k);
          const auto links = run.traffic.per_link();
          if (reference_links.empty()) reference_links = links;
          ok = ok && links == reference_links;
          ++checked;
        }
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "predicted(8,192,4)=%lld predicted(8,192,0)=%lld, %d metered runs over M in {16,32,64}",
                static_cast<long long>(predicted_traffic(8, 192, 4)),
                static_cast<long long>(predicted_traffic(8, 192, 0)), checked);
  return {ok, buf};
}

const ResultRow& find_row(const ResultTable& t, const std::string& name, int sweeps, double es_n0) {
  for (const auto& r : t)
    if (r.algorithm == name && r.sweeps == sweeps && r.es_n0_db == es_n0) return r;
  throw std::runtime_error("missing row " + name);
}

Outcome fast_convergence() {
  const auto start = Clock::now();
  ExperimentConfig c = ExperimentConfig::profile("desk");
  c.es_n0_grid = {10.0};
  c.iot_grid = {10.0};
  c.algorithms = parse_algorithms("mmse_sampleR,bdac,bcd:1,bcd:4", {});
  const ResultTable t = run_experiment(c);
  const ResultRow& mmse = find_row(t, "mmse_sampleR", 0, 10.0);
  const ResultRow& bdac = find_row(t, "bdac", 0, 10.0);
  const ResultRow& bcd1 = find_row(t, "bcd", 1, 10.0);
  const ResultRow& bcd4 = find_row(t, "bcd", 4, 10.0);
  const PairedDifference near = paired_ber_difference(bcd4, mmse, 1.5);
  const PairedDifference first = paired_ber_difference(bcd1, bdac);
  const double elapsed = seconds_since(start);
  const bool ok = mmse.stats.bits >= 200000 && near.mean <= 2 * near.standard_error &&
                  first.mean <= 2 * first.standard_error && elapsed < 120.0;
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "%lld bits; BER mmse %.4e bdac %.4e bcd1 %.4e bcd4 %.4e; bcd4-1.5*mmse %.2e (2SE %.2e); "
                "bcd1-bdac %.2e (2SE %.2e); %.1f s",
                static_cast<long long>(mmse.stats.bits), mmse.stats.ber(), bdac.stats.ber(), bcd1.stats.ber(),
                bcd4.stats.ber(), near.mean, 2 * near.standard_error, first.mean, 2 * first.standard_error, elapsed);
  return {ok, buf};
}

Outcome colored_noise_gap() {
  ExperimentConfig c = ExperimentConfig::profile("desk");
  c.iot_grid = {10.0};
  c.algorithms = parse_algorithms("mmse_sampleR,bdac", {});
  const ResultTable t = run_experiment(c);
  bool never_better = true;
  int run = 0, best_run = 0;
  std::ostringstream gaps;
  for (double es : c.es_n0_grid) {
    const PairedDifference d = paired_ber_difference(find_row(t, "bdac", 0, es), find_row(t, "mmse_sampleR", 0, es));
    never_better = never_better && d.mean >= -2 * d.standard_error;
    const bool gap = d.mean > 2 * d.standard_error;
    run = gap ? run + 1 : 0;
    best_run = std::max(best_run, run);
    gaps << (gap ? '+' : '.');
  }
  return {never_better && best_run >= 3,
          "strict gap per Es/N0 point [" + gaps.str() + "], longest run " + std::to_string(best_run) + " (>= 3)"};
}

Outcome estimator_consistency() {
  Scenario s = Scenario::desk();
  const int pools = 8;
  std::vector<double> x, y;
  for (int n : {1000, 10000, 100000}) {
    double err = 0.0;
    for (int p = 0; p < pools; ++p) {
      Rng rng(derive_seed(31, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(p)}));
      const ChannelSet ch = build_channel(s, rng);
      const PowerLevels pw = powers_from_ratios(s);
      const NoisePool pool = draw_noise_pool(ch, pw, n, rng);
      err += (sample_covariance(pool).full - exact_covariance(ch, pw).full).norm();
    }
    x.push_back(std::log10(static_cast<double>(n)));
    y.push_back(std::log10(err / pools));
  }
  const double mx = (x[0] + x[1] + x[2]) / 3.0;
  const double my = (y[0] + y[1] + y[2]) / 3.0;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 3; ++i) {
    sxy += (x[static_cast<std::size_t>(i)] - mx) * (y[static_cast<std::size_t>(i)] - my);
    sxx += (x[static_cast<std::size_t>(i)] - mx) * (x[static_cast<std::size_t>(i)] - mx);
  }
  const double slope = sxy / sxx;
  char buf[120];
  std::snprintf(buf, sizeof buf, "log-log slope %.4f (-0.5 +- 0.1)", slope);
  return {std::abs(slope + 0.5) <= 0.1, buf};
}

Outcome awgn_sanity() {
  const double es_n0_db = 6.0;
  Scenario s;
  s.antennas = 1;
  s.users = 1;
  s.cluster_sizes = {1};
  s.noise_samples = 1;
  s.interferers = 0;
  s.iot = -std::numeric_limits<double>::infinity();
  s.es_n0 = es_n0_db;
  s.constellation = 4;
  ChannelSet ch;
  ch.target = CMatrix::Ones(1, 1);
  ch.interference.resize(1, 0);
  ch.partition = Partition({1});
  Rng rng(derive_seed(8, {}));
  const ErrorStats stats = run_link(s, ch, CMatrix::Ones(1, 1), 500000, rng);

  const double es_n0 = std::pow(10.0, es_n0_db / 10.0);
  const double target = q_function(std::sqrt(2.0 * es_n0));
  const double se = std::sqrt(target * (1.0 - target) / static_cast<double>(stats.bits));
  const double per_axis = q_function(std::sqrt(es_n0));
  const double se_axis = std::sqrt(per_axis * (1.0 - per_axis) / static_cast<double>(stats.bits));
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "%lld bits at Es/N0 %.0f dB: BER %.5e vs Q(sqrt(2 Es/N0)) %.5e, |diff| %.1f SE (<= 3); "
                "Q(sqrt(Es/N0)) %.5e is %.1f SE away",
                static_cast<long long>(stats.bits), es_n0_db, stats.ber(), target,
                std::abs(stats.ber() - target) / se, per_axis, std::abs(stats.ber() - per_axis) / se_axis);
  return {stats.bits >= 1000000 && std::abs(stats.ber() - target) <= 3 * se, buf};
}

Outcome determinism() {
  ExperimentConfig c = ExperimentConfig::profile("desk");
  c.es_n0_grid = {0.0, 8.0, 16.0};
  c.trials = 6;
  const fs::path dir = fs::temp_directory_path() / "chaineq_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  emit_csv(run_experiment(c), dir / "first.csv");
  emit_csv(run_experiment(c), dir / "second.csv");
  const auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = read(dir / "first.csv");
  const std::string b = read(dir / "second.csv");
  fs::remove_all(dir);
  return {!a.empty() && a == b, std::to_string(a.size()) + " bytes, identical=" + (a == b ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 global-optimum equivalence", global_optimum},
      {"2 single-cluster exactness", single_cluster},
      {"3 monotone descent", monotone_descent},
      {"4 traffic formula", traffic_formula},
      {"5 fast convergence", fast_convergence},
      {"6 colored-noise gap", colored_noise_gap},
      {"7 estimator consistency", estimator_consistency},
      {"8 AWGN sanity", awgn_sanity},
      {"9 determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
