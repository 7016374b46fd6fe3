#pragma once

// Seeded Monte Carlo experiments over Es/N0 x IoT x equalizer, with CSV output.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "chaineq/daisy.hpp"
#include "chaineq/detect.hpp"
#include "chaineq/model.hpp"

namespace chaineq {

enum class Algorithm { zf, mmse_exact, mmse_sample, bdac, bcd };

struct AlgorithmSpec {
  Algorithm kind = Algorithm::bcd;
  int sweeps = 0;  // bcd only

  /// zf, mmse_exactR, mmse_sampleR, bdac, bcd.
  std::string name() const;
  friend bool operator==(const AlgorithmSpec&, const AlgorithmSpec&) = default;
};

/// Parses a comma list such as "zf,mmse_sampleR,bdac,bcd" or "bcd:1,bcd:4".
/// A bare "bcd" expands to one entry per value of `sweeps`.
std::vector<AlgorithmSpec> parse_algorithms(const std::string& list, const std::vector<int>& sweeps);

/// Raised with every offending field listed, "field: problem; field: problem".
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::desk();
  std::vector<double> es_n0_grid{0, 2, 4, 6, 8, 10, 12, 14, 16};
  std::vector<double> iot_grid{10};
  std::vector<AlgorithmSpec> algorithms = parse_algorithms("zf,mmse_exactR,mmse_sampleR,bdac,bcd", {1, 2, 3, 4});
  ScheduleKind schedule = ScheduleKind::gauss_seidel_loop;
  int trials = 50;
  int symbols_per_trial = 250;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = ".";
  bool unbiased = true;
  int trace_sweeps = 50;

  void validate() const;

  /// Profile defaults ("desk" or "paper") overlaid with the JSON document's keys.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::filesystem::path& path);
  static ExperimentConfig profile(const std::string& name);
};

struct ResultRow {
  std::string algorithm;
  int sweeps = 0;
  double es_n0_db = 0.0;
  double iot_db = 0.0;
  int antennas = 0;
  int clusters = 0;
  int users = 0;
  int samples = 0;
  ErrorStats stats;
  std::int64_t traffic_entries = 0;  // decentralized interconnect per coherence block; 0 for centralized
  double objective = 0.0;            // mean sample objective of the equalizer over trials

  // Not written to results.csv.
  double wall_seconds = 0.0;
  std::vector<ErrorStats> per_trial;

  friend bool operator==(const ResultRow& a, const ResultRow& b) {
    return a.algorithm == b.algorithm && a.sweeps == b.sweeps && a.es_n0_db == b.es_n0_db && a.iot_db == b.iot_db &&
           a.antennas == b.antennas && a.clusters == b.clusters && a.users == b.users && a.samples == b.samples &&
           a.stats == b.stats && a.traffic_entries == b.traffic_entries && a.objective == b.objective;
  }
};

using ResultTable = std::vector<ResultRow>;

/// Rows ordered by (iot, es_n0, algorithm list order). Deterministic for a given config.
ResultTable run_experiment(const ExperimentConfig& config);

/// Header plus one line per row; doubles written with 17 significant digits.
/// Throws std::invalid_argument on an empty table (no file is created) and
/// std::runtime_error naming the path on I/O failure.
void emit_csv(const ResultTable& table, const std::filesystem::path& path);
void write_csv(const ResultTable& table, std::ostream& out);
ResultTable parse_csv(const std::filesystem::path& path);

/// algorithm,sweeps,es_n0_db,iot_db,wall_seconds
void emit_timing_csv(const ResultTable& table, const std::filesystem::path& path);

/// Paired difference first - ratio * second over trials: mean and standard error of the per-trial BER.
struct PairedDifference {
  double mean = 0.0;
  double standard_error = 0.0;
};
PairedDifference paired_ber_difference(const ResultRow& first, const ResultRow& second, double ratio = 1.0);

struct TraceRow {
  int sweep;
  int block;
  double objective;
  double distance;           // ||W - W*||_F
  double relative_distance;  // ||W - W*||_F / ||W*||_F
};

/// Runs `schedule` and records one row per block update against the reference W*.
std::vector<TraceRow> emit_convergence_trace(std::vector<DbuState>& dbus, const Schedule& schedule,
                                             double symbol_energy, const CMatrix& reference);
void write_trace_csv(const std::vector<TraceRow>& rows, std::ostream& out);

/// Instance for trace/traffic commands: first grid point, trial 0 of `config`.
struct Instance {
  Scenario scenario;
  ChannelSet channels;
  NoisePool pool;
  Covariance sample;
};
Instance make_instance(const Scenario& scenario, std::uint64_t seed);

}  // namespace chaineq
