#include "chaineq/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <optional>
#include <sstream>

#include "chaineq/central.hpp"

namespace chaineq {

std::string AlgorithmSpec::name() const {
  switch (kind) {
    case Algorithm::zf: return "zf";
    case Algorithm::mmse_exact: return "mmse_exactR";
    case Algorithm::mmse_sample: return "mmse_sampleR";
    case Algorithm::bdac: return "bdac";
    case Algorithm::bcd: return "bcd";
  }
  return "?";
}

std::vector<AlgorithmSpec> parse_algorithms(const std::string& list, const std::vector<int>& sweeps) {
  std::vector<AlgorithmSpec> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    if (item == "zf") {
      out.push_back({Algorithm::zf, 0});
    } else if (item == "mmse_exactR") {
      out.push_back({Algorithm::mmse_exact, 0});
    } else if (item == "mmse_sampleR") {
      out.push_back({Algorithm::mmse_sample, 0});
    } else if (item == "bdac") {
      out.push_back({Algorithm::bdac, 0});
    } else if (item == "bcd") {
      for (int l : sweeps) out.push_back({Algorithm::bcd, l});
    } else if (item.rfind("bcd:", 0) == 0) {
      std::size_t used = 0;
      const std::string count = item.substr(4);
      int l = -1;
      try {
        l = std::stoi(count, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != count.size()) throw ConfigError("algorithms: bad sweep count in '" + item + "'");
      out.push_back({Algorithm::bcd, l});
    } else {
      throw ConfigError("algorithms: unknown algorithm '" + item + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

double ratio_from_json(const nlohmann::json& v, const char* field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ConfigError(std::string(field) + ": expected a number or \"-inf\"");
}

std::vector<double> grid_from_json(const nlohmann::json& v, const char* field) {
  std::vector<double> out;
  if (!v.is_array()) throw ConfigError(std::string(field) + ": expected an array");
  for (const auto& e : v) out.push_back(ratio_from_json(e, field));
  return out;
}

template <typename T>
T get_field(const nlohmann::json& v, const char* field) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(field) + ": wrong type");
  }
}

void apply_scenario(Scenario& s, const nlohmann::json& doc) {
  std::optional<int> clusters;
  bool explicit_sizes = false;
  for (const auto& [key, value] : doc.items()) {
    if (key == "antennas") s.antennas = get_field<int>(value, "scenario.antennas");
    else if (key == "users") s.users = get_field<int>(value, "scenario.users");
    else if (key == "clusters") clusters = get_field<int>(value, "scenario.clusters");
    else if (key == "cluster_sizes") {
      s.cluster_sizes = get_field<std::vector<int>>(value, "scenario.cluster_sizes");
      explicit_sizes = true;
    } else if (key == "noise_samples") s.noise_samples = get_field<int>(value, "scenario.noise_samples");
    else if (key == "interferers") s.interferers = get_field<int>(value, "scenario.interferers");
    else if (key == "symbol_energy") s.symbol_energy = get_field<double>(value, "scenario.symbol_energy");
    else if (key == "constellation") s.constellation = get_field<int>(value, "scenario.constellation");
    else if (key == "coherence_symbols") s.coherence_symbols = get_field<int>(value, "scenario.coherence_symbols");
    else if (key == "ratio_units") {
      const auto units = get_field<std::string>(value, "scenario.ratio_units");
      if (units == "db") s.ratio_units = RatioUnits::decibel;
      else if (units == "linear") s.ratio_units = RatioUnits::linear;
      else throw ConfigError("scenario.ratio_units: expected \"db\" or \"linear\"");
    } else if (key == "gain_range_db") {
      const auto range = get_field<std::vector<double>>(value, "scenario.gain_range_db");
      if (range.size() != 2) throw ConfigError("scenario.gain_range_db: expected [lo, hi]");
      s.gain_lo_db = range[0];
      s.gain_hi_db = range[1];
    } else {
      throw ConfigError("scenario." + key + ": unknown key");
    }
  }
  if (!explicit_sizes) {
    const int c = clusters.value_or(s.clusters());
    if (c < 1 || s.antennas % c != 0) throw ConfigError("scenario.clusters: must divide scenario.antennas");
    s.cluster_sizes.assign(static_cast<std::size_t>(c), s.antennas / c);
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::profile(const std::string& name) {
  ExperimentConfig c;
  if (name == "desk") return c;
  if (name == "paper") {
    c.scenario = Scenario::paper();
    c.trials = 20;
    c.symbols_per_trial = 500;
    return c;
  }
  throw ConfigError("profile: expected \"desk\" or \"paper\", got \"" + name + "\"");
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  ExperimentConfig c = profile(doc.contains("profile") ? get_field<std::string>(doc["profile"], "profile") : "desk");
  std::optional<std::vector<int>> sweeps;
  std::optional<std::string> algorithms;
  for (const auto& [key, value] : doc.items()) {
    if (key == "profile") continue;
    if (key == "scenario") apply_scenario(c.scenario, value);
    else if (key == "es_n0") c.es_n0_grid = grid_from_json(value, "es_n0");
    else if (key == "iot") c.iot_grid = grid_from_json(value, "iot");
    else if (key == "sweeps") sweeps = get_field<std::vector<int>>(value, "sweeps");
    else if (key == "algorithms") {
      if (value.is_array()) {
        std::string joined;
        for (const auto& a : value) joined += get_field<std::string>(a, "algorithms") + ",";
        algorithms = joined;
      } else {
        algorithms = get_field<std::string>(value, "algorithms");
      }
    } else if (key == "schedule") c.schedule = schedule_from_string(get_field<std::string>(value, "schedule"));
    else if (key == "trials") c.trials = get_field<int>(value, "trials");
    else if (key == "symbols_per_trial") c.symbols_per_trial = get_field<int>(value, "symbols_per_trial");
    else if (key == "seed") c.seed = get_field<std::uint64_t>(value, "seed");
    else if (key == "output_dir") c.output_dir = get_field<std::string>(value, "output_dir");
    else if (key == "unbiased") c.unbiased = get_field<bool>(value, "unbiased");
    else if (key == "trace_sweeps") c.trace_sweeps = get_field<int>(value, "trace_sweeps");
    else throw ConfigError(key + ": unknown key");
  }
  if (algorithms || sweeps)
    c.algorithms = parse_algorithms(algorithms.value_or("zf,mmse_exactR,mmse_sampleR,bdac,bcd"),
                                    sweeps.value_or(std::vector<int>{1, 2, 3, 4}));
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

void ExperimentConfig::validate() const {
  std::vector<std::string> problems;
  if (es_n0_grid.empty()) problems.emplace_back("es_n0: grid is empty");
  if (iot_grid.empty()) problems.emplace_back("iot: grid is empty");
  if (algorithms.empty()) problems.emplace_back("algorithms: none selected");
  for (const auto& a : algorithms)
    if (a.kind == Algorithm::bcd && a.sweeps < 0) problems.emplace_back("sweeps: must be >= 0");
  if (trials < 1) problems.emplace_back("trials: must be >= 1");
  if (symbols_per_trial < 1) problems.emplace_back("symbols_per_trial: must be >= 1");
  if (trace_sweeps < 0) problems.emplace_back("trace_sweeps: must be >= 0");
  try {
    // The template's own ratios are placeholders; the grid supplies them.
    Scenario s = scenario;
    if (!es_n0_grid.empty()) s.es_n0 = es_n0_grid.front();
    if (!iot_grid.empty()) s.iot = iot_grid.front();
    s.validate();
  } catch (const std::invalid_argument& e) {
    problems.emplace_back(std::string("scenario.") + e.what());
  }
  for (double es : es_n0_grid) {
    for (double iot : iot_grid) {
      Scenario s = scenario;
      s.es_n0 = es;
      s.iot = iot;
      try {
        powers_from_ratios(s);
      } catch (const std::invalid_argument& e) {
        problems.emplace_back(e.what());
      }
    }
  }
  if (problems.empty()) return;
  std::string msg;
  for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
  throw ConfigError(msg);
}

// ---------------------------------------------------------------------------
// Experiment

Instance make_instance(const Scenario& scenario, std::uint64_t seed) {
  Rng rng(seed);
  Instance inst{scenario, build_channel(scenario, rng), {}, {}};
  inst.pool = draw_noise_pool(inst.channels, scenario, rng);
  inst.sample = sample_covariance(inst.pool);
  return inst;
}

namespace {

struct AlgorithmOutcome {
  ErrorStats stats;
  double objective = 0.0;
  std::int64_t traffic = 0;
  double seconds = 0.0;
};

double to_db(double value, RatioUnits units) {
  return units == RatioUnits::decibel ? value : 10.0 * std::log10(value);
}

std::int64_t bdac_traffic(const TrafficLedger& ledger) {
  std::int64_t sum = 0;
  for (const char* circuit : {"bdac_gram_accumulate", "bdac_gram_distribute"})
    for (std::int64_t e : ledger.per_link(circuit)) sum += e;
  return sum;
}

std::vector<AlgorithmOutcome> run_trial(const ExperimentConfig& config, const Scenario& scenario,
                                        const Constellation& constellation, std::uint64_t point, std::uint64_t trial) {
  using clock = std::chrono::steady_clock;
  Rng rng(derive_seed(config.seed, {point, trial}));
  const ChannelSet channels = build_channel(scenario, rng);
  const PowerLevels powers = powers_from_ratios(scenario);
  const NoisePool pool = draw_noise_pool(channels, powers, scenario.noise_samples, rng);
  const LinkBatch batch = generate_link_batch(scenario, channels, constellation, config.symbols_per_trial, rng);
  const double es = scenario.symbol_energy;

  std::optional<Covariance> sample;
  std::vector<AlgorithmOutcome> out;
  for (const auto& algorithm : config.algorithms) {
    AlgorithmOutcome o;
    const auto start = clock::now();
    CMatrix w;
    switch (algorithm.kind) {
      case Algorithm::zf:
        w = zf_centralized(channels.target).weights;
        break;
      case Algorithm::mmse_exact:
        w = mmse_centralized(channels.target, exact_covariance(channels, powers).full, es).weights;
        break;
      case Algorithm::mmse_sample:
        if (!sample) sample = sample_covariance(pool);
        w = mmse_centralized(channels.target, sample->full, es).weights;
        break;
      case Algorithm::bdac: {
        auto dbus = make_dbu_states(channels, pool);
        BcdRun run = run_bcd(dbus, {config.schedule, 0}, es);
        w = run.initial.weights;
        o.traffic = bdac_traffic(run.traffic);
        break;
      }
      case Algorithm::bcd: {
        auto dbus = make_dbu_states(channels, pool);
        BcdRun run = run_bcd(dbus, {config.schedule, algorithm.sweeps}, es);
        w = run.weights.weights;
        o.traffic = run.traffic.total();
        break;
      }
    }
    o.seconds = std::chrono::duration<double>(clock::now() - start).count();
    o.stats = evaluate_link(batch, w, channels.target, es, constellation, {config.unbiased});
    o.objective = sample_objective(w, channels.target, pool.samples, es);
    out.push_back(o);
  }
  return out;
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& config) {
  config.validate();
  const Constellation constellation(config.scenario.constellation);
  const std::size_t n_alg = config.algorithms.size();
  ResultTable table;

  std::uint64_t point = 0;
  for (double iot : config.iot_grid) {
    for (double es_n0 : config.es_n0_grid) {
      Scenario s = config.scenario;
      s.es_n0 = es_n0;
      s.iot = iot;

      std::vector<std::vector<AlgorithmOutcome>> trials(static_cast<std::size_t>(config.trials));
      std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
      for (int t = 0; t < config.trials; ++t) {
        try {
          trials[static_cast<std::size_t>(t)] = run_trial(config, s, constellation, point, static_cast<std::uint64_t>(t));
        } catch (...) {
#pragma omp critical
          if (!failure) failure = std::current_exception();
        }
      }
      if (failure) std::rethrow_exception(failure);

      for (std::size_t a = 0; a < n_alg; ++a) {
        ResultRow row;
        row.algorithm = config.algorithms[a].name();
        row.sweeps = config.algorithms[a].sweeps;
        row.es_n0_db = to_db(es_n0, s.ratio_units);
        row.iot_db = to_db(iot, s.ratio_units);
        row.antennas = s.antennas;
        row.clusters = s.clusters();
        row.users = s.users;
        row.samples = s.noise_samples;
        double objective_sum = 0.0;
        for (const auto& trial : trials) {
          const AlgorithmOutcome& o = trial[a];
          row.stats += o.stats;
          row.per_trial.push_back(o.stats);
          objective_sum += o.objective;
          row.wall_seconds += o.seconds;
        }
        row.traffic_entries = trials.front()[a].traffic;
        row.objective = objective_sum / static_cast<double>(config.trials);
        table.push_back(std::move(row));
      }
      ++point;
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

constexpr const char* kResultsHeader =
    "algorithm,sweeps,es_n0_db,iot_db,M,C,K,N,ber,ser,bit_errors,bits,symbol_errors,symbols,traffic_entries,objective";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::runtime_error("csv: not a number: '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s) {
  std::size_t used = 0;
  const long long v = std::stoll(s, &used);
  if (used != s.size()) throw std::runtime_error("csv: not an integer: '" + s + "'");
  return v;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

void write_csv(const ResultTable& table, std::ostream& out) {
  out << kResultsHeader << '\n';
  for (const auto& r : table) {
    out << r.algorithm << ',' << r.sweeps << ',' << fmt_double(r.es_n0_db) << ',' << fmt_double(r.iot_db) << ','
        << r.antennas << ',' << r.clusters << ',' << r.users << ',' << r.samples << ',' << fmt_double(r.stats.ber())
        << ',' << fmt_double(r.stats.ser()) << ',' << r.stats.bit_errors << ',' << r.stats.bits << ','
        << r.stats.symbol_errors << ',' << r.stats.symbols << ',' << r.traffic_entries << ','
        << fmt_double(r.objective) << '\n';
  }
}

void emit_csv(const ResultTable& table, const std::filesystem::path& path) {
  if (table.empty()) throw std::invalid_argument("emit_csv: empty result table, nothing written to " + path.string());
  std::ostringstream ss;
  write_csv(table, ss);
  write_file(path, ss.str());
}

ResultTable parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader)
    throw std::runtime_error(path.string() + ": unexpected header");
  ResultTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 16) throw std::runtime_error(path.string() + ": expected 16 columns");
    ResultRow r;
    r.algorithm = cells[0];
    r.sweeps = static_cast<int>(parse_int(cells[1]));
    r.es_n0_db = parse_double(cells[2]);
    r.iot_db = parse_double(cells[3]);
    r.antennas = static_cast<int>(parse_int(cells[4]));
    r.clusters = static_cast<int>(parse_int(cells[5]));
    r.users = static_cast<int>(parse_int(cells[6]));
    r.samples = static_cast<int>(parse_int(cells[7]));
    r.stats.bit_errors = parse_int(cells[10]);
    r.stats.bits = parse_int(cells[11]);
    r.stats.symbol_errors = parse_int(cells[12]);
    r.stats.symbols = parse_int(cells[13]);
    r.traffic_entries = parse_int(cells[14]);
    r.objective = parse_double(cells[15]);
    table.push_back(std::move(r));
  }
  return table;
}

void emit_timing_csv(const ResultTable& table, const std::filesystem::path& path) {
  std::ostringstream ss;
  ss << "algorithm,sweeps,es_n0_db,iot_db,wall_seconds\n";
  for (const auto& r : table)
    ss << r.algorithm << ',' << r.sweeps << ',' << fmt_double(r.es_n0_db) << ',' << fmt_double(r.iot_db) << ','
       << fmt_double(r.wall_seconds) << '\n';
  write_file(path, ss.str());
}

PairedDifference paired_ber_difference(const ResultRow& first, const ResultRow& second, double ratio) {
  const std::size_t t = first.per_trial.size();
  if (t == 0 || t != second.per_trial.size())
    throw std::invalid_argument("paired_ber_difference: rows need the same nonzero trial count");
  std::vector<double> d(t);
  for (std::size_t i = 0; i < t; ++i) d[i] = first.per_trial[i].ber() - ratio * second.per_trial[i].ber();
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(t);
  double var = 0.0;
  for (double v : d) var += (v - mean) * (v - mean);
  var = t > 1 ? var / static_cast<double>(t - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(t))};
}

// ---------------------------------------------------------------------------
// Convergence trace

std::vector<TraceRow> emit_convergence_trace(std::vector<DbuState>& dbus, const Schedule& schedule,
                                             double symbol_energy, const CMatrix& reference) {
  std::vector<int> sizes;
  for (const auto& d : dbus) sizes.push_back(d.antennas());
  const Partition partition(sizes);
  CMatrix channel(partition.total(), dbus.front().users());
  CMatrix noise(partition.total(), dbus.front().samples());
  for (std::size_t c = 0; c < dbus.size(); ++c) {
    channel.middleRows(partition.offset(static_cast<int>(c)), sizes[c]) = dbus[c].channel;
    noise.middleRows(partition.offset(static_cast<int>(c)), sizes[c]) = dbus[c].noise;
  }
  const double ref_norm = reference.norm();

  std::vector<TraceRow> rows;
  run_bcd(dbus, schedule, symbol_energy, [&](const UpdateEvent& e) {
    const CMatrix w = assemble(e.dbus, "bcd").weights;
    const double distance = (w - reference).norm();
    rows.push_back({e.sweep, e.block, sample_objective(w, channel, noise, symbol_energy), distance,
                    ref_norm > 0.0 ? distance / ref_norm : distance});
  });
  return rows;
}

void write_trace_csv(const std::vector<TraceRow>& rows, std::ostream& out) {
  out << "sweep,block,objective,distance,relative_distance\n";
  for (const auto& r : rows)
    out << r.sweep << ',' << (r.block < 0 ? std::string("all") : std::to_string(r.block + 1)) << ','
        << fmt_double(r.objective) << ',' << fmt_double(r.distance) << ',' << fmt_double(r.relative_distance) << '\n';
}

}  // namespace chaineq
