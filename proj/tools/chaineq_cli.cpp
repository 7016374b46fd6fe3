// chaineq: Monte Carlo driver for daisy-chain decentralized equalization.
//
//   chaineq run --config exp.json [--seed S] [--out DIR] [--algorithms LIST] [--sweeps L[,L...]] [--profile desk|paper]
//   chaineq trace --config exp.json [--out DIR] [--sweeps L]
//   chaineq traffic --K 8 --N 192 --L 4 [--M 128 --C 8] [--schedule NAME] [--out DIR]

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "chaineq/central.hpp"
#include "chaineq/daisy.hpp"
#include "chaineq/harness.hpp"
#include "chaineq/interconnect.hpp"

namespace fs = std::filesystem;
using namespace chaineq;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> profile;
};

ExperimentConfig load_config(const CommonOptions& o) {
  nlohmann::json doc = nlohmann::json::object();
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw ConfigError("config: cannot open " + o.config);
    try {
      doc = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config: " + o.config + ": " + e.what());
    }
  }
  if (o.profile) doc["profile"] = *o.profile;
  ExperimentConfig config = ExperimentConfig::from_json(doc);
  if (o.seed) config.seed = *o.seed;
  if (o.out) config.output_dir = *o.out;
  return config;
}

std::vector<int> parse_int_list(const std::string& list) {
  std::vector<int> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("sweeps: not an integer: '" + item + "'");
    }
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

int cmd_run(const CommonOptions& common, const std::optional<std::string>& algorithms,
            const std::optional<std::string>& sweeps) {
  ExperimentConfig config = load_config(common);
  if (algorithms || sweeps) {
    std::vector<int> l{1, 2, 3, 4};
    if (sweeps) l = parse_int_list(*sweeps);
    std::string list = "zf,mmse_exactR,mmse_sampleR,bdac,bcd";
    if (algorithms) list = *algorithms;
    config.algorithms = parse_algorithms(list, l);
  }
  const ResultTable table = run_experiment(config);
  fs::create_directories(config.output_dir);
  emit_csv(table, config.output_dir / "results.csv");
  emit_timing_csv(table, config.output_dir / "timing.csv");
  std::printf("%zu rows -> %s\n", table.size(), (config.output_dir / "results.csv").string().c_str());
  return 0;
}

int cmd_trace(const CommonOptions& common, std::optional<int> sweeps) {
  ExperimentConfig config = load_config(common);
  config.validate();
  Scenario s = config.scenario;
  s.es_n0 = config.es_n0_grid.front();
  s.iot = config.iot_grid.front();
  const Instance inst = make_instance(s, derive_seed(config.seed, {0, 0}));
  const CMatrix reference = mmse_centralized(inst.channels.target, inst.sample.full, s.symbol_energy).weights;
  auto dbus = make_dbu_states(inst.channels, inst.pool);
  const Schedule schedule{config.schedule, sweeps.value_or(config.trace_sweeps)};
  const auto rows = emit_convergence_trace(dbus, schedule, s.symbol_energy, reference);

  std::ostringstream ss;
  write_trace_csv(rows, ss);
  fs::create_directories(config.output_dir);
  write_text(config.output_dir / "trace.csv", ss.str());
  if (!rows.empty())
    std::printf("%zu updates, final relative distance %.3e -> %s\n", rows.size(), rows.back().relative_distance,
                (config.output_dir / "trace.csv").string().c_str());
  return 0;
}

int cmd_traffic(int k, int n, int l, int m, int c, const std::string& schedule_name, const std::string& out) {
  Scenario s = Scenario::desk();
  s.users = k;
  s.noise_samples = n;
  s.antennas = m;
  if (c < 1 || m % c != 0) throw ConfigError("C: must divide M");
  s.cluster_sizes.assign(static_cast<std::size_t>(c), m / c);
  s.interferers = k;
  s.validate();
  const ScheduleKind kind = schedule_from_string(schedule_name);

  const Instance inst = make_instance(s, s.seed);
  auto dbus = make_dbu_states(inst.channels, inst.pool);
  const BcdRun run = run_bcd(dbus, {kind, l}, s.symbol_energy);

  const std::int64_t kk = k;
  const std::int64_t nn = n;
  std::printf("predicted per interior link: %lld entries (preprocessing %lld + %d sweeps x %lld)\n",
              static_cast<long long>(predicted_traffic(kk, nn, l)),
              static_cast<long long>(3 * kk * kk + 2 * nn * kk), l, static_cast<long long>(kk * (kk + nn)));
  std::printf("%-8s %14s %14s %14s %14s\n", "link", "preprocessing", "sweep", "total", "bytes");
  const auto& links = run.traffic.topology().links();
  const auto pre = run.traffic.per_link(Phase::preprocessing);
  const auto sweep = run.traffic.per_link(Phase::sweep);
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::int64_t total = pre[i] + sweep[i];
    std::printf("%-8s %14lld %14lld %14lld %14lld\n", link_label(links[i]).c_str(), static_cast<long long>(pre[i]),
                static_cast<long long>(sweep[i]), static_cast<long long>(total),
                static_cast<long long>(total * kBytesPerEntry));
  }
  std::printf("metered total: %lld entries\n", static_cast<long long>(run.traffic.total()));

  std::ostringstream ss;
  run.traffic.write_csv(ss);
  fs::create_directories(out);
  write_text(fs::path(out) / "traffic.csv", ss.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized MMSE equalization on a daisy chain of baseband units"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  std::optional<std::string> algorithms;
  std::optional<std::string> sweeps;
  auto* run = app.add_subcommand("run", "Monte Carlo BER sweep, writes results.csv and timing.csv");
  run->add_option("--config", run_opts.config, "JSON experiment file");
  run->add_option("--seed", run_opts.seed, "Base seed");
  run->add_option("--out", run_opts.out, "Output directory");
  run->add_option("--algorithms", algorithms, "Comma list: zf,mmse_exactR,mmse_sampleR,bdac,bcd,bcd:L");
  run->add_option("--sweeps", sweeps, "BCD sweep counts for a bare 'bcd', comma list");
  run->add_option("--profile", run_opts.profile, "Base profile")->check(CLI::IsMember({"desk", "paper"}));

  CommonOptions trace_opts;
  std::optional<int> trace_sweeps;
  auto* trace = app.add_subcommand("trace", "Per-update convergence trace, writes trace.csv");
  trace->add_option("--config", trace_opts.config, "JSON experiment file");
  trace->add_option("--seed", trace_opts.seed, "Base seed");
  trace->add_option("--out", trace_opts.out, "Output directory");
  trace->add_option("--sweeps", trace_sweeps, "Number of sweeps")->check(CLI::NonNegativeNumber);
  trace->add_option("--profile", trace_opts.profile, "Base profile")->check(CLI::IsMember({"desk", "paper"}));

  int k = 8, n = 192, l = 4, m = 128, c = 8;
  std::string schedule = "gauss_seidel_loop";
  std::string traffic_out = ".";
  auto* traffic = app.add_subcommand("traffic", "Predicted vs metered interconnect traffic, writes traffic.csv");
  traffic->add_option("--K", k, "Users")->capture_default_str();
  traffic->add_option("--N", n, "Noise samples")->capture_default_str();
  traffic->add_option("--L", l, "Sweeps")->capture_default_str();
  traffic->add_option("--M", m, "Antennas")->capture_default_str();
  traffic->add_option("--C", c, "Clusters")->capture_default_str();
  traffic->add_option("--schedule", schedule, "gauss_seidel_loop, symmetric_gauss_seidel or jacobi_star")
      ->capture_default_str();
  traffic->add_option("--out", traffic_out, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opts, algorithms, sweeps);
    if (*trace) return cmd_trace(trace_opts, trace_sweeps);
    if (*traffic) return cmd_traffic(k, n, l, m, c, schedule, traffic_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "chaineq: %s\n", e.what());
    return 1;
  }
  return 0;
}
