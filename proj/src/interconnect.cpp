#include "chaineq/interconnect.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace chaineq {

const char* to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::uni_loop: return "uni_loop";
    case TopologyKind::bi_chain: return "bi_chain";
    case TopologyKind::star: return "star";
  }
  return "?";
}

const char* to_string(Phase phase) { return phase == Phase::preprocessing ? "preprocessing" : "sweep"; }

Topology::Topology(TopologyKind kind, int nodes) : kind_(kind), nodes_(nodes) {
  if (nodes < 1) throw std::invalid_argument("Topology: needs at least one DBU");
  switch (kind) {
    case TopologyKind::uni_loop:
      for (int c = 0; c < nodes; ++c) links_.push_back({c, (c + 1) % nodes, false});
      break;
    case TopologyKind::bi_chain:
      for (int c = 0; c + 1 < nodes; ++c) links_.push_back({c, c + 1, true});
      break;
    case TopologyKind::star:
      for (int c = 1; c < nodes; ++c) links_.push_back({0, c, true});
      break;
  }
}

int Topology::find(int from, int to) const {
  for (std::size_t i = 0; i < links_.size(); ++i)
    if (links_[i].connects(from, to)) return static_cast<int>(i);
  throw std::out_of_range("no link " + std::to_string(from + 1) + "->" + std::to_string(to + 1) + " in " +
                          to_string(kind_) + " topology");
}

std::string link_label(const Link& link) {
  return std::to_string(link.from + 1) + (link.bidirectional ? "<->" : "->") + std::to_string(link.to + 1);
}

TrafficLedger::TrafficLedger(Topology topology) : topology_(std::move(topology)) {}

void TrafficLedger::begin(Phase phase, std::string circuit) {
  phase_ = phase;
  circuit_ = std::move(circuit);
}

void TrafficLedger::meter(int from, int to, std::int64_t payload_entries) {
  const int link = topology_.find(from, to);
  for (auto& r : records_) {
    if (r.phase == phase_ && r.link == link && r.circuit == circuit_) {
      r.entries += payload_entries;
      return;
    }
  }
  records_.push_back({phase_, circuit_, link, payload_entries});
}

std::int64_t TrafficLedger::total() const {
  std::int64_t sum = 0;
  for (const auto& r : records_) sum += r.entries;
  return sum;
}

std::int64_t TrafficLedger::total(Phase phase) const {
  std::int64_t sum = 0;
  for (const auto& r : records_)
    if (r.phase == phase) sum += r.entries;
  return sum;
}

std::vector<std::int64_t> TrafficLedger::per_link(Phase phase) const {
  std::vector<std::int64_t> out(topology_.links().size(), 0);
  for (const auto& r : records_)
    if (r.phase == phase) out[static_cast<std::size_t>(r.link)] += r.entries;
  return out;
}

std::vector<std::int64_t> TrafficLedger::per_link() const {
  std::vector<std::int64_t> out(topology_.links().size(), 0);
  for (const auto& r : records_) out[static_cast<std::size_t>(r.link)] += r.entries;
  return out;
}

std::vector<std::int64_t> TrafficLedger::per_link(const std::string& circuit) const {
  std::vector<std::int64_t> out(topology_.links().size(), 0);
  for (const auto& r : records_)
    if (r.circuit == circuit) out[static_cast<std::size_t>(r.link)] += r.entries;
  return out;
}

TrafficLedger& TrafficLedger::operator+=(const TrafficLedger& other) {
  if (other.topology_.kind() != topology_.kind() || other.topology_.nodes() != topology_.nodes())
    throw std::invalid_argument("TrafficLedger: cannot merge ledgers of different topologies");
  const Phase saved_phase = phase_;
  const std::string saved_circuit = circuit_;
  for (const auto& r : other.records_) {
    phase_ = r.phase;
    circuit_ = r.circuit;
    const Link& l = topology_.links()[static_cast<std::size_t>(r.link)];
    meter(l.from, l.to, r.entries);
  }
  phase_ = saved_phase;
  circuit_ = saved_circuit;
  return *this;
}

void TrafficLedger::write_csv(std::ostream& out) const {
  out << "phase,circuit,link,entries,bytes\n";
  for (const auto& r : records_) {
    out << to_string(r.phase) << ',' << r.circuit << ',' << link_label(topology_.links()[static_cast<std::size_t>(r.link)])
        << ',' << r.entries << ',' << r.entries * kBytesPerEntry << '\n';
  }
}

std::int64_t predicted_traffic(std::int64_t users, std::int64_t samples, std::int64_t sweeps) {
  const std::int64_t k = users;
  return (3 * k * k + 2 * samples * k) + sweeps * k * (samples + k);
}

FlopCounts FlopLedger::per_sweep() const {
  if (sweep_count == 0) return {};
  return {sweeps.multiply_accumulates / sweep_count, sweeps.factorization / sweep_count};
}

FlopReport flop_report(const Scenario& scenario, int sweeps, TopologyKind topology) {
  const std::int64_t k = scenario.users;
  const std::int64_t n = scenario.noise_samples;
  const std::int64_t m_total = scenario.antennas;

  FlopReport report;
  FlopLedger& d = report.decentralized;
  for (int mc : scenario.cluster_sizes) {
    const std::int64_t m = mc;
    d.bdac.multiply_accumulates += m * (m + 1) / 2 * n          // local sample covariance
                                   + cost::cholesky_solve(m, k)  // R_cc^-1 H_c
                                   + cost::product(k, m, k)      // Gram term
                                   + cost::cholesky_solve(k, m);  // W_c^0
    d.bdac.factorization += cost::cholesky(m) + cost::cholesky(k);

    d.preprocessing.multiply_accumulates += cost::product(m, k, m) + cost::product(k, m, k) + cost::product(k, m, n);
    d.preprocessing.factorization += cost::cholesky(m);
  }
  d.preprocessing.multiply_accumulates += cost::cholesky_solve(k, k);  // head copy of A^0

  std::int64_t per_sweep = 0;
  const auto update_cost = [&](std::int64_t m) {
    return 2 * cost::product(k, k, m) + 2 * cost::product(k, n, m) + cost::cholesky_solve(m, k);
  };
  if (topology == TopologyKind::bi_chain) {  // forward over all blocks, backward over C-1
    const auto& sizes = scenario.cluster_sizes;
    for (std::size_t c = 0; c < sizes.size(); ++c) per_sweep += update_cost(sizes[c]);
    for (std::size_t c = 0; c + 1 < sizes.size(); ++c) per_sweep += update_cost(sizes[c]);
  } else {
    for (int mc : scenario.cluster_sizes) per_sweep += update_cost(mc);
  }
  d.sweeps.multiply_accumulates = per_sweep * sweeps;
  d.sweep_count = sweeps;

  report.centralized.multiply_accumulates = m_total * (m_total + 1) / 2 * n + cost::cholesky_solve(m_total, k) +
                                            cost::product(k, m_total, k) + cost::cholesky_solve(k, m_total);
  report.centralized.factorization = cost::cholesky(m_total) + cost::cholesky(k);

  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m_total);
  const double mc = static_cast<double>(scenario.partition().max_size());
  report.init_order = md * kd * kd + nd * md * mc;
  report.iteration_order = nd * md * kd + md * mc * kd;
  report.centralized_order = md * md * md + nd * md * md;
  return report;
}

}  // namespace chaineq
