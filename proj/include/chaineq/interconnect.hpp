#pragma once

// DBU topologies, per-link traffic metering and operation counting.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "chaineq/model.hpp"

namespace chaineq {

enum class TopologyKind { uni_loop, bi_chain, star };

const char* to_string(TopologyKind kind);

struct Link {
  int from = 0;
  int to = 0;
  bool bidirectional = false;

  bool connects(int a, int b) const {
    return (from == a && to == b) || (bidirectional && from == b && to == a);
  }
};

/// uni_loop: c -> c+1 plus C-1 -> 0 (C links). bi_chain: c <-> c+1 (C-1 links).
/// star: hub 0 <-> c (C-1 spokes). DBUs are indexed from 0.
class Topology {
 public:
  Topology(TopologyKind kind, int nodes);

  TopologyKind kind() const { return kind_; }
  int nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }

  /// Index of the link carrying a -> b. Throws std::out_of_range for an unknown link.
  int find(int from, int to) const;

 private:
  TopologyKind kind_;
  int nodes_;
  std::vector<Link> links_;
};

enum class Phase { preprocessing, sweep };

const char* to_string(Phase phase);

/// Complex entries per payload; bytes are 16 per entry (two 8-byte floats).
inline constexpr std::int64_t kBytesPerEntry = 16;

class TrafficLedger {
 public:
  struct Record {
    Phase phase;
    std::string circuit;
    int link;
    std::int64_t entries;
  };

  explicit TrafficLedger(Topology topology);

  const Topology& topology() const { return topology_; }

  /// Subsequent meter() calls are attributed to this phase and circuit.
  void begin(Phase phase, std::string circuit);
  void meter(int from, int to, std::int64_t payload_entries);

  std::int64_t total() const;
  std::int64_t total(Phase phase) const;
  std::vector<std::int64_t> per_link(Phase phase) const;
  std::vector<std::int64_t> per_link() const;
  /// Per-link entries of one named circuit.
  std::vector<std::int64_t> per_link(const std::string& circuit) const;

  /// (phase, circuit, link) aggregates in first-seen order.
  const std::vector<Record>& records() const { return records_; }

  /// Sums another ledger over the same topology.
  TrafficLedger& operator+=(const TrafficLedger& other);

  /// CSV header `phase,circuit,link,entries,bytes`; links printed 1-based as "a->b" or "a<->b".
  void write_csv(std::ostream& out) const;

 private:
  Topology topology_;
  Phase phase_ = Phase::preprocessing;
  std::string circuit_;
  std::vector<Record> records_;
};

std::string link_label(const Link& link);

/// Per-adjacent-link entries of a full run: (3K^2 + 2NK) + L K (N + K).
std::int64_t predicted_traffic(std::int64_t users, std::int64_t samples, std::int64_t sweeps);

/// Complex multiply-accumulates, split into dense products/solves and factorizations.
struct FlopCounts {
  std::int64_t multiply_accumulates = 0;
  std::int64_t factorization = 0;

  std::int64_t total() const { return multiply_accumulates + factorization; }
  FlopCounts& operator+=(const FlopCounts& other) {
    multiply_accumulates += other.multiply_accumulates;
    factorization += other.factorization;
    return *this;
  }
  friend bool operator==(const FlopCounts&, const FlopCounts&) = default;
};

namespace cost {
inline std::int64_t product(std::int64_t m, std::int64_t k, std::int64_t n) { return m * k * n; }
/// Textbook Cholesky: sum_j j (n - j) = (n^3 - n) / 6.
inline std::int64_t cholesky(std::int64_t n) { return (n * n * n - n) / 6; }
/// Forward plus backward substitution for `rhs` right-hand sides.
inline std::int64_t cholesky_solve(std::int64_t n, std::int64_t rhs) { return n * n * rhs; }
}  // namespace cost

struct FlopLedger {
  FlopCounts bdac;           // local covariances, Gram accumulation, W^0
  FlopCounts preprocessing;  // sweep factorizations and the A^0 / b^0 terms
  FlopCounts sweeps;         // all block updates
  int sweep_count = 0;

  FlopCounts per_sweep() const;
  friend bool operator==(const FlopLedger&, const FlopLedger&) = default;
};

struct FlopReport {
  FlopLedger decentralized;
  FlopCounts centralized;  // sample covariance + mmse_centralized
  // Dominant-term expressions evaluated at the scenario (M_c = largest cluster).
  double init_order = 0.0;         // M K^2 + N M M_c
  double iteration_order = 0.0;    // N M K + M M_c K
  double centralized_order = 0.0;  // M^3 + N M^2
};

/// Counts the operations `run_bcd` and `mmse_centralized` execute for this scenario.
FlopReport flop_report(const Scenario& scenario, int sweeps, TopologyKind topology = TopologyKind::uni_loop);

}  // namespace chaineq
