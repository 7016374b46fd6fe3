#pragma once

// Decentralized equalizer computation over a chain of DBUs (decentralized
// baseband units): block-diagonal initialization followed by block
// coordinate descent sweeps on the sample MSE objective.
//
// Every DBU c owns H_c, its noise samples n_c^i, the local covariance R_cc
// and the equalizer block W_c. DBUs exchange only a ChainMessage carrying
//   A   = sum_j W_j H_j        (K x K)
//   b_i = sum_j W_j n_j^i      (K each, i = 1..N)
// so per-hop traffic is K^2 + N K entries regardless of the antenna count.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaineq/central.hpp"
#include "chaineq/interconnect.hpp"
#include "chaineq/model.hpp"

namespace chaineq {

enum class ScheduleKind { gauss_seidel_loop, symmetric_gauss_seidel, jacobi_star };

const char* to_string(ScheduleKind kind);
ScheduleKind schedule_from_string(const std::string& name);
TopologyKind topology_for(ScheduleKind kind);

struct Schedule {
  ScheduleKind kind = ScheduleKind::gauss_seidel_loop;
  int sweeps = 4;
  // Stop after a sweep whose relative objective change is below this; 0 disables.
  double early_stop = 0.0;
};

/// A message that does not belong to the receiving DBU's next update.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DbuState {
  int index = 0;
  CMatrix channel;     // H_c, M_c x K
  CMatrix noise;       // n_c^i as columns, M_c x N
  CMatrix covariance;  // R_cc, M_c x M_c
  CMatrix weights;     // W_c, K x M_c

  // W_c H_c and W_c n_c^i for the current W_c; the DBU's share of the message.
  CMatrix channel_image;
  CMatrix noise_image;

  Eigen::LLT<CMatrix> covariance_factor;  // R_cc
  Eigen::LLT<CMatrix> update_factor;      // E_s H_c H_c^H + R_cc, fixed across sweeps

  double loading = 0.0;  // diagonal loading added to R_cc, 0 when none was needed
  int last_sweep = 0;

  int antennas() const { return static_cast<int>(channel.rows()); }
  int users() const { return static_cast<int>(channel.cols()); }
  int samples() const { return static_cast<int>(noise.cols()); }
};

/// Splits channel and pool per cluster; R_cc is the local sample covariance.
std::vector<DbuState> make_dbu_states(const ChannelSet& channels, const NoisePool& pool);
/// As above but R_cc taken from the diagonal blocks of `local`.
std::vector<DbuState> make_dbu_states(const ChannelSet& channels, const NoisePool& pool, const Covariance& local);

struct ChainMessage {
  CMatrix a;  // K x K
  CMatrix b;  // K x N, column i is b_i
  int sweep = 0;
  int origin = 0;

  std::int64_t entries() const { return a.size() + b.size(); }
  std::int64_t bytes() const { return entries() * kBytesPerEntry; }

  /// Row-major A, then b_1..b_N, each entry as (re, im) 8-byte doubles.
  std::vector<double> serialize() const;
  static ChainMessage deserialize(const std::vector<double>& payload, int users, int samples, int sweep, int origin);
};

/// E_s ||A - I||_F^2 + (1/N) sum_i ||b_i||^2, the sample objective of the W the message describes.
double message_objective(const ChainMessage& message, double symbol_energy);

/// Block-diagonal MMSE W^0 computed with one accumulation and one distribution
/// circuit of the K x K coupling matrix. Sets every dbu.weights. Throws
/// SingularMatrixError naming the cluster if some R_cc is not positive definite;
/// an ill-conditioned R_cc receives diagonal loading 1e-10 trace / M_c instead.
EqualizerMatrix bdac_init(std::vector<DbuState>& dbus, double symbol_energy);

struct Preprocessed {
  EqualizerMatrix initial;
  ChainMessage totals;     // exact running sums, held by the reducing DBU
  ChainMessage head_copy;  // copy distributed to the first DBU; A rebuilt from the coupling matrix
  std::vector<std::string> warnings;
};

/// Full preprocessing: bdac_init, per-DBU update factorizations, accumulation
/// of A^0 / b^0 and distribution of the copies, metered on `traffic`.
Preprocessed preprocess(std::vector<DbuState>& dbus, double symbol_energy, TrafficLedger& traffic,
                        FlopLedger& flops);

/// One block minimization of DBU `dbu` given the running sums of the other blocks.
/// Updates dbu.weights and returns the forwarded message. Throws ProtocolError
/// if `incoming.sweep` is older than the DBU's last update or skips a sweep.
ChainMessage bcd_block_update(DbuState& dbu, const ChainMessage& incoming, double symbol_energy);

struct UpdateEvent {
  int sweep;
  int block;  // -1 for a synchronous Jacobi sweep
  double objective;
  const std::vector<DbuState>& dbus;
};

using UpdateObserver = std::function<void(const UpdateEvent&)>;

struct BcdRun {
  EqualizerMatrix initial;
  EqualizerMatrix weights;
  // Sample objective after preprocessing, then after every block update
  // (after every sweep for jacobi_star).
  std::vector<double> objectives;
  TrafficLedger traffic;
  FlopLedger flops;
  int sweeps_run = 0;
  ChainMessage final_message;
  std::vector<std::string> warnings;
};

/// Preprocessing plus `schedule.sweeps` sweeps. Sweeps = 0 returns the BDAC initializer.
BcdRun run_bcd(std::vector<DbuState>& dbus, const Schedule& schedule, double symbol_energy,
               const UpdateObserver& observer = {});

/// Concatenates the current W_c blocks.
EqualizerMatrix assemble(const std::vector<DbuState>& dbus, std::string label);

struct AuditReport {
  double a_deviation = 0.0;  // max |entry| of carried A minus recomputed
  double b_deviation = 0.0;
  double max_deviation() const { return std::max(a_deviation, b_deviation); }
};

/// Recomputes sum_j W_j H_j and sum_j W_j n_j^i from scratch and compares.
AuditReport consistency_audit(const std::vector<DbuState>& dbus, const ChainMessage& message);

}  // namespace chaineq
