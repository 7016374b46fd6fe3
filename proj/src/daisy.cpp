#include "chaineq/daisy.hpp"

#include <cmath>
#include <exception>
#include <sstream>
#include <utility>

#include "chaineq/kernels.hpp"

namespace chaineq {

const char* to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::gauss_seidel_loop: return "gauss_seidel_loop";
    case ScheduleKind::symmetric_gauss_seidel: return "symmetric_gauss_seidel";
    case ScheduleKind::jacobi_star: return "jacobi_star";
  }
  return "?";
}

ScheduleKind schedule_from_string(const std::string& name) {
  if (name == "gauss_seidel_loop") return ScheduleKind::gauss_seidel_loop;
  if (name == "symmetric_gauss_seidel") return ScheduleKind::symmetric_gauss_seidel;
  if (name == "jacobi_star") return ScheduleKind::jacobi_star;
  throw std::invalid_argument("schedule: unknown schedule '" + name + "'");
}

TopologyKind topology_for(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::gauss_seidel_loop: return TopologyKind::uni_loop;
    case ScheduleKind::symmetric_gauss_seidel: return TopologyKind::bi_chain;
    case ScheduleKind::jacobi_star: return TopologyKind::star;
  }
  return TopologyKind::uni_loop;
}

namespace {

std::string cluster_name(int index) { return "cluster " + std::to_string(index + 1); }

DbuState make_state(int c, const ChannelSet& channels, const NoisePool& pool) {
  DbuState s;
  s.index = c;
  s.channel = channels.block(c);
  s.noise = pool.block(c);
  const int k = static_cast<int>(channels.target.cols());
  s.weights = CMatrix::Zero(k, s.channel.rows());
  s.channel_image = CMatrix::Zero(k, k);
  s.noise_image = CMatrix::Zero(k, s.noise.cols());
  return s;
}

void check_partitions(const ChannelSet& channels, const NoisePool& pool) {
  if (channels.partition.sizes() != pool.partition.sizes())
    throw std::invalid_argument("make_dbu_states: channel and noise pool partitions differ");
  if (pool.size() == 0) throw std::invalid_argument("make_dbu_states: empty noise pool");
}

// Order in which DBUs hand a running sum along during accumulation, and the
// hops of the matching distribution circuit that leaves the reducer.
struct Circuit {
  std::vector<std::pair<int, int>> accumulate;
  std::vector<std::pair<int, int>> distribute;
  int reducer = 0;
};

Circuit circuit_for(const Topology& topology) {
  const int c_count = topology.nodes();
  Circuit r;
  switch (topology.kind()) {
    case TopologyKind::uni_loop:
      for (int c = 0; c + 1 < c_count; ++c) r.accumulate.emplace_back(c, c + 1);
      if (c_count > 1) r.distribute.emplace_back(c_count - 1, 0);
      for (int c = 0; c + 2 < c_count; ++c) r.distribute.emplace_back(c, c + 1);
      r.reducer = c_count - 1;
      break;
    case TopologyKind::bi_chain:
      for (int c = 0; c + 1 < c_count; ++c) r.accumulate.emplace_back(c, c + 1);
      for (int c = c_count - 1; c > 0; --c) r.distribute.emplace_back(c, c - 1);
      r.reducer = c_count - 1;
      break;
    case TopologyKind::star:
      for (int c = 1; c < c_count; ++c) r.accumulate.emplace_back(c, 0);
      for (int c = 1; c < c_count; ++c) r.distribute.emplace_back(0, c);
      r.reducer = 0;
      break;
  }
  return r;
}

void meter_hops(TrafficLedger* ledger, const std::vector<std::pair<int, int>>& hops, std::int64_t entries) {
  if (ledger == nullptr) return;
  for (const auto& [from, to] : hops) ledger->meter(from, to, entries);
}

Eigen::LLT<CMatrix> factor_local_covariance(DbuState& dbu, std::vector<std::string>* warnings) {
  Eigen::LLT<CMatrix> llt(dbu.covariance);
  if (llt.info() != Eigen::Success)
    throw SingularMatrixError(cluster_name(dbu.index) + ": local noise covariance is not positive definite");
  const double rcond = llt.rcond();
  if (rcond < kMinRcond) {
    dbu.loading = 1e-10 * dbu.covariance.trace().real() / static_cast<double>(dbu.covariance.rows());
    dbu.covariance.diagonal().array() += dbu.loading;
    llt.compute(dbu.covariance);
    if (llt.info() != Eigen::Success || dbu.loading <= 0.0)
      throw SingularMatrixError(cluster_name(dbu.index) + ": local noise covariance is singular");
    if (warnings != nullptr) {
      std::ostringstream msg;
      msg << cluster_name(dbu.index) << ": local covariance ill-conditioned (rcond " << rcond
          << "), diagonal loading " << dbu.loading << " applied";
      warnings->push_back(msg.str());
    }
  }
  return llt;
}

struct BdacOutcome {
  EqualizerMatrix weights;
  CMatrix coupling;  // sum_c H_c^H R_cc^-1 H_c + I / E_s
};

BdacOutcome bdac_impl(std::vector<DbuState>& dbus, double symbol_energy, TrafficLedger* traffic, FlopLedger* flops,
                      std::vector<std::string>* warnings) {
  if (dbus.empty()) throw std::invalid_argument("bdac_init: no DBUs");
  const int k = dbus.front().users();
  const Topology topology = traffic ? traffic->topology() : Topology(TopologyKind::uni_loop, static_cast<int>(dbus.size()));
  const Circuit circuit = circuit_for(topology);

  std::vector<CMatrix> whitened(dbus.size());
  CMatrix coupling = CMatrix::Zero(k, k);
  for (std::size_t c = 0; c < dbus.size(); ++c) {
    DbuState& dbu = dbus[c];
    dbu.covariance_factor = factor_local_covariance(dbu, warnings);
    whitened[c] = dbu.covariance_factor.solve(dbu.channel);
    const CMatrix gram = dbu.channel.adjoint() * whitened[c];
    coupling += gram;
    if (flops) {
      const std::int64_t m = dbu.antennas();
      flops->bdac.multiply_accumulates += m * (m + 1) / 2 * dbu.samples() + cost::cholesky_solve(m, k) +
                                          cost::product(k, m, k);
      flops->bdac.factorization += cost::cholesky(m);
    }
  }
  if (traffic) traffic->begin(Phase::preprocessing, "bdac_gram_accumulate");
  meter_hops(traffic, circuit.accumulate, std::int64_t{k} * k);

  coupling.diagonal().array() += 1.0 / symbol_energy;
  coupling = (0.5 * (coupling + coupling.adjoint())).eval();
  if (traffic) traffic->begin(Phase::preprocessing, "bdac_gram_distribute");
  meter_hops(traffic, circuit.distribute, std::int64_t{k} * k);

  // Every DBU factors the K x K coupling matrix it received; the factor is identical everywhere.
  const Eigen::LLT<CMatrix> coupling_factor(coupling);
  if (coupling_factor.info() != Eigen::Success)
    throw SingularMatrixError("bdac_init: coupling matrix is not positive definite");
  for (std::size_t c = 0; c < dbus.size(); ++c) {
    DbuState& dbu = dbus[c];
    dbu.weights = coupling_factor.solve(whitened[c].adjoint());
    dbu.last_sweep = 0;
    if (flops) {
      flops->bdac.multiply_accumulates += cost::cholesky_solve(k, dbu.antennas());
      flops->bdac.factorization += cost::cholesky(k);
    }
  }
  return {assemble(dbus, "bdac"), std::move(coupling)};
}

}  // namespace

std::vector<DbuState> make_dbu_states(const ChannelSet& channels, const NoisePool& pool) {
  check_partitions(channels, pool);
  std::vector<DbuState> dbus;
  for (int c = 0; c < channels.partition.clusters(); ++c) {
    DbuState s = make_state(c, channels, pool);
    kernels::omp::sample_covariance(s.noise, s.covariance);
    dbus.push_back(std::move(s));
  }
  return dbus;
}

std::vector<DbuState> make_dbu_states(const ChannelSet& channels, const NoisePool& pool, const Covariance& local) {
  check_partitions(channels, pool);
  std::vector<DbuState> dbus;
  for (int c = 0; c < channels.partition.clusters(); ++c) {
    DbuState s = make_state(c, channels, pool);
    s.covariance = local.block(c, c);
    dbus.push_back(std::move(s));
  }
  return dbus;
}

std::vector<double> ChainMessage::serialize() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(2 * entries()));
  const auto push = [&out](cdouble v) {
    out.push_back(v.real());
    out.push_back(v.imag());
  };
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) push(a(r, c));
  for (Eigen::Index i = 0; i < b.cols(); ++i)
    for (Eigen::Index k = 0; k < b.rows(); ++k) push(b(k, i));
  return out;
}

ChainMessage ChainMessage::deserialize(const std::vector<double>& payload, int users, int samples, int sweep,
                                       int origin) {
  const std::size_t expected = 2 * static_cast<std::size_t>(users) * static_cast<std::size_t>(users + samples);
  if (payload.size() != expected) throw std::invalid_argument("ChainMessage: payload size mismatch");
  ChainMessage m{CMatrix(users, users), CMatrix(users, samples), sweep, origin};
  std::size_t p = 0;
  const auto pop = [&]() {
    const cdouble v(payload[p], payload[p + 1]);
    p += 2;
    return v;
  };
  for (int r = 0; r < users; ++r)
    for (int c = 0; c < users; ++c) m.a(r, c) = pop();
  for (int i = 0; i < samples; ++i)
    for (int k = 0; k < users; ++k) m.b(k, i) = pop();
  return m;
}

double message_objective(const ChainMessage& message, double symbol_energy) {
  const Eigen::Index k = message.a.rows();
  const double bias = (message.a - CMatrix::Identity(k, k)).squaredNorm();
  const double noise = message.b.cols() == 0 ? 0.0 : message.b.squaredNorm() / static_cast<double>(message.b.cols());
  return symbol_energy * bias + noise;
}

EqualizerMatrix assemble(const std::vector<DbuState>& dbus, std::string label) {
  std::vector<int> sizes;
  for (const auto& d : dbus) sizes.push_back(d.antennas());
  EqualizerMatrix w;
  w.partition = Partition(sizes);
  w.label = std::move(label);
  w.weights.resize(dbus.empty() ? 0 : dbus.front().users(), w.partition.total());
  for (std::size_t c = 0; c < dbus.size(); ++c) w.block(static_cast<int>(c)) = dbus[c].weights;
  return w;
}

EqualizerMatrix bdac_init(std::vector<DbuState>& dbus, double symbol_energy) {
  return bdac_impl(dbus, symbol_energy, nullptr, nullptr, nullptr).weights;
}

Preprocessed preprocess(std::vector<DbuState>& dbus, double symbol_energy, TrafficLedger& traffic,
                        FlopLedger& flops) {
  Preprocessed out;
  BdacOutcome bdac = bdac_impl(dbus, symbol_energy, &traffic, &flops, &out.warnings);
  out.initial = std::move(bdac.weights);

  const int k = dbus.front().users();
  const int n = dbus.front().samples();
  const Circuit circuit = circuit_for(traffic.topology());

  ChainMessage totals{CMatrix::Zero(k, k), CMatrix::Zero(k, n), 0, circuit.reducer};
  for (auto& dbu : dbus) {
    const std::int64_t m = dbu.antennas();
    dbu.update_factor.compute(symbol_energy * (dbu.channel * dbu.channel.adjoint()) + dbu.covariance);
    if (dbu.update_factor.info() != Eigen::Success)
      throw SingularMatrixError(cluster_name(dbu.index) + ": update matrix is not positive definite");
    dbu.channel_image = dbu.weights * dbu.channel;
    dbu.noise_image = dbu.weights * dbu.noise;
    totals.a += dbu.channel_image;
    totals.b += dbu.noise_image;
    flops.preprocessing.multiply_accumulates += cost::product(m, k, m) + cost::product(k, m, k) + cost::product(k, m, n);
    flops.preprocessing.factorization += cost::cholesky(m);
  }
  traffic.begin(Phase::preprocessing, "init_accumulate");
  meter_hops(&traffic, circuit.accumulate, totals.entries());

  // Copies carry only b^0: A^0 = T^-1 (T - I/E_s) = I - T^-1 / E_s follows from the coupling matrix T.
  traffic.begin(Phase::preprocessing, "init_distribute");
  meter_hops(&traffic, circuit.distribute, totals.b.size());
  const CMatrix coupling_inverse = bdac.coupling.llt().solve(CMatrix::Identity(k, k));
  flops.preprocessing.multiply_accumulates += cost::cholesky_solve(k, k);
  out.head_copy = {CMatrix::Identity(k, k) - coupling_inverse / symbol_energy, totals.b, 0, circuit.reducer};
  out.totals = std::move(totals);
  return out;
}

ChainMessage bcd_block_update(DbuState& dbu, const ChainMessage& incoming, double symbol_energy) {
  if (incoming.sweep < dbu.last_sweep || incoming.sweep > dbu.last_sweep + 1) {
    throw ProtocolError(cluster_name(dbu.index) + ": stale message for sweep " + std::to_string(incoming.sweep) +
                        " (last update in sweep " + std::to_string(dbu.last_sweep) + ")");
  }
  const Eigen::Index k = dbu.users();
  if (incoming.a.rows() != k || incoming.a.cols() != k || incoming.b.rows() != k || incoming.b.cols() != dbu.samples())
    throw std::invalid_argument(cluster_name(dbu.index) + ": message dimensions do not match the DBU");

  // E_s (I - A_{-c}) H_c^H - (1/N) sum_i b_{-c,i} (n_c^i)^H, with the own contribution removed.
  CMatrix target = CMatrix::Identity(k, k) - incoming.a + dbu.channel_image;
  CMatrix rhs = symbol_energy * (target * dbu.channel.adjoint());
  CMatrix residual;
  kernels::omp::residual_correlation(incoming.b, dbu.noise_image, dbu.noise, residual);
  rhs -= residual;

  dbu.weights = dbu.update_factor.solve(rhs.adjoint()).adjoint();
  CMatrix channel_image = dbu.weights * dbu.channel;
  CMatrix noise_image = dbu.weights * dbu.noise;

  ChainMessage out{incoming.a - dbu.channel_image + channel_image, incoming.b - dbu.noise_image + noise_image,
                   incoming.sweep, dbu.index};
  dbu.channel_image = std::move(channel_image);
  dbu.noise_image = std::move(noise_image);
  dbu.last_sweep = incoming.sweep;
  return out;
}

namespace {

std::int64_t update_cost(const DbuState& dbu) {
  const std::int64_t k = dbu.users();
  const std::int64_t m = dbu.antennas();
  const std::int64_t n = dbu.samples();
  return 2 * cost::product(k, k, m) + 2 * cost::product(k, n, m) + cost::cholesky_solve(m, k);
}

}  // namespace

BcdRun run_bcd(std::vector<DbuState>& dbus, const Schedule& schedule, double symbol_energy,
               const UpdateObserver& observer) {
  if (schedule.sweeps < 0) throw std::invalid_argument("run_bcd: sweeps must be >= 0");
  const int c_count = static_cast<int>(dbus.size());
  BcdRun run{{}, {}, {}, TrafficLedger(Topology(topology_for(schedule.kind), c_count)), {}, 0, {}, {}};

  Preprocessed pre = preprocess(dbus, symbol_energy, run.traffic, run.flops);
  run.initial = pre.initial;
  run.warnings = std::move(pre.warnings);
  run.objectives.push_back(message_objective(pre.totals, symbol_energy));

  const auto after_update = [&](int sweep, int block, const ChainMessage& msg) {
    const double f = message_objective(msg, symbol_energy);
    run.objectives.push_back(f);
    if (observer) observer(UpdateEvent{sweep, block, f, dbus});
  };
  const auto update = [&](int c, const ChainMessage& in) {
    run.flops.sweeps.multiply_accumulates += update_cost(dbus[static_cast<std::size_t>(c)]);
    return bcd_block_update(dbus[static_cast<std::size_t>(c)], in, symbol_energy);
  };

  ChainMessage msg = schedule.kind == ScheduleKind::symmetric_gauss_seidel ? pre.head_copy : pre.totals;
  const std::int64_t payload = msg.entries();
  for (int l = 1; l <= schedule.sweeps; ++l) {
    const double before = run.objectives.back();
    run.traffic.begin(Phase::sweep, "sweep");
    msg.sweep = l;
    switch (schedule.kind) {
      case ScheduleKind::gauss_seidel_loop:
        for (int c = 0; c < c_count; ++c) {
          run.traffic.meter(c == 0 ? c_count - 1 : c - 1, c, payload);
          msg = update(c, msg);
          after_update(l, c, msg);
        }
        break;
      case ScheduleKind::symmetric_gauss_seidel:
        for (int c = 0; c < c_count; ++c) {
          if (c > 0) run.traffic.meter(c - 1, c, payload);
          msg = update(c, msg);
          after_update(l, c, msg);
        }
        for (int c = c_count - 2; c >= 0; --c) {
          run.traffic.meter(c + 1, c, payload);
          msg = update(c, msg);
          after_update(l, c, msg);
        }
        break;
      case ScheduleKind::jacobi_star: {
        for (int c = 1; c < c_count; ++c) run.traffic.meter(0, c, payload);
        std::vector<ChainMessage> outs(static_cast<std::size_t>(c_count));
        std::exception_ptr failure;
#pragma omp parallel for schedule(static)
        for (int c = 0; c < c_count; ++c) {
          try {
            outs[static_cast<std::size_t>(c)] = bcd_block_update(dbus[static_cast<std::size_t>(c)], msg, symbol_energy);
          } catch (...) {
#pragma omp critical
            failure = std::current_exception();
          }
        }
        if (failure) std::rethrow_exception(failure);
        ChainMessage next = msg;
        for (int c = 0; c < c_count; ++c) {
          run.flops.sweeps.multiply_accumulates += update_cost(dbus[static_cast<std::size_t>(c)]);
          next.a += outs[static_cast<std::size_t>(c)].a - msg.a;
          next.b += outs[static_cast<std::size_t>(c)].b - msg.b;
          if (c > 0) run.traffic.meter(c, 0, payload);
        }
        next.origin = 0;
        msg = std::move(next);
        after_update(l, -1, msg);
        break;
      }
    }
    run.sweeps_run = l;
    const double after = run.objectives.back();
    if (schedule.early_stop > 0.0 && std::abs(before - after) <= schedule.early_stop * std::abs(after)) break;
  }
  run.flops.sweep_count = run.sweeps_run;
  run.weights = assemble(dbus, schedule.sweeps == 0 ? "bdac" : "bcd");
  run.final_message = std::move(msg);
  return run;
}

AuditReport consistency_audit(const std::vector<DbuState>& dbus, const ChainMessage& message) {
  if (dbus.empty()) return {};
  const Eigen::Index k = dbus.front().users();
  CMatrix a = CMatrix::Zero(k, k);
  CMatrix b = CMatrix::Zero(k, dbus.front().samples());
  for (const auto& dbu : dbus) {
    const CMatrix channel_image = dbu.weights * dbu.channel;
    const CMatrix noise_image = dbu.weights * dbu.noise;
    a += channel_image;
    b += noise_image;
  }
  AuditReport r;
  r.a_deviation = (message.a - a).cwiseAbs().maxCoeff();
  r.b_deviation = b.size() == 0 ? 0.0 : (message.b - b).cwiseAbs().maxCoeff();
  return r;
}

}  // namespace chaineq
