#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "delay.hpp"
#include "offload.hpp"
#include "pareto.hpp"
#include "tcp.hpp"
#include "topology.hpp"
#include "transfer_model.hpp"

namespace mosto {

struct HopSpec {
  Delay rtt;
  double bytes_per_ms = 0;  // 0 = unlimited
  double loss = 0;
};

struct SimConfig {
  std::uint32_t mss = 1460;
  std::uint32_t icw = 10;
  std::uint64_t ssthresh = kUnlimited;
  std::uint64_t recv_buffer = kUnlimited;   // at the final receiver
  std::uint64_t proxy_buffer = kUnlimited;  // per connection at each proxy
  Delay rto_min = Delay::from_ms(200);
  Delay rto_initial = Delay::from_ms(1000);
  Delay clock_granularity = Delay::from_ms(1);
  bool handshake = false;  // connections open on demand instead of pre-established
  bool checksums = false;
  std::uint64_t seed = 1;
  std::uint64_t max_events = 100'000'000;
  Delay time_limit = Delay::from_ms(3'600'000);
  double ss_growth_threshold = 1.5;
  Delay sample_interval = Delay::from_ms(100);
  bool trace = false;
};

struct OffloadConfig {
  bool enabled = false;
  bool ramp = true;
  Delay ramp_step = Delay::from_ms(10);
  Delay hold = Delay::from_ms(1000);
};

struct TraceRow {
  double time_ms = 0;
  std::string event;
  int conn_id = -1;
  double cwnd = 0;  // segments
  double goodput_bps = 0;
  std::string state;
};

struct OffloadReport {
  bool offloaded = false;
  std::vector<OffloadState> history;
  double ss_ended_ms = -1;
  double ramp_start_ms = -1;
  double drain_start_ms = -1;
  double offload_ms = -1;
  double target_ms = 0;
  std::vector<double> injected_ms;  // injected delay after each ramp step
  SeqTranslation translation;
  std::uint64_t proxy_segments_after_offload = 0;
  double goodput_pre_bps = 0;
  double goodput_post_bps = 0;
};

struct SimResult {
  bool completed = false;
  double completion_ms = 0;
  std::uint64_t size = 0;
  std::uint64_t delivered = 0;
  bool stream_intact = false;
  std::uint64_t retransmissions = 0;
  std::uint64_t rto_events = 0;
  std::uint64_t fast_retransmits = 0;
  std::uint64_t duplicate_segments = 0;  // spurious or repeated data at receivers
  std::uint64_t bad_checksums = 0;
  std::uint64_t header_anomalies = 0;
  std::uint64_t drops = 0;
  std::uint64_t events = 0;
  std::vector<ConnStats> conns;
  OffloadReport offload;
  std::vector<TraceRow> trace;
};

// Transfers size bytes across the chain of hops through a split TCP
// connection per hop. Offloading needs exactly two hops: server, proxy,
// client. Throws SimulationDiverged when the event or time budget runs out.
SimResult simulate(const std::vector<HopSpec>& hops, std::uint64_t size, const SimConfig& cfg,
                   const OffloadConfig& offload = {});

// Completion time in ms of a lossless transfer along the chain.
double simulate_chain_transfer(const ParetoPath& chain, std::uint64_t size, const DistanceMatrix& d,
                               const TransferModel& m);

std::vector<HopSpec> hops_of(const ParetoPath& chain, const DistanceMatrix& d);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);

}  // namespace mosto
