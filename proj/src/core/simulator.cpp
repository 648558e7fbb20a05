#include "simulator.hpp"

#include <algorithm>
#include <memory>
#include <optional>
#include <ostream>

#include <fmt/format.h>

#include "error.hpp"

namespace mosto {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ull;
  void add(std::span<const std::uint8_t> bytes) {
    for (std::uint8_t b : bytes) {
      h ^= b;
      h *= 0x100000001b3ull;
    }
  }
};

class World {
 public:
  World(const std::vector<HopSpec>& hops, std::uint64_t size, const SimConfig& cfg, const OffloadConfig& ocfg);
  SimResult run();

 private:
  void wire(std::size_t k);
  void relay(std::size_t k);
  void sink_read();
  void sample();
  void record(const char* event, int conn);
  std::string state_label() const;

  void from_server(Segment s);
  void from_client(Segment s);
  void through_line(std::function<void()> deliver);
  void poll_offload();
  bool drained() const;
  void do_offload();
  double rate_bps(SimTime t1, SimTime t2) const;
  std::uint64_t delivered_at(SimTime t) const;

  std::vector<HopSpec> hops_;
  std::uint64_t size_;
  SimConfig cfg_;
  OffloadConfig ocfg_;
  EventQueue q_;
  std::mt19937_64 rng_;
  std::vector<std::unique_ptr<Channel>> fwd_;
  std::vector<std::unique_ptr<Channel>> back_;
  std::vector<std::unique_ptr<SimTcpConn>> conns_;
  std::vector<std::uint8_t> scratch_;

  Fnv1a source_hash_;
  Fnv1a sink_hash_;
  std::uint64_t delivered_ = 0;
  std::vector<std::pair<SimTime, std::uint64_t>> deliveries_;
  bool done_ = false;
  SimTime done_at_ = 0;
  std::vector<TraceRow> trace_;

  std::optional<OffloadMachine> machine_;
  bool ss_done_[2] = {false, false};
  SimTime t_ss_ = -1, t_ramp_ = -1, t_drain_ = -1, t_off_ = -1;
  SimTime next_step_ = 0;
  std::uint64_t line_pending_ = 0;
  std::uint64_t proxy_after_ = 0;
  std::vector<double> injected_;
};

World::World(const std::vector<HopSpec>& hops, std::uint64_t size, const SimConfig& cfg, const OffloadConfig& ocfg)
    : hops_(hops), size_(size), cfg_(cfg), ocfg_(ocfg), rng_(cfg.seed) {
  if (hops.empty()) throw InputError("chain has no hops");
  if (size == 0) throw InputError("transfer size must be positive");
  for (const auto& h : hops) {
    if (h.rtt <= Delay::zero() || h.rtt.is_infinite()) throw InputError("hop rtt must be positive and finite");
    if (!(h.loss >= 0 && h.loss < 1)) throw InputError("hop loss must be in [0, 1)");
    if (!(h.bytes_per_ms >= 0)) throw InputError("hop bandwidth must be non-negative");
  }
  if (ocfg.enabled) {
    if (hops.size() != 2) throw InputError("offloading needs exactly one proxy (two hops)");
    machine_.emplace(ocfg.ramp, ocfg.ramp_step);
  }

  const std::size_t n = hops.size();
  for (std::size_t k = 0; k < n; ++k) {
    const std::int64_t rtt = hops[k].rtt.picos();
    const Delay there = Delay::from_picos(rtt / 2);
    const Delay back = Delay::from_picos(rtt - rtt / 2);
    fwd_.push_back(std::make_unique<Channel>(q_, ChannelSpec{there, hops[k].bytes_per_ms, hops[k].loss}, rng_));
    back_.push_back(std::make_unique<Channel>(q_, ChannelSpec{back, hops[k].bytes_per_ms, 0.0}, rng_));
    TcpParams p;
    p.mss = cfg.mss;
    p.icw = cfg.icw;
    p.ssthresh = cfg.ssthresh;
    p.rto_min = cfg.rto_min;
    p.rto_initial = cfg.rto_initial;
    p.granularity = cfg.clock_granularity;
    p.checksums = cfg.checksums;
    p.send_buffer = k == 0 ? kUnlimited : cfg.proxy_buffer;
    p.recv_buffer = k + 1 == n ? cfg.recv_buffer : cfg.proxy_buffer;
    const auto isn_local = static_cast<std::uint32_t>(rng_());
    const auto isn_remote = static_cast<std::uint32_t>(rng_());
    conns_.push_back(std::make_unique<SimTcpConn>(static_cast<int>(k), q_, p, isn_local, isn_remote));
  }
  for (std::size_t k = 0; k < n; ++k) wire(k);

  if (cfg.handshake) {
    SimTime upstream = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const SimTime at = upstream + hops[k].rtt.picos();
      conns_[k]->set_usable_at(at);
      SimTcpConn* c = conns_[k].get();
      q_.schedule(at, [c] { c->try_send(); });
      upstream += fwd_[k]->spec().delay.picos();
    }
  }
}

void World::wire(std::size_t k) {
  SimTcpConn& c = *conns_[k];
  const bool last = k + 1 == conns_.size();
  const bool proxy_side_data = machine_ && k == 0;  // proxy receives conn 0 data
  const bool proxy_side_ack = machine_ && k == 1;   // proxy receives conn 1 acks

  c.emit_data = [this, k](Segment s) {
    if (machine_ && k == 1 && machine_->state() == OffloadState::Offloaded) ++proxy_after_;
    fwd_[k]->send(std::move(s));
  };
  c.emit_ack = [this, k](Segment s) {
    if (machine_ && k == 0 && machine_->state() == OffloadState::Offloaded) ++proxy_after_;
    back_[k]->send(std::move(s));
  };
  if (proxy_side_data)
    fwd_[k]->set_receiver([this](Segment s) { from_server(std::move(s)); });
  else
    fwd_[k]->set_receiver([this, k](Segment s) { conns_[k]->on_data_segment(s); });
  if (proxy_side_ack)
    back_[k]->set_receiver([this](Segment s) { from_client(std::move(s)); });
  else
    back_[k]->set_receiver([this, k](Segment s) { conns_[k]->on_ack_segment(s); });

  if (last)
    c.on_readable = [this] { sink_read(); };
  else
    c.on_readable = [this, k] { relay(k); };
  if (k > 0) c.on_send_space = [this, k] { relay(k - 1); };
  c.on_event = [this, k](const char* what) { record(what, static_cast<int>(k)); };
}

void World::relay(std::size_t k) {
  SimTcpConn& in = *conns_[k];
  SimTcpConn& out = *conns_[k + 1];
  const std::uint64_t n = std::min<std::uint64_t>(out.send_space(), in.readable());
  if (n == 0) return;
  scratch_.clear();
  in.read(scratch_, n);
  out.write(scratch_);
}

void World::sink_read() {
  SimTcpConn& c = *conns_.back();
  scratch_.clear();
  c.read(scratch_, c.readable());
  if (scratch_.empty()) return;
  sink_hash_.add(scratch_);
  delivered_ += scratch_.size();
  deliveries_.emplace_back(q_.now(), delivered_);
  if (delivered_ >= size_ && !done_) {
    done_ = true;
    done_at_ = q_.now();
  }
}

std::string World::state_label() const {
  return machine_ ? std::string(state_name(machine_->state())) : std::string("NONE");
}

void World::record(const char* event, int conn) {
  if (!cfg_.trace) return;
  TraceRow r;
  r.time_ms = sim_ms(q_.now());
  r.event = event;
  r.conn_id = conn;
  if (conn >= 0) r.cwnd = static_cast<double>(conns_[static_cast<std::size_t>(conn)]->cwnd()) / cfg_.mss;
  r.state = state_label();
  trace_.push_back(std::move(r));
}

void World::sample() {
  if (done_) return;
  const SimTime now = q_.now();
  const SimTime from = std::max<SimTime>(0, now - cfg_.sample_interval.picos());
  const double bps = now > from ? rate_bps(from, now) : 0.0;
  for (const auto& c : conns_) {
    TraceRow r;
    r.time_ms = sim_ms(now);
    r.event = "sample";
    r.conn_id = c->id();
    r.cwnd = static_cast<double>(c->cwnd()) / cfg_.mss;
    r.goodput_bps = bps;
    r.state = state_label();
    trace_.push_back(std::move(r));
  }
  q_.schedule(now + cfg_.sample_interval.picos(), [this] { sample(); });
}

std::uint64_t World::delivered_at(SimTime t) const {
  auto it = std::upper_bound(deliveries_.begin(), deliveries_.end(), t,
                             [](SimTime v, const auto& e) { return v < e.first; });
  return it == deliveries_.begin() ? 0 : std::prev(it)->second;
}

double World::rate_bps(SimTime t1, SimTime t2) const {
  if (t2 <= t1) return 0.0;
  const double bytes = static_cast<double>(delivered_at(t2) - delivered_at(t1));
  return bytes * 8.0 / (sim_ms(t2 - t1) / 1000.0);
}

void World::through_line(std::function<void()> deliver) {
  const Delay inj = machine_->injected();
  if (inj == Delay::zero() && line_pending_ == 0) {
    deliver();
    return;
  }
  ++line_pending_;
  q_.schedule(q_.now() + inj.picos(), [this, d = std::move(deliver)] {
    --line_pending_;
    d();
  });
}

void World::from_server(Segment s) {
  if (machine_->state() == OffloadState::Offloaded) {
    s.hdr = translate_segment(s.hdr, machine_->translation(), Direction::Reverse);
    fwd_[1]->send(std::move(s));
    return;
  }
  through_line([this, seg = std::move(s)] {
    if (machine_->state() == OffloadState::Offloaded) ++proxy_after_;
    conns_[0]->on_data_segment(seg);
  });
}

void World::from_client(Segment s) {
  if (machine_->state() == OffloadState::Offloaded) {
    s.hdr = translate_segment(s.hdr, machine_->translation(), Direction::Forward);
    back_[0]->send(std::move(s));
    return;
  }
  through_line([this, seg = std::move(s)] {
    if (machine_->state() == OffloadState::Offloaded) ++proxy_after_;
    conns_[1]->on_ack_segment(seg);
  });
}

bool World::drained() const {
  const SimTcpConn& b = *conns_[0];  // server -> proxy
  const SimTcpConn& a = *conns_[1];  // proxy -> client
  return b.snd_max() == b.rcv_nxt() && b.recv_buffered() == 0 && line_pending_ == 0 && fwd_[0]->in_flight() == 0 &&
         a.all_acked() && a.recv_buffered() == 0 && fwd_[1]->in_flight() == 0;
}

void World::do_offload() {
  SimTcpConn& b = *conns_[0];
  SimTcpConn& a = *conns_[1];
  SeqTranslation t;
  t.delta_rev = a.snd_nxt() - b.rcv_nxt();
  t.delta_fwd = b.isn_remote() - a.isn_remote();
  machine_->install(t);
  machine_->advance(OffloadState::Offloaded);
  t_off_ = q_.now();
  record("state", -1);

  // Last act of the proxy: reopen the server's window on behalf of the client.
  Segment ack;
  ack.hdr.src_port = 50000;
  ack.hdr.dst_port = 443;
  ack.hdr.seq = b.isn_remote() + 1;
  ack.hdr.ack = b.rcv_nxt();
  ack.hdr.flags = tcp_flags::kAck;
  ack.hdr.window = a.advertised_window();
  ack.tsval = q_.now();
  ack.tsecr = b.ts_recent();
  if (cfg_.checksums) ack.hdr.checksum = tcp_checksum(ack.hdr, ack.payload);
  back_[0]->send(std::move(ack));
}

void World::poll_offload() {
  OffloadMachine& m = *machine_;
  const SimTime now = q_.now();
  switch (m.state()) {
    case OffloadState::Proxying:
      for (int k = 0; k < 2; ++k)
        ss_done_[k] = ss_done_[k] || detect_slowstart_end(*conns_[static_cast<std::size_t>(k)], cfg_.ss_growth_threshold);
      if (ss_done_[0] && ss_done_[1]) {
        m.advance(OffloadState::SsEnded);
        t_ss_ = now;
        record("state", -1);
      }
      break;
    case OffloadState::SsEnded:
      if (now >= t_ss_ + ocfg_.hold.picos()) {
        m.advance(OffloadState::DelayRamp);
        m.set_target_from(conns_[1]->min_rtt());
        t_ramp_ = now;
        next_step_ = now;
        record("state", -1);
      }
      break;
    case OffloadState::DelayRamp:
      if (now < next_step_) break;
      if (!m.ramp_done()) {
        m.step();
        injected_.push_back(m.injected().ms());
        next_step_ = now + conns_[1]->srtt().picos();
        record("ramp_step", -1);
      } else {
        m.advance(OffloadState::DrainWait);
        t_drain_ = now;
        conns_[0]->set_window_closed(true);
        record("state", -1);
      }
      break;
    case OffloadState::DrainWait:
      if (drained()) do_offload();
      break;
    case OffloadState::Offloaded:
      break;
  }
}

SimResult World::run() {
  std::vector<std::uint8_t> data(size_);
  for (std::uint64_t i = 0; i < size_; i += 8) {
    const std::uint64_t w = splitmix(cfg_.seed ^ (i / 8) * 0x2545F4914F6CDD1Dull);
    for (std::uint64_t j = 0; j < 8 && i + j < size_; ++j) data[i + j] = static_cast<std::uint8_t>(w >> (8 * j));
  }
  source_hash_.add(data);
  if (cfg_.trace) q_.schedule(0, [this] { sample(); });
  conns_[0]->write(data);
  data.clear();
  data.shrink_to_fit();

  const SimTime limit = cfg_.time_limit.picos();
  while (!done_) {
    if (q_.processed() >= cfg_.max_events || q_.now() > limit)
      throw SimulationDiverged(fmt::format("simulation exceeded its budget at {} ms after {} events", sim_ms(q_.now()),
                                           q_.processed()));
    if (!q_.run_next())
      throw SimulationDiverged(fmt::format("simulation stalled at {} ms with {} of {} bytes delivered",
                                           sim_ms(q_.now()), delivered_, size_));
    if (machine_ && machine_->state() != OffloadState::Offloaded) poll_offload();
  }

  SimResult r;
  r.completed = true;
  r.completion_ms = sim_ms(done_at_);
  r.size = size_;
  r.delivered = delivered_;
  r.stream_intact = delivered_ == size_ && sink_hash_.h == source_hash_.h;
  r.events = q_.processed();
  for (const auto& c : conns_) {
    const ConnStats& s = c->stats();
    r.conns.push_back(s);
    r.retransmissions += s.retransmitted_segments;
    r.rto_events += s.rto_events;
    r.fast_retransmits += s.fast_retransmits;
    r.duplicate_segments += s.duplicate_segments;
    r.bad_checksums += s.bad_checksums;
    r.header_anomalies += s.header_anomalies;
  }
  for (std::size_t k = 0; k < fwd_.size(); ++k) r.drops += fwd_[k]->dropped() + back_[k]->dropped();

  if (machine_) {
    OffloadReport& o = r.offload;
    o.offloaded = machine_->state() == OffloadState::Offloaded;
    o.history = machine_->history();
    o.ss_ended_ms = t_ss_ >= 0 ? sim_ms(t_ss_) : -1;
    o.ramp_start_ms = t_ramp_ >= 0 ? sim_ms(t_ramp_) : -1;
    o.drain_start_ms = t_drain_ >= 0 ? sim_ms(t_drain_) : -1;
    o.offload_ms = t_off_ >= 0 ? sim_ms(t_off_) : -1;
    o.target_ms = machine_->target().ms();
    o.injected_ms = injected_;
    o.translation = machine_->translation();
    o.proxy_segments_after_offload = proxy_after_;
    if (t_ramp_ >= 0) o.goodput_pre_bps = rate_bps(std::max<SimTime>(0, t_ramp_ - ocfg_.hold.picos()), t_ramp_);
    if (t_off_ >= 0) {
      const SimTime from = t_off_ + Delay::from_ms(500).picos();
      const SimTime to = std::min(t_off_ + Delay::from_ms(2500).picos(), done_at_);
      o.goodput_post_bps = rate_bps(from, to);
    }
  }
  if (cfg_.trace) {
    record("complete", static_cast<int>(conns_.size()) - 1);
    trace_.back().goodput_bps = rate_bps(0, done_at_);
  }
  r.trace = std::move(trace_);
  return r;
}

}  // namespace

SimResult simulate(const std::vector<HopSpec>& hops, std::uint64_t size, const SimConfig& cfg,
                   const OffloadConfig& offload) {
  World w(hops, size, cfg, offload);
  return w.run();
}

std::vector<HopSpec> hops_of(const ParetoPath& chain, const DistanceMatrix& d) {
  if (chain.hops.size() < 2) throw InputError("chain needs at least two nodes");
  std::vector<HopSpec> hops;
  for (std::size_t i = 0; i + 1 < chain.hops.size(); ++i) hops.push_back(HopSpec{d.at(chain.hops[i], chain.hops[i + 1])});
  return hops;
}

double simulate_chain_transfer(const ParetoPath& chain, std::uint64_t size, const DistanceMatrix& d,
                               const TransferModel& m) {
  SimConfig cfg;
  cfg.mss = m.mss;
  cfg.icw = m.icw;
  return simulate(hops_of(chain, d), size, cfg).completion_ms;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << "time_ms,event,conn_id,cwnd,goodput_bps,state\n";
  for (const auto& r : rows)
    out << fmt::format("{:.3f},{},{},{:.2f},{:.0f},{}\n", r.time_ms, r.event, r.conn_id, r.cwnd, r.goodput_bps,
                       r.state);
}

}  // namespace mosto
