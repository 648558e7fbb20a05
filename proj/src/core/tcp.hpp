#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "delay.hpp"
#include "seq_translation.hpp"

namespace mosto {

// Simulation time in picoseconds, same unit as Delay.
using SimTime = std::int64_t;

inline constexpr std::uint64_t kUnlimited = std::numeric_limits<std::uint64_t>::max() / 4;

inline double sim_ms(SimTime t) { return static_cast<double>(t) / static_cast<double>(Delay::kPicosPerMs); }

// Events at equal times run in insertion order.
class EventQueue {
 public:
  using Action = std::function<void()>;

  void schedule(SimTime at, Action action);
  SimTime now() const { return now_; }
  bool empty() const { return heap_.empty(); }
  bool run_next();
  std::uint64_t processed() const { return processed_; }

 private:
  struct Event {
    SimTime at;
    std::uint64_t seq;
    Action action;
  };
  static bool later(const Event& a, const Event& b) { return a.at != b.at ? a.at > b.at : a.seq > b.seq; }

  std::vector<Event> heap_;
  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t processed_ = 0;
};

struct Segment {
  TcpHeader hdr;
  std::vector<std::uint8_t> payload;
  // Timestamp option; 0 means absent.
  SimTime tsval = 0;
  SimTime tsecr = 0;

  bool has_data() const { return !payload.empty(); }
};

inline constexpr std::size_t kHeaderBytes = 40;

struct ChannelSpec {
  Delay delay;
  double bytes_per_ms = 0;  // 0 = no serialization
  double loss = 0;          // applied to data segments only
};

// One direction of a link: FIFO serialization followed by propagation.
class Channel {
 public:
  Channel(EventQueue& queue, ChannelSpec spec, std::mt19937_64& rng);

  void set_receiver(std::function<void(Segment)> receiver) { receiver_ = std::move(receiver); }
  void send(Segment s);

  std::uint64_t in_flight() const { return in_flight_; }
  std::uint64_t dropped() const { return dropped_; }
  const ChannelSpec& spec() const { return spec_; }

 private:
  EventQueue& queue_;
  ChannelSpec spec_;
  std::mt19937_64& rng_;
  std::function<void(Segment)> receiver_;
  SimTime busy_until_ = 0;
  std::uint64_t in_flight_ = 0;
  std::uint64_t dropped_ = 0;
};

struct TcpParams {
  std::uint32_t mss = 1460;
  std::uint32_t icw = 10;
  std::uint64_t ssthresh = kUnlimited;
  std::uint64_t send_buffer = kUnlimited;
  std::uint64_t recv_buffer = kUnlimited;
  Delay rto_min = Delay::from_ms(200);
  Delay rto_initial = Delay::from_ms(1000);
  Delay rto_max = Delay::from_ms(60000);
  Delay granularity = Delay::from_ms(1);
  bool checksums = false;
};

struct ConnStats {
  std::uint64_t data_segments_sent = 0;
  std::uint64_t retransmitted_segments = 0;
  std::uint64_t rto_events = 0;
  std::uint64_t fast_retransmits = 0;
  std::uint64_t acks_sent = 0;
  std::uint64_t duplicate_segments = 0;  // receiver saw bytes it already had
  std::uint64_t bad_checksums = 0;
  std::uint64_t header_anomalies = 0;  // seq/ack fields outside the expected space
  std::uint64_t bytes_delivered = 0;   // in-order bytes at the receiver
};

// One unidirectional bulk-data TCP connection: the sender half lives at the
// upstream node, the receiver half at the downstream node. The connection is
// already established when created.
class SimTcpConn {
 public:
  SimTcpConn(int id, EventQueue& queue, const TcpParams& params, std::uint32_t isn_local, std::uint32_t isn_remote);
  SimTcpConn(const SimTcpConn&) = delete;
  SimTcpConn& operator=(const SimTcpConn&) = delete;

  // Wiring, set by the owner before traffic starts.
  std::function<void(Segment)> emit_data;  // sender -> network
  std::function<void(Segment)> emit_ack;   // receiver -> network
  std::function<void()> on_readable;
  std::function<void()> on_send_space;
  std::function<void(const char*)> on_event;  // "rto", "fast_retransmit"

  int id() const { return id_; }
  void set_usable_at(SimTime t) { usable_at_ = t; }
  SimTime usable_at() const { return usable_at_; }

  // Sender half.
  std::uint64_t send_space() const;
  void write(std::span<const std::uint8_t> bytes);
  void try_send();
  void on_ack_segment(const Segment& s);

  // Receiver half.
  void on_data_segment(const Segment& s);
  std::size_t readable() const { return ready_.size(); }
  std::size_t read(std::vector<std::uint8_t>& out, std::size_t max);
  void set_window_closed(bool closed);
  void send_ack_now();
  std::uint32_t advertised_window() const;
  std::uint64_t recv_buffered() const { return ready_.size() + ooo_bytes_; }
  SimTime ts_recent() const { return ts_recent_; }

  std::uint32_t isn_local() const { return isn_local_; }
  std::uint32_t isn_remote() const { return isn_remote_; }
  std::uint32_t snd_una() const { return snd_una_; }
  std::uint32_t snd_nxt() const { return snd_nxt_; }
  std::uint32_t snd_max() const { return snd_max_; }
  std::uint32_t rcv_nxt() const { return rcv_nxt_; }
  std::uint64_t cwnd() const { return cwnd_; }
  std::uint64_t ssthresh() const { return ssthresh_; }
  std::uint64_t flight() const { return static_cast<std::uint32_t>(snd_nxt_ - snd_una_); }
  std::uint64_t send_buffered() const { return send_buf_.size(); }
  bool all_acked() const { return send_buf_.empty() && snd_una_ == snd_max_; }
  std::uint32_t peer_window() const { return peer_window_; }
  bool have_rtt() const { return have_rtt_; }
  Delay srtt() const { return Delay::from_picos(srtt_); }
  Delay rttvar() const { return Delay::from_picos(rttvar_); }
  Delay rto() const { return Delay::from_picos(rto_); }
  Delay min_rtt() const { return Delay::from_picos(min_rtt_); }
  const std::vector<std::uint64_t>& round_history() const { return rounds_; }
  const ConnStats& stats() const { return stats_; }
  const TcpParams& params() const { return params_; }

 private:
  void transmit(std::uint32_t seq, std::size_t len);
  void arm_timer();
  void stop_timer() { deadline_ = -1; }
  void timer_fired(std::uint64_t token);
  void on_timeout();
  void rtt_sample(SimTime r);
  void note(const char* what) {
    if (on_event) on_event(what);
  }

  int id_;
  EventQueue& queue_;
  TcpParams params_;
  std::uint32_t isn_local_;
  std::uint32_t isn_remote_;
  SimTime usable_at_ = 0;

  // sender
  std::deque<std::uint8_t> send_buf_;  // starts at snd_una
  std::uint32_t snd_una_;
  std::uint32_t snd_nxt_;
  std::uint32_t snd_max_;
  std::uint32_t peer_window_;
  std::uint64_t cwnd_;
  std::uint64_t ssthresh_;
  std::uint64_t ca_acked_ = 0;
  int dupacks_ = 0;
  bool in_recovery_ = false;
  std::uint32_t recover_ = 0;
  bool have_rtt_ = false;
  SimTime srtt_ = 0;
  SimTime rttvar_ = 0;
  SimTime rto_;
  SimTime min_rtt_ = 0;
  SimTime deadline_ = -1;
  bool timer_pending_ = false;
  SimTime timer_pending_at_ = 0;
  std::uint64_t timer_token_ = 0;
  bool round_active_ = false;
  std::uint32_t round_end_ = 0;
  std::uint64_t round_acked_ = 0;
  std::vector<std::uint64_t> rounds_;

  // receiver
  std::uint32_t rcv_nxt_;
  std::uint64_t rcv_off_ = 0;
  std::deque<std::uint8_t> ready_;
  std::map<std::uint64_t, std::vector<std::uint8_t>> ooo_;
  std::uint64_t ooo_bytes_ = 0;
  SimTime ts_recent_ = 0;
  bool window_closed_ = false;
  bool in_receive_ = false;
  std::uint32_t last_adv_ = 0;

  ConnStats stats_;
};

// True once the connection has left slow start: cwnd reached ssthresh, or the
// bytes acknowledged in the last completed round grew by less than
// growth_threshold over the round before.
bool detect_slowstart_end(const SimTcpConn& conn, double growth_threshold);

}  // namespace mosto
