#include "tcp.hpp"

#include <algorithm>
#include <cmath>

namespace mosto {

void EventQueue::schedule(SimTime at, Action action) {
  if (at < now_) at = now_;
  heap_.push_back(Event{at, next_seq_++, std::move(action)});
  std::push_heap(heap_.begin(), heap_.end(), later);
}

bool EventQueue::run_next() {
  if (heap_.empty()) return false;
  std::pop_heap(heap_.begin(), heap_.end(), later);
  Event ev = std::move(heap_.back());
  heap_.pop_back();
  now_ = ev.at;
  ++processed_;
  ev.action();
  return true;
}

Channel::Channel(EventQueue& queue, ChannelSpec spec, std::mt19937_64& rng) : queue_(queue), spec_(spec), rng_(rng) {}

void Channel::send(Segment s) {
  if (s.has_data() && spec_.loss > 0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng_) < spec_.loss) {
      ++dropped_;
      return;
    }
  }
  SimTime depart = queue_.now();
  if (spec_.bytes_per_ms > 0) {
    const double bytes = static_cast<double>(s.payload.size() + kHeaderBytes);
    const auto ser = static_cast<SimTime>(std::llround(bytes / spec_.bytes_per_ms * Delay::kPicosPerMs));
    depart = std::max(depart, busy_until_) + ser;
    busy_until_ = depart;
  }
  ++in_flight_;
  queue_.schedule(depart + spec_.delay.picos(), [this, seg = std::move(s)]() mutable {
    --in_flight_;
    receiver_(std::move(seg));
  });
}

SimTcpConn::SimTcpConn(int id, EventQueue& queue, const TcpParams& params, std::uint32_t isn_local,
                       std::uint32_t isn_remote)
    : id_(id),
      queue_(queue),
      params_(params),
      isn_local_(isn_local),
      isn_remote_(isn_remote),
      snd_una_(isn_local + 1),
      snd_nxt_(isn_local + 1),
      snd_max_(isn_local + 1),
      cwnd_(static_cast<std::uint64_t>(params.icw) * params.mss),
      ssthresh_(params.ssthresh),
      rto_(params.rto_initial.picos()),
      rcv_nxt_(isn_local + 1) {
  peer_window_ = static_cast<std::uint32_t>(std::min<std::uint64_t>(params.recv_buffer, 0xFFFFFFFFu));
  last_adv_ = peer_window_;
}

std::uint64_t SimTcpConn::send_space() const {
  return send_buf_.size() >= params_.send_buffer ? 0 : params_.send_buffer - send_buf_.size();
}

void SimTcpConn::write(std::span<const std::uint8_t> bytes) {
  send_buf_.insert(send_buf_.end(), bytes.begin(), bytes.end());
  try_send();
}

void SimTcpConn::transmit(std::uint32_t seq, std::size_t len) {
  Segment s;
  s.hdr.src_port = 443;
  s.hdr.dst_port = 50000;
  s.hdr.seq = seq;
  s.hdr.ack = isn_remote_ + 1;
  s.hdr.flags = tcp_flags::kAck | tcp_flags::kPsh;
  s.hdr.window = 65535;
  const std::size_t off = static_cast<std::uint32_t>(seq - snd_una_);
  s.payload.assign(send_buf_.begin() + static_cast<std::ptrdiff_t>(off),
                   send_buf_.begin() + static_cast<std::ptrdiff_t>(off + len));
  s.tsval = queue_.now();
  if (params_.checksums) s.hdr.checksum = tcp_checksum(s.hdr, s.payload);
  ++stats_.data_segments_sent;
  if (seq_lt(seq, snd_max_)) ++stats_.retransmitted_segments;
  emit_data(std::move(s));
}

void SimTcpConn::try_send() {
  if (queue_.now() < usable_at_) return;
  for (;;) {
    const std::uint64_t flight = this->flight();
    if (send_buf_.size() <= flight) break;
    const std::uint64_t unsent = send_buf_.size() - flight;
    const std::uint64_t wnd = std::min<std::uint64_t>(cwnd_, peer_window_);
    std::uint64_t len = std::min<std::uint64_t>(params_.mss, unsent);
    if (flight + len > wnd) {
      // A window smaller than one segment still lets a short segment out
      // when nothing is outstanding.
      if (flight == 0 && wnd > 0)
        len = wnd;
      else
        break;
    }
    transmit(snd_nxt_, len);
    snd_nxt_ += static_cast<std::uint32_t>(len);
    if (seq_gt(snd_nxt_, snd_max_)) snd_max_ = snd_nxt_;
    if (deadline_ < 0) arm_timer();
  }
  if (!round_active_ && flight() > 0) {
    round_active_ = true;
    round_end_ = snd_max_;
    round_acked_ = 0;
  }
}

void SimTcpConn::arm_timer() {
  const SimTime d = queue_.now() + rto_;
  deadline_ = d;
  if (!timer_pending_ || timer_pending_at_ > d) {
    timer_pending_ = true;
    timer_pending_at_ = d;
    const std::uint64_t token = ++timer_token_;
    queue_.schedule(d, [this, token] { timer_fired(token); });
  }
}

void SimTcpConn::timer_fired(std::uint64_t token) {
  if (token != timer_token_) return;
  timer_pending_ = false;
  if (deadline_ < 0) return;
  if (queue_.now() < deadline_) {
    timer_pending_ = true;
    timer_pending_at_ = deadline_;
    const std::uint64_t t = ++timer_token_;
    queue_.schedule(deadline_, [this, t] { timer_fired(t); });
    return;
  }
  on_timeout();
}

void SimTcpConn::on_timeout() {
  deadline_ = -1;
  if (snd_una_ == snd_max_) return;
  ++stats_.rto_events;
  const std::uint64_t flight = static_cast<std::uint32_t>(snd_max_ - snd_una_);
  ssthresh_ = std::max<std::uint64_t>(flight / 2, 2ull * params_.mss);
  cwnd_ = params_.mss;
  ca_acked_ = 0;
  dupacks_ = 0;
  in_recovery_ = false;
  rto_ = std::min(2 * rto_, params_.rto_max.picos());
  snd_nxt_ = snd_una_;  // go back N
  note("rto");
  try_send();
  if (deadline_ < 0 && snd_una_ != snd_max_) arm_timer();
}

void SimTcpConn::rtt_sample(SimTime r) {
  if (r <= 0) return;
  if (!have_rtt_) {
    have_rtt_ = true;
    srtt_ = r;
    rttvar_ = r / 2;
    min_rtt_ = r;
  } else {
    const SimTime err = srtt_ > r ? srtt_ - r : r - srtt_;
    rttvar_ = (3 * rttvar_ + err) / 4;
    srtt_ = (7 * srtt_ + r) / 8;
    min_rtt_ = std::min(min_rtt_, r);
  }
  SimTime rto = srtt_ + std::max(params_.granularity.picos(), 4 * rttvar_);
  rto = std::max(rto, params_.rto_min.picos());
  rto_ = std::min(rto, params_.rto_max.picos());
}

void SimTcpConn::on_ack_segment(const Segment& s) {
  if (params_.checksums && !checksum_valid(s.hdr, s.payload)) {
    ++stats_.bad_checksums;
    return;
  }
  if (s.hdr.seq != isn_remote_ + 1) ++stats_.header_anomalies;
  const std::uint32_t ack = s.hdr.ack;
  if (seq_gt(ack, snd_max_) || seq_lt(ack, snd_una_)) {
    ++stats_.header_anomalies;
    return;
  }
  const std::uint32_t old_window = peer_window_;
  peer_window_ = s.hdr.window;

  if (seq_gt(ack, snd_una_)) {
    const std::uint64_t acked = static_cast<std::uint32_t>(ack - snd_una_);
    send_buf_.erase(send_buf_.begin(), send_buf_.begin() + static_cast<std::ptrdiff_t>(acked));
    snd_una_ = ack;
    if (seq_lt(snd_nxt_, snd_una_)) snd_nxt_ = snd_una_;
    dupacks_ = 0;
    if (s.tsecr > 0) rtt_sample(queue_.now() - s.tsecr);

    if (in_recovery_) {
      if (seq_geq(ack, recover_)) {
        in_recovery_ = false;
        cwnd_ = ssthresh_;
      } else {
        transmit(snd_una_, std::min<std::uint64_t>(params_.mss, static_cast<std::uint32_t>(snd_max_ - snd_una_)));
      }
    } else if (cwnd_ < ssthresh_) {
      cwnd_ += std::min<std::uint64_t>(acked, 2ull * params_.mss);
    } else {
      ca_acked_ += acked;
      if (ca_acked_ >= cwnd_) {
        ca_acked_ -= cwnd_;
        cwnd_ += params_.mss;
      }
    }

    if (round_active_) {
      round_acked_ += acked;
      if (seq_geq(snd_una_, round_end_)) {
        rounds_.push_back(round_acked_);
        round_acked_ = 0;
        round_active_ = flight() > 0;
        round_end_ = snd_max_;
      }
    }

    if (snd_una_ == snd_max_)
      stop_timer();
    else
      arm_timer();
    if (on_send_space) on_send_space();
  } else if (!s.has_data() && s.hdr.window == old_window && snd_una_ != snd_max_) {
    if (++dupacks_ == 3 && !in_recovery_) {
      const std::uint64_t flight = static_cast<std::uint32_t>(snd_max_ - snd_una_);
      ssthresh_ = std::max<std::uint64_t>(flight / 2, 2ull * params_.mss);
      cwnd_ = ssthresh_;
      in_recovery_ = true;
      recover_ = snd_max_;
      ++stats_.fast_retransmits;
      note("fast_retransmit");
      transmit(snd_una_, std::min<std::uint64_t>(params_.mss, flight));
    }
  }
  try_send();
}

std::uint32_t SimTcpConn::advertised_window() const {
  if (window_closed_) return 0;
  const std::uint64_t used = ready_.size() + ooo_bytes_;
  const std::uint64_t free = used >= params_.recv_buffer ? 0 : params_.recv_buffer - used;
  return static_cast<std::uint32_t>(std::min<std::uint64_t>(free, 0xFFFFFFFFu));
}

void SimTcpConn::send_ack_now() {
  Segment a;
  a.hdr.src_port = 50000;
  a.hdr.dst_port = 443;
  a.hdr.seq = isn_remote_ + 1;
  a.hdr.ack = rcv_nxt_;
  a.hdr.flags = tcp_flags::kAck;
  a.hdr.window = advertised_window();
  a.tsval = queue_.now();
  a.tsecr = ts_recent_;
  if (params_.checksums) a.hdr.checksum = tcp_checksum(a.hdr, a.payload);
  last_adv_ = a.hdr.window;
  ++stats_.acks_sent;
  emit_ack(std::move(a));
}

void SimTcpConn::on_data_segment(const Segment& s) {
  if (params_.checksums && !checksum_valid(s.hdr, s.payload)) {
    ++stats_.bad_checksums;
    return;
  }
  if (s.hdr.ack != isn_remote_ + 1) ++stats_.header_anomalies;
  const std::uint64_t len = s.payload.size();
  const std::int64_t off = static_cast<std::int64_t>(rcv_off_) + seq_diff(s.hdr.seq, rcv_nxt_);
  if (off < 0) {
    ++stats_.header_anomalies;
    return;
  }
  const auto uoff = static_cast<std::uint64_t>(off);
  const std::uint64_t end = uoff + len;
  if (end <= rcv_off_) {
    ++stats_.duplicate_segments;
    send_ack_now();
    return;
  }
  if (uoff > rcv_off_) {
    auto it = ooo_.find(uoff);
    if (it != ooo_.end() && it->second.size() >= len) {
      ++stats_.duplicate_segments;
    } else {
      if (it != ooo_.end()) ooo_bytes_ -= it->second.size();
      ooo_[uoff] = s.payload;
      ooo_bytes_ += len;
    }
    send_ack_now();
    return;
  }

  if (uoff < rcv_off_) ++stats_.duplicate_segments;
  const std::size_t skip = rcv_off_ - uoff;
  ready_.insert(ready_.end(), s.payload.begin() + static_cast<std::ptrdiff_t>(skip), s.payload.end());
  rcv_nxt_ += static_cast<std::uint32_t>(end - rcv_off_);
  stats_.bytes_delivered += end - rcv_off_;
  rcv_off_ = end;
  ts_recent_ = s.tsval;
  while (!ooo_.empty() && ooo_.begin()->first <= rcv_off_) {
    auto node = ooo_.extract(ooo_.begin());
    const std::uint64_t seg_off = node.key();
    const auto& bytes = node.mapped();
    ooo_bytes_ -= bytes.size();
    if (seg_off + bytes.size() > rcv_off_) {
      const std::size_t k = rcv_off_ - seg_off;
      ready_.insert(ready_.end(), bytes.begin() + static_cast<std::ptrdiff_t>(k), bytes.end());
      rcv_nxt_ += static_cast<std::uint32_t>(bytes.size() - k);
      stats_.bytes_delivered += bytes.size() - k;
      rcv_off_ = seg_off + bytes.size();
    }
  }
  in_receive_ = true;
  if (on_readable) on_readable();
  in_receive_ = false;
  send_ack_now();
}

std::size_t SimTcpConn::read(std::vector<std::uint8_t>& out, std::size_t max) {
  const std::size_t n = std::min(max, ready_.size());
  out.insert(out.end(), ready_.begin(), ready_.begin() + static_cast<std::ptrdiff_t>(n));
  ready_.erase(ready_.begin(), ready_.begin() + static_cast<std::ptrdiff_t>(n));
  if (n > 0 && !in_receive_) {
    // Receiver-side silly window avoidance: announce the window once it has
    // opened by a useful amount.
    const std::uint64_t step = std::min<std::uint64_t>(params_.recv_buffer / 2, 2ull * params_.mss);
    if (advertised_window() >= static_cast<std::uint64_t>(last_adv_) + step) send_ack_now();
  }
  return n;
}

void SimTcpConn::set_window_closed(bool closed) {
  if (window_closed_ == closed) return;
  window_closed_ = closed;
  send_ack_now();
}

bool detect_slowstart_end(const SimTcpConn& conn, double growth_threshold) {
  if (conn.cwnd() >= conn.ssthresh()) return true;
  const auto& r = conn.round_history();
  if (r.size() < 2) return false;
  const std::uint64_t prev = r[r.size() - 2];
  if (prev == 0) return false;
  return static_cast<double>(r.back()) < growth_threshold * static_cast<double>(prev);
}

}  // namespace mosto
