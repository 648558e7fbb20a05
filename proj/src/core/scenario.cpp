#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "error.hpp"
#include "text.hpp"

namespace mosto {

namespace {

struct Entry {
  std::string value;
  int line;
};

double number(const Entry& e, const std::string& key) {
  double v = 0;
  if (!parse_double(trim(e.value), v) || std::isnan(v))
    throw InputError(fmt::format("{}: expected a number, got '{}'", key, e.value), e.line);
  return v;
}

std::uint64_t count(const Entry& e, const std::string& key) {
  std::uint64_t v = 0;
  const auto s = trim(e.value);
  if (s == "inf") return kUnlimited;
  if (!parse_int(s, v)) throw InputError(fmt::format("{}: expected a non-negative integer, got '{}'", key, e.value), e.line);
  return v;
}

bool flag(const Entry& e, const std::string& key) {
  const auto s = trim(e.value);
  if (s == "on" || s == "true" || s == "1") return true;
  if (s == "off" || s == "false" || s == "0") return false;
  throw InputError(fmt::format("{}: expected on/off, got '{}'", key, e.value), e.line);
}

Delay ms_value(const Entry& e, const std::string& key) {
  const double v = number(e, key);
  if (!(v > 0) || !std::isfinite(v)) throw InputError(fmt::format("{} must be positive", key), e.line);
  return Delay::from_ms(v);
}

std::vector<double> number_list(const Entry& e, const std::string& key) {
  std::vector<double> out;
  for (auto tok : split(e.value, ',')) {
    tok = trim(tok);
    double v = 0;
    if (tok == "inf")
      v = INFINITY;
    else if (!parse_double(tok, v) || std::isnan(v))
      throw InputError(fmt::format("{}: expected a number, got '{}'", key, tok), e.line);
    out.push_back(v);
  }
  return out;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  std::map<std::string, Entry> kv;
  int line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw InputError(fmt::format("expected key = value, got '{}'", line), line_no);
    std::string key(trim(line.substr(0, eq)));
    if (!kv.emplace(key, Entry{std::string(trim(line.substr(eq + 1))), line_no}).second)
      throw InputError(fmt::format("duplicate key '{}'", key), line_no);
  }

  static const char* known[] = {"mode",         "rtt_ms",         "bandwidth_mbps", "loss",        "size",
                                "mss",          "icw",            "ssthresh",       "recv_buffer", "proxy_buffer",
                                "rto_min_ms",   "rto_initial_ms", "handshake",      "checksums",   "seed",
                                "ramp",         "ramp_step_ms",   "hold_ms",        "sample_ms",   "ss_growth",
                                "max_events",   "clock_granularity_ms"};
  for (const auto& [k, e] : kv) {
    if (std::find(std::begin(known), std::end(known), k) == std::end(known))
      throw InputError(fmt::format("unknown key '{}'", k), e.line);
  }
  auto get = [&](const char* k) -> const Entry* {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };

  Scenario s;
  const Entry* rtt = get("rtt_ms");
  if (!rtt) throw InputError("scenario needs rtt_ms");
  for (double v : number_list(*rtt, "rtt_ms")) {
    if (!(v > 0) || !std::isfinite(v)) throw InputError("rtt_ms values must be positive and finite", rtt->line);
    s.hops.push_back(HopSpec{Delay::from_ms(v)});
  }
  if (const Entry* e = get("bandwidth_mbps")) {
    auto v = number_list(*e, "bandwidth_mbps");
    if (v.size() != s.hops.size()) throw InputError("bandwidth_mbps needs one value per hop", e->line);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] > 0)) throw InputError("bandwidth_mbps values must be positive", e->line);
      s.hops[i].bytes_per_ms = std::isinf(v[i]) ? 0.0 : v[i] * 125.0;
    }
  }
  if (const Entry* e = get("loss")) {
    auto v = number_list(*e, "loss");
    if (v.size() != s.hops.size()) throw InputError("loss needs one value per hop", e->line);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] >= 0 && v[i] < 1)) throw InputError("loss values must be in [0, 1)", e->line);
      s.hops[i].loss = v[i];
    }
  }
  const Entry* size = get("size");
  if (!size) throw InputError("scenario needs size");
  s.size = count(*size, "size");
  if (s.size == 0 || s.size >= kUnlimited) throw InputError("size must be a positive byte count", size->line);

  if (const Entry* e = get("mss")) s.sim.mss = static_cast<std::uint32_t>(count(*e, "mss"));
  if (const Entry* e = get("icw")) s.sim.icw = static_cast<std::uint32_t>(count(*e, "icw"));
  if (s.sim.mss == 0 || s.sim.mss > 65535) throw InputError("mss out of range");
  if (s.sim.icw == 0 || s.sim.icw > 1000) throw InputError("icw out of range");
  if (const Entry* e = get("ssthresh")) s.sim.ssthresh = count(*e, "ssthresh");
  if (const Entry* e = get("recv_buffer")) s.sim.recv_buffer = count(*e, "recv_buffer");
  if (const Entry* e = get("proxy_buffer")) s.sim.proxy_buffer = count(*e, "proxy_buffer");
  if (s.sim.recv_buffer == 0 || s.sim.proxy_buffer == 0) throw InputError("buffers must be non-empty");
  if (const Entry* e = get("rto_min_ms")) s.sim.rto_min = ms_value(*e, "rto_min_ms");
  if (const Entry* e = get("rto_initial_ms")) s.sim.rto_initial = ms_value(*e, "rto_initial_ms");
  if (const Entry* e = get("clock_granularity_ms")) s.sim.clock_granularity = ms_value(*e, "clock_granularity_ms");
  if (const Entry* e = get("handshake")) s.sim.handshake = flag(*e, "handshake");
  if (const Entry* e = get("checksums")) s.sim.checksums = flag(*e, "checksums");
  if (const Entry* e = get("seed")) s.sim.seed = count(*e, "seed");
  if (const Entry* e = get("sample_ms")) s.sim.sample_interval = ms_value(*e, "sample_ms");
  if (const Entry* e = get("ss_growth")) s.sim.ss_growth_threshold = number(*e, "ss_growth");
  if (const Entry* e = get("max_events")) s.sim.max_events = count(*e, "max_events");

  std::string mode = "chain";
  if (const Entry* e = get("mode")) mode = e->value;
  if (mode == "offload") {
    s.offload.enabled = true;
    s.sim.checksums = true;
    if (const Entry* e = get("checksums")) s.sim.checksums = flag(*e, "checksums");
    if (s.hops.size() != 2) throw InputError("offload mode needs exactly two hops (server-proxy, proxy-client)");
  } else if (mode != "chain") {
    throw InputError(fmt::format("mode must be chain or offload, got '{}'", mode), get("mode")->line);
  }
  if (const Entry* e = get("ramp")) s.offload.ramp = flag(*e, "ramp");
  if (const Entry* e = get("ramp_step_ms")) s.offload.ramp_step = ms_value(*e, "ramp_step_ms");
  if (const Entry* e = get("hold_ms")) s.offload.hold = ms_value(*e, "hold_ms");
  s.sim.trace = true;
  return s;
}

Scenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

std::string format_summary(const SimResult& r) {
  std::string out;
  out += fmt::format("completed: {}\n", r.completed ? "yes" : "no");
  out += fmt::format("completion_ms: {:.3f}\n", r.completion_ms);
  out += fmt::format("bytes_delivered: {}\n", r.delivered);
  out += fmt::format("stream_intact: {}\n", r.stream_intact ? "yes" : "no");
  out += fmt::format("retransmissions: {}\n", r.retransmissions);
  out += fmt::format("rto_events: {}\n", r.rto_events);
  out += fmt::format("duplicate_segments: {}\n", r.duplicate_segments);
  out += fmt::format("bad_checksums: {}\n", r.bad_checksums);
  if (!r.offload.history.empty()) {
    const auto& o = r.offload;
    out += fmt::format("offloaded: {}\n", o.offloaded ? "yes" : "no");
    out += fmt::format("ss_ended_ms: {:.3f}\n", o.ss_ended_ms);
    out += fmt::format("offload_ms: {:.3f}\n", o.offload_ms);
    out += fmt::format("ramp_target_ms: {}\n", o.target_ms);
    out += fmt::format("ramp_steps: {}\n", o.injected_ms.size());
    out += fmt::format("proxy_segments_after_offload: {}\n", o.proxy_segments_after_offload);
    out += fmt::format("goodput_pre_mbps: {:.3f}\n", o.goodput_pre_bps / 1e6);
    out += fmt::format("goodput_post_mbps: {:.3f}\n", o.goodput_post_bps / 1e6);
  }
  return out;
}

}  // namespace mosto
