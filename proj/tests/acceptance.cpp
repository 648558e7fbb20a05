// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <fmt/format.h>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "controller.hpp"
#include "pareto.hpp"
#include "scenario.hpp"
#include "seq_translation.hpp"
#include "simulator.hpp"
#include "support/oracles.hpp"
#include "topology.hpp"
#include "transfer_model.hpp"

using namespace mosto;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& check) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, fmt::format("exception: {}", e.what())};
  }
  fmt::print("{} [{}] {}: {} ({:.2f} s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail, seconds_since(t0));
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

// Every test topology for the selection criteria: the sample graph, random
// graphs and the 115-node backbone.
std::vector<DistanceMatrix> test_topologies() {
  std::vector<DistanceMatrix> out;
  out.push_back(build_full_mesh(ProxyGraph::load(std::string(MOSTO_DATA_DIR) + "/topologies/us6.topo")));
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 5 + static_cast<std::size_t>(rng() % 36);
    out.push_back(build_full_mesh(oracle::random_graph(n, 0.15, 0.5, 120.0, t % 2 ? 1.0 : 0.001, rng)));
  }
  out.push_back(build_full_mesh(oracle::synthetic_backbone(115, 115)));
  return out;
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  int seeds = 0, mismatches = 0;
  std::size_t entries = 0;
  for (std::uint64_t seed = 1; seed <= 240; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = 2 + seed % 7;
    // Coarse resolution on odd seeds forces ties between paths.
    auto d = build_full_mesh(oracle::random_graph(n, 0.4, 1.0, 50.0, seed % 2 ? 1.0 : 0.01, rng));
    const auto base = pareto_baseline(d);
    const auto opt = pareto_optimized(d);
    const auto brute = oracle::brute_force_front(d);
    if (!(base == opt && opt == brute)) ++mismatches;
    entries += opt.entry_count();
    ++seeds;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && seeds >= 200 && secs < 60,
          fmt::format("{} seeds, n 2..8, {} front entries, {} mismatches, {:.1f} s of 60", seeds, entries, mismatches,
                      secs)};
}

Outcome scaling_run() {
  const auto d = build_full_mesh(oracle::synthetic_backbone(115, 115));
  ParetoStats stats;
  const auto t0 = Clock::now();
  const auto f = pareto_optimized(d, &stats);
  const double secs = seconds_since(t0);
  f.validate(d);
  return {secs <= 10.0, fmt::format("115 locations, {} links, {} entries, {:.3f} s (gate 10 s, stretch 1 s {})",
                                    d.link_count(), stats.entries, secs, secs < 1.0 ? "met" : "missed")};
}

Outcome one_round_optimality() {
  std::size_t pairs = 0, wrong = 0;
  for (const auto& d : test_topologies()) {
    const auto f = pareto_optimized(d);
    for (NodeId i = 0; i < d.size(); ++i)
      for (NodeId j = 0; j < d.size(); ++j) {
        if (i == j) continue;
        ++pairs;
        if (select_chain(f.at(i, j), 1).length != d.at(i, j)) ++wrong;
      }
  }
  return {wrong == 0, fmt::format("{} ordered pairs, {} with length != d", pairs, wrong)};
}

Outcome dominance() {
  std::size_t rows = 0, negative = 0;
  double best_vs_shortest = 0, best_vs_minimax = 0;
  for (const auto& d : test_topologies()) {
    const auto f = pareto_optimized(d);
    for (int r : {1, 5, 10}) {
      for (NodeId i = 0; i < d.size(); ++i)
        for (NodeId j = 0; j < d.size(); ++j) {
          if (i == j) continue;
          const Delay sel = chain_time_doubled(select_chain(f.at(i, j), r), r);
          const Delay sp = chain_time_doubled(shortest_path(f, i, j), r);
          const Delay mm = chain_time_doubled(minimax_path(f, i, j), r);
          ++rows;
          if (sp < sel || mm < sel) ++negative;
          best_vs_shortest = std::max(best_vs_shortest, static_cast<double>((sp - sel).picos()) / static_cast<double>(sel.picos()));
          best_vs_minimax = std::max(best_vs_minimax, static_cast<double>((mm - sel).picos()) / static_cast<double>(sel.picos()));
        }
    }
  }
  return {negative == 0, fmt::format("{} (pair, r) rows, {} negative; max improvement {:.1f}% over shortest, {:.1f}% "
                                     "over minimax",
                                     rows, negative, 100 * best_vs_shortest, 100 * best_vs_minimax)};
}

Outcome model_agreement() {
  const auto t0 = Clock::now();
  const auto d = build_full_mesh(oracle::synthetic_backbone(115, 7));
  const TransferModel m;
  std::mt19937_64 rng(99);
  int runs = 0, outside = 0;
  double worst = 0;
  for (; runs < 150; ++runs) {
    const std::size_t hops = 2 + rng() % 4;
    std::vector<NodeId> nodes;
    while (nodes.size() < hops + 1) {
      const auto v = static_cast<NodeId>(rng() % d.size());
      if (std::find(nodes.begin(), nodes.end(), v) == nodes.end()) nodes.push_back(v);
    }
    const auto chain = make_path(d, nodes);
    // A size that needs exactly r rounds.
    const int r = 1 + static_cast<int>(rng() % 10);
    const std::uint64_t unit = static_cast<std::uint64_t>(m.icw) * m.mss;
    const std::uint64_t lo = unit * ((1ull << (r - 1)) - 1) + 1, hi = unit * ((1ull << r) - 1);
    const std::uint64_t size = lo + rng() % (hi - lo + 1);
    if (rounds_for_size(size, m) != r) throw std::logic_error("size generator is off");
    const double modeled = chain_time_ms(chain, r);
    const double simulated = simulate_chain_transfer(chain, size, d, m);
    const double err = std::abs(simulated - modeled) / modeled;
    worst = std::max(worst, err);
    if (err > 0.05) ++outside;
  }
  const double secs = seconds_since(t0);
  return {outside == 0 && runs >= 100 && secs < 120,
          fmt::format("{} chains of 2-5 hops, 1-10 rounds; worst relative error {:.2e} (limit 5%), {} outside",
                      runs, worst, outside)};
}

Outcome round_anchors() {
  const TransferModel m;
  const int a = rounds_for_size(14600, m), b = rounds_for_size(450000, m), c = rounds_for_size(14935000, m);
  return {a == 1 && b == 5 && c == 10, fmt::format("14600 B -> {}, 450000 B -> {}, 14935000 B -> {}", a, b, c)};
}

Outcome offload_correctness() {
  auto load = [](const char* file) { return load_scenario(std::string(MOSTO_DATA_DIR) + "/scenarios/" + file); };
  const auto ramp = load("offload-ramp.scn");
  const auto noramp = load("offload-noramp.scn");
  auto run = [](const Scenario& s, std::uint64_t seed) {
    auto cfg = s.sim;
    cfg.seed = seed;
    return simulate(s.hops, s.size, cfg, s.offload);
  };
  bool ok = true;
  std::uint64_t spurious = 0, rtos_off = 0;
  int offloaded = 0;
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8};
  for (auto seed : seeds) {
    const auto on = run(ramp, seed);
    spurious += on.retransmissions + on.duplicate_segments;
    offloaded += on.offload.offloaded;
    ok &= on.completed && on.stream_intact && on.offload.offloaded && on.retransmissions == 0 &&
          on.duplicate_segments == 0 && on.offload.proxy_segments_after_offload == 0;
    const auto off = run(noramp, seed);
    rtos_off += off.rto_events;
    ok &= off.completed && off.stream_intact && off.offload.offloaded && off.rto_events >= 1;
  }
  const auto a = run(ramp, 42), b = run(ramp, 42);
  const auto c = run(noramp, 42), e = run(noramp, 42);
  const bool deterministic = a.events == b.events && a.completion_ms == b.completion_ms &&
                             a.offload.offload_ms == b.offload.offload_ms && c.events == e.events &&
                             c.retransmissions == e.retransmissions && c.completion_ms == e.completion_ms;
  return {ok && deterministic,
          fmt::format("{} seeds: ramp on {} offloaded, {} spurious retransmissions, streams bit-exact; ramp off {} "
                      "RTOs total; repeat runs {}",
                      seeds.size(), offloaded, spurious, rtos_off, deterministic ? "identical" : "differ")};
}

Outcome sequence_translation() {
  std::mt19937_64 rng(77);
  int bad = 0, wrapped = 0;
  for (int k = 0; k < 100000; ++k) {
    TcpHeader h;
    h.src_port = static_cast<std::uint16_t>(rng());
    h.dst_port = static_cast<std::uint16_t>(rng());
    h.seq = k % 3 == 0 ? static_cast<std::uint32_t>(0xFFFFFFFFu - rng() % 100000) : static_cast<std::uint32_t>(rng());
    h.ack = static_cast<std::uint32_t>(rng());
    h.flags = tcp_flags::kAck;
    h.window = static_cast<std::uint32_t>(rng() % 65536);
    std::vector<std::uint8_t> payload(rng() % 1461);
    for (auto& byte : payload) byte = static_cast<std::uint8_t>(rng());
    h.checksum = tcp_checksum(h, payload);
    const SeqTranslation t{static_cast<std::uint32_t>(rng()), static_cast<std::uint32_t>(rng())};
    const Direction dir = k % 2 ? Direction::Forward : Direction::Reverse;
    const auto out = translate_segment(h, t, dir);
    const std::uint64_t shift = dir == Direction::Forward ? t.delta_fwd : t.delta_rev;
    const std::uint64_t full = std::uint64_t{h.seq} + shift;
    wrapped += full >= (1ull << 32);
    if (out.seq != static_cast<std::uint32_t>(full % (1ull << 32))) ++bad;
    if (!checksum_valid(out, payload)) ++bad;
    if (untranslate_segment(out, t, dir) != h) ++bad;
  }
  return {bad == 0, fmt::format("100000 segments, {} wrapped past 2^32, {} failures", wrapped, bad)};
}

Outcome controller_properties() {
  std::vector<std::string> problems;
  auto expect = [&](bool cond, const char* what) {
    if (!cond) problems.emplace_back(what);
  };
  const auto d = build_full_mesh(ProxyGraph::load(std::string(MOSTO_DATA_DIR) + "/topologies/us6.topo"));
  ControllerConfig cfg;
  cfg.topology_path = "unused";
  cfg.period = Delay::from_ms(600000);
  cfg.dirty_trigger = 1000;

  // Threshold suppression on a scripted stream.
  {
    Controller c(d, cfg);
    std::istringstream in(
        "rtt 0 1 27\n"     // 25 -> 27: 8%, suppressed
        "rtt 0 1 27.5\n"   // exactly 10%, suppressed
        "rtt 1 2 21.9\n"   // 9.5%, suppressed
        "rtt 2 3 30\n"     // applied
        "rtt 2 3 30\n"     // identical repeat, no change
        "rtt 4 5 8\n"      // applied
        "rtt 4 5 8.9\n");  // 11% but under the 1 ms floor, suppressed
    c.run(in);
    const auto s = c.current();
    expect(s->matrix.at(0, 1) == Delay::from_ms(25), "0-1 should stay at 25 ms");
    expect(s->matrix.at(1, 2) == Delay::from_ms(20), "1-2 should stay at 20 ms");
    expect(s->matrix.at(2, 3) == Delay::from_ms(30) && s->matrix.at(3, 2) == Delay::from_ms(30), "2-3 not applied");
    expect(s->matrix.at(5, 4) == Delay::from_ms(8), "4-5 not applied");
    expect(s->generation == 2, "expected one initial and one final generation");
    // The same stream again leaves nothing dirty.
    std::istringstream again("rtt 2 3 30\nrtt 4 5 8\n");
    for (std::string line; std::getline(again, line);) {
      const auto r = parse_rtt_report(line);
      expect(!c.apply_update(r.i, r.j, r.rtt), "repeated measurement applied twice");
    }
    // Recompute is a pure function of the matrix.
    Controller twin(c.matrix(), cfg);
    expect(twin.recompute_cycle()->table.same_content(s->table), "recompute is not reproducible");
  }

  // Atomic snapshots under concurrent readers.
  std::uint64_t reads = 0, torn = 0;
  {
    std::mt19937_64 rng(3);
    const std::size_t n = 20;
    Controller c(oracle::random_matrix(n, 80, rng), cfg);
    c.recompute_cycle();
    std::atomic<bool> done{false};
    std::atomic<std::uint64_t> reads_a{0}, torn_a{0};
    std::vector<std::thread> readers;
    for (int k = 0; k < 4; ++k) {
      readers.emplace_back([&, k] {
        std::mt19937_64 local(k + 100);
        std::uint64_t last = 0;
        while (!done.load()) {
          const auto s = c.current();
          bool bad = s->generation < last;
          bad |= s->table.generation() != s->generation;
          const auto i = static_cast<NodeId>(local() % n);
          const auto j = static_cast<NodeId>((i + 1 + local() % (n - 1)) % n);
          for (int r : {1, 5}) {
            const auto& e = s->table.lookup(i, j, r);
            bad |= e.modeled_ms != chain_time_ms(make_path(s->matrix, e.hops), r);
          }
          last = s->generation;
          torn_a += bad;
          ++reads_a;
        }
      });
    }
    std::string script;
    for (int u = 0; u < 60; ++u) {
      const auto i = rng() % n, j = (i + 1 + rng() % (n - 1)) % n;
      script += fmt::format("rtt {} {} {}\n", i, j, 1 + rng() % 150);
    }
    auto sc = cfg;
    sc.dirty_trigger = 1;
    Controller scripted(c.matrix(), sc);
    // Drive the shared controller with the same script, one cycle per report.
    std::istringstream in(script);
    std::uint64_t last_gen = c.current()->generation;
    for (std::string line; std::getline(in, line);) {
      const auto r = parse_rtt_report(line);
      c.apply_update(r.i, r.j, r.rtt);
      const auto g = c.recompute_cycle()->generation;
      expect(g == last_gen + 1, "generations must increase by one");
      last_gen = g;
    }
    done = true;
    for (auto& t : readers) t.join();
    reads = reads_a;
    torn = torn_a;
    expect(torn == 0, "a reader saw an inconsistent snapshot");
    expect(reads > 0, "readers never ran");
    std::istringstream in2(script);
    scripted.run(in2);
    expect(scripted.matrix() == c.matrix(), "run() and direct updates disagree on the final matrix");
  }
  std::string detail = fmt::format("suppression, idempotence, reproducibility; {} concurrent reads, {} torn", reads, torn);
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

}  // namespace

int main() {
  report(1, "oracle equivalence", oracle_equivalence);
  report(2, "115-node scaling", scaling_run);
  report(3, "one-round optimality", one_round_optimality);
  report(4, "dominance over shortest and minimax", dominance);
  report(5, "model vs simulator", model_agreement);
  report(6, "round anchors", round_anchors);
  report(7, "offload correctness", offload_correctness);
  report(8, "sequence translation", sequence_translation);
  report(9, "controller threshold and snapshots", controller_properties);
  return failures ? 1 : 0;
}
