#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "error.hpp"
#include "pareto.hpp"
#include "support/oracles.hpp"
#include "topology.hpp"

using namespace mosto;

namespace {

std::vector<NodeId> hops(std::initializer_list<NodeId> h) { return h; }

// Records, for every iteration, the literal candidate sets and which pairs
// changed relative to the previous iteration.
class LemmaRecorder : public IterationObserver {
 public:
  explicit LemmaRecorder(std::size_t n) : prev_(n) {}

  void on_iteration(std::size_t h, const SortedLink& link, const AbSets* sets, const PathDp& state) override {
    ++iterations;
    const auto literal = compute_ab_sets(link, state);
    std::set<NodeId> a(literal.a_set.begin(), literal.a_set.end());
    std::set<NodeId> b(literal.b_set.begin(), literal.b_set.end());
    for (NodeId p : a)
      if (b.count(p)) ++intersecting;
    if (sets) {
      if (sets->a_set != literal.a_set || sets->b_set != literal.b_set) ++set_mismatches;
      checks += 2ull * sets->a_set.size() * sets->b_set.size();
    }
    const auto n = static_cast<NodeId>(state.size());
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = 0; j < n; ++j) {
        if (state.path(i, j) == prev_.path(i, j)) continue;
        ++changes;
        const bool covered = (a.count(i) && b.count(j)) || (b.count(i) && a.count(j));
        if (!covered) ++uncovered;
        if (!state.path_traverses(i, j, link.a, link.b) && !state.path_traverses(i, j, link.b, link.a)) ++not_via_link;
      }
    }
    prev_ = state;
    last_h = h;
  }

  std::size_t iterations = 0, last_h = 0, changes = 0, uncovered = 0, not_via_link = 0, intersecting = 0,
              set_mismatches = 0;
  std::uint64_t checks = 0;

 private:
  PathDp prev_;
};

}  // namespace

TEST_SUITE("pareto") {
  TEST_CASE("sorted links order by distance then endpoints") {
    auto d = DistanceMatrix::from_ms(3, {0, 2, 1, 2, 0, 1, 1, 1, 0});
    auto l = sorted_links(d);
    REQUIRE(l.size() == 3);
    CHECK(l[0] == SortedLink{0, 2, Delay::from_ms(1)});
    CHECK(l[1] == SortedLink{1, 2, Delay::from_ms(1)});
    CHECK(l[2] == SortedLink{0, 1, Delay::from_ms(2)});
  }

  TEST_CASE("two-entry front on a triangle") {
    // 0-1-2 is longer but has the smaller bottleneck.
    auto d = DistanceMatrix::from_ms(3, {0, 10, 15, 10, 0, 10, 15, 10, 0});
    for (auto f : {pareto_baseline(d), pareto_optimized(d)}) {
      const auto& l = f.at(0, 2);
      REQUIRE(l.size() == 2);
      CHECK(l[0].hops == hops({0, 1, 2}));
      CHECK(l[0].max_link == Delay::from_ms(10));
      CHECK(l[0].length == Delay::from_ms(20));
      CHECK(l[1].hops == hops({0, 2}));
      CHECK(l[1].length == Delay::from_ms(15));
      CHECK(f.at(2, 0)[0].hops == hops({2, 1, 0}));
      CHECK(minimax_path(f, 0, 2).hops == hops({0, 1, 2}));
      CHECK(shortest_path(f, 0, 2).hops == hops({0, 2}));
    }
  }

  TEST_CASE("dominated direct link gives a single entry") {
    auto d = DistanceMatrix::from_ms(3, {0, 1, 3, 1, 0, 1, 3, 1, 0});
    auto f = pareto_optimized(d);
    REQUIRE(f.at(0, 2).size() == 1);
    CHECK(f.at(0, 2)[0].hops == hops({0, 1, 2}));
  }

  TEST_CASE("equal paths resolve to fewer hops, then the smaller sequence") {
    // 0-1-3 and 0-2-3 both have length 2 and bottleneck 1.
    DistanceMatrix d(4);
    d.set(0, 1, Delay::from_ms(1));
    d.set(1, 3, Delay::from_ms(1));
    d.set(0, 2, Delay::from_ms(1));
    d.set(2, 3, Delay::from_ms(1));
    d.set(0, 3, Delay::from_ms(2));
    d.set(1, 2, Delay::from_ms(9));
    for (auto f : {pareto_baseline(d), pareto_optimized(d)}) {
      // The direct link is no shorter, so it never becomes an entry.
      REQUIRE(f.at(0, 3).size() == 1);
      CHECK(f.at(0, 3)[0].hops == hops({0, 1, 3}));
      CHECK(f.at(3, 0)[0].hops == hops({3, 1, 0}));
    }
  }

  TEST_CASE("matches exhaustive enumeration on random graphs") {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 40; ++t) {
      const std::size_t n = 2 + static_cast<std::size_t>(rng() % 6);
      auto d = build_full_mesh(oracle::random_graph(n, 0.3, 1.0, 60.0, 1.0, rng));
      const auto expect = oracle::brute_force_front(d);
      CHECK(pareto_baseline(d) == expect);
      CHECK(pareto_optimized(d) == expect);
    }
  }

  TEST_CASE("matches exhaustive enumeration on tie-heavy non-metric matrices") {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 40; ++t) {
      const std::size_t n = 2 + static_cast<std::size_t>(rng() % 6);
      auto d = oracle::random_matrix(n, 4, rng);
      const auto expect = oracle::brute_force_front(d);
      CHECK(pareto_baseline(d) == expect);
      CHECK(pareto_optimized(d) == expect);
    }
  }

  TEST_CASE("fronts are valid Pareto lists") {
    std::mt19937_64 rng(5);
    auto d = build_full_mesh(oracle::random_graph(40, 0.05, 1.0, 150.0, 0.1, rng));
    auto f = pareto_optimized(d);
    CHECK_NOTHROW(f.validate(d));
    CHECK(f == pareto_baseline(d));
  }

  TEST_CASE("front text round trip") {
    std::mt19937_64 rng(8);
    auto d = build_full_mesh(oracle::random_graph(12, 0.2, 1.0, 90.0, 0.25, rng));
    auto f = pareto_optimized(d);
    std::stringstream ss;
    f.write(ss);
    CHECK(ParetoFront::read(ss, d) == f);
    std::stringstream bad("pair 0 1 maxlink 1 length 1 hops 3 path 0,1\n");
    CHECK_THROWS_AS(ParetoFront::read(bad, d), InputError);
  }

  TEST_CASE("validate rejects broken fronts") {
    auto d = DistanceMatrix::from_ms(3, {0, 10, 15, 10, 0, 10, 15, 10, 0});
    auto f = pareto_optimized(d);
    auto swapped = f;
    std::swap(swapped.at(0, 2)[0], swapped.at(0, 2)[1]);
    CHECK_THROWS_AS(swapped.validate(d), InvariantError);
    auto wrong = f;
    wrong.at(0, 2)[0].length = Delay::from_ms(1);
    CHECK_THROWS_AS(wrong.validate(d), InvariantError);
    auto empty = f;
    empty.at(1, 2).clear();
    CHECK_THROWS_AS(empty.validate(d), InvariantError);
  }

  TEST_CASE("candidate sets: fast computation equals the literal definition") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 30; ++t) {
      const std::size_t n = 2 + static_cast<std::size_t>(rng() % 14);
      auto d = t % 2 ? oracle::random_matrix(n, 5, rng)
                     : build_full_mesh(oracle::random_graph(n, 0.2, 1.0, 50.0, 1.0, rng));
      LemmaRecorder rec(n);
      ParetoStats st;
      pareto_optimized(d, &st, &rec);
      CHECK(rec.iterations == d.link_count());
      CHECK(rec.set_mismatches == 0);
      CHECK(rec.intersecting == 0);
      CHECK(rec.checks == st.pair_checks);
    }
  }

  TEST_CASE("every state change lies in A x B or B x A and uses the new link") {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 30; ++t) {
      const std::size_t n = 2 + static_cast<std::size_t>(rng() % 14);
      auto d = t % 2 ? oracle::random_matrix(n, 5, rng)
                     : build_full_mesh(oracle::random_graph(n, 0.2, 1.0, 50.0, 1.0, rng));
      LemmaRecorder rec(n);
      pareto_baseline(d, nullptr, &rec);
      CHECK(rec.changes > 0);
      CHECK(rec.uncovered == 0);
      CHECK(rec.not_via_link == 0);
      CHECK(rec.intersecting == 0);
    }
  }

  TEST_CASE("optimized evaluates no more pairs than the baseline") {
    std::mt19937_64 rng(3);
    auto d = build_full_mesh(oracle::random_graph(30, 0.1, 1.0, 100.0, 0.1, rng));
    ParetoStats base, opt;
    auto fb = pareto_baseline(d, &base);
    auto fo = pareto_optimized(d, &opt);
    CHECK(fb == fo);
    CHECK(base.pair_checks == d.link_count() * 30 * 29);
    CHECK(opt.pair_checks < base.pair_checks);
    CHECK(opt.iterations == base.iterations);
    CHECK(opt.entries == fo.entry_count());
  }

  TEST_CASE("two locations") {
    auto d = DistanceMatrix::from_ms(2, {0, 7, 7, 0});
    auto f = pareto_optimized(d);
    REQUIRE(f.at(0, 1).size() == 1);
    CHECK(f.at(0, 1)[0].hops == hops({0, 1}));
    CHECK(f == pareto_baseline(d));
    CHECK(f.at(0, 0).empty());
  }
}
