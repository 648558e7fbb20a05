#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <set>
#include <string>

namespace oracle {

DistanceMatrix dijkstra_mesh(const ProxyGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<std::pair<NodeId, Delay>>> adj(n);
  for (const auto& l : g.links()) {
    adj[l.u].emplace_back(l.v, l.rtt);
    adj[l.v].emplace_back(l.u, l.rtt);
  }
  DistanceMatrix out(n);
  for (NodeId s = 0; s < n; ++s) {
    std::vector<Delay> dist(n, Delay::infinite());
    using Item = std::pair<Delay, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[s] = Delay::zero();
    pq.emplace(Delay::zero(), s);
    while (!pq.empty()) {
      auto [du, u] = pq.top();
      pq.pop();
      if (du != dist[u]) continue;
      for (auto [v, w] : adj[u]) {
        if (du + w < dist[v]) {
          dist[v] = du + w;
          pq.emplace(dist[v], v);
        }
      }
    }
    for (NodeId t = 0; t < n; ++t)
      if (t > s) out.set(s, t, dist[t]);
  }
  return out;
}

namespace {

void dfs(const DistanceMatrix& d, NodeId cur, NodeId target, std::vector<NodeId>& path, std::vector<char>& used,
         std::vector<ParetoPath>& out) {
  if (cur == target) {
    out.push_back(mosto::make_path(d, path));
    return;
  }
  for (NodeId v = 0; v < d.size(); ++v) {
    if (used[v]) continue;
    used[v] = 1;
    path.push_back(v);
    dfs(d, v, target, path, used, out);
    path.pop_back();
    used[v] = 0;
  }
}

}  // namespace

std::vector<ParetoPath> simple_paths(const DistanceMatrix& d, NodeId i, NodeId j) {
  std::vector<ParetoPath> out;
  std::vector<NodeId> path{i};
  std::vector<char> used(d.size(), 0);
  used[i] = 1;
  dfs(d, i, j, path, used, out);
  return out;
}

ParetoFront brute_force_front(const DistanceMatrix& d) {
  const auto n = static_cast<NodeId>(d.size());
  ParetoFront front(n);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = 0; j < n; ++j) {
      if (i == j) continue;
      auto paths = simple_paths(d, i, j);
      std::set<Delay> maxima;
      for (const auto& p : paths) maxima.insert(p.max_link);
      auto& list = front.at(i, j);
      for (Delay m : maxima) {
        const ParetoPath* best = nullptr;
        for (const auto& p : paths) {
          if (p.max_link > m) continue;
          if (!best || p.length < best->length ||
              (p.length == best->length &&
               (p.hops.size() < best->hops.size() || (p.hops.size() == best->hops.size() && p.hops < best->hops))))
            best = &p;
        }
        if (list.empty() || best->length < list.back().length) list.push_back(*best);
      }
    }
  }
  return front;
}

ProxyGraph random_graph(std::size_t n, double extra_edge_prob, double lo_ms, double hi_ms, double resolution_ms,
                        std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto steps = static_cast<std::int64_t>(std::floor((hi_ms - lo_ms) / resolution_ms));
  std::uniform_int_distribution<std::int64_t> step(0, steps);
  auto rtt = [&] { return Delay::from_ms(lo_ms + static_cast<double>(step(rng)) * resolution_ms); };
  std::vector<mosto::Link> links;
  std::set<std::pair<NodeId, NodeId>> seen;
  auto add = [&](NodeId a, NodeId b) {
    if (a == b || !seen.emplace(std::min(a, b), std::max(a, b)).second) return;
    links.push_back({a, b, rtt()});
  };
  std::vector<NodeId> order(n);
  for (NodeId v = 0; v < n; ++v) order[v] = v;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 1; k < n; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    add(order[k], order[pick(rng)]);
  }
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b)
      if (u01(rng) < extra_edge_prob) add(a, b);
  std::vector<std::string> names;
  for (std::size_t v = 0; v < n; ++v) names.push_back("n" + std::to_string(v));
  return ProxyGraph(std::move(names), std::move(links));
}

DistanceMatrix random_matrix(std::size_t n, int max_ms, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> v(1, max_ms);
  DistanceMatrix d(n);
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b) d.set(a, b, Delay::from_ms(v(rng)));
  return d;
}

ProxyGraph synthetic_backbone(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  struct P {
    double lat, lon;
  };
  std::vector<P> pts(n);
  for (auto& p : pts) {
    p.lat = std::asin(2 * u01(rng) - 1);
    p.lon = 2 * std::numbers::pi * u01(rng);
  }
  // Fibre at ~200 km/ms, round trip, 1.5x path inflation, 1 ms floor.
  auto rtt_ms = [&](std::size_t a, std::size_t b) {
    const double c = std::sin(pts[a].lat) * std::sin(pts[b].lat) +
                     std::cos(pts[a].lat) * std::cos(pts[b].lat) * std::cos(pts[a].lon - pts[b].lon);
    const double km = 6371.0 * std::acos(std::clamp(c, -1.0, 1.0));
    return std::round((1.0 + 1.5 * 2.0 * km / 200.0) * 10.0) / 10.0;
  };
  std::set<std::pair<NodeId, NodeId>> seen;
  std::vector<mosto::Link> links;
  auto add = [&](std::size_t a, std::size_t b) {
    if (a == b || !seen.emplace(std::min(a, b), std::max(a, b)).second) return;
    links.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b), Delay::from_ms(rtt_ms(a, b))});
  };
  const std::size_t k = 4;
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<std::pair<double, std::size_t>> near;
    for (std::size_t b = 0; b < n; ++b)
      if (b != a) near.emplace_back(rtt_ms(a, b), b);
    std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(std::min(k, near.size())), near.end());
    for (std::size_t t = 0; t < std::min(k, near.size()); ++t) add(a, near[t].second);
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t t = 0; t < n / 2; ++t) add(pick(rng), pick(rng));
  // Chain consecutive nodes so the graph is always connected.
  for (std::size_t a = 1; a < n; ++a) add(a - 1, a);
  std::vector<std::string> names;
  for (std::size_t v = 0; v < n; ++v) names.push_back("pop" + std::to_string(v));
  return ProxyGraph(std::move(names), std::move(links));
}

}  // namespace oracle
