#include "pareto.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cassert>
#include <istream>
#include <ostream>
#include <string>

#include "error.hpp"
#include "text.hpp"

namespace mosto {

ParetoPath make_path(const DistanceMatrix& d, std::vector<NodeId> hops) {
  ParetoPath p{std::move(hops), Delay::zero(), Delay::zero()};
  for (std::size_t k = 0; k + 1 < p.hops.size(); ++k) {
    Delay w = d.at(p.hops[k], p.hops[k + 1]);
    p.length += w;
    p.max_link = std::max(p.max_link, w);
  }
  return p;
}

bool tie_break_less(const ParetoPath& a, const ParetoPath& b) {
  if (a.hops.size() != b.hops.size()) return a.hops.size() < b.hops.size();
  return a.hops < b.hops;
}

std::vector<SortedLink> sorted_links(const DistanceMatrix& d) {
  std::vector<SortedLink> links;
  links.reserve(d.link_count());
  const auto n = static_cast<NodeId>(d.size());
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b) links.push_back({a, b, d.at(a, b)});
  std::sort(links.begin(), links.end(), [](const SortedLink& x, const SortedLink& y) {
    if (x.rtt != y.rtt) return x.rtt < y.rtt;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  return links;
}

// ---------------------------------------------------------------------------
// ParetoFront

std::size_t ParetoFront::entry_count() const {
  std::size_t total = 0;
  for (const auto& l : lists_) total += l.size();
  return total;
}

void ParetoFront::validate(const DistanceMatrix& d) const {
  if (d.size() != n_) throw InvariantError("front and matrix sizes differ");
  for (NodeId i = 0; i < n_; ++i) {
    for (NodeId j = 0; j < n_; ++j) {
      const auto& list = at(i, j);
      if (i == j) {
        if (!list.empty()) throw InvariantError(fmt::format("L_{}{} must be empty", i, j));
        continue;
      }
      if (list.empty()) throw InvariantError(fmt::format("L_{}_{} is empty", i, j));
      for (std::size_t k = 0; k < list.size(); ++k) {
        const auto& p = list[k];
        if (p.hops.size() < 2 || p.hops.front() != i || p.hops.back() != j) {
          throw InvariantError(fmt::format("L_{}_{} entry {} has wrong endpoints", i, j, k));
        }
        auto sorted = p.hops;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
          throw InvariantError(fmt::format("L_{}_{} entry {} repeats a node", i, j, k));
        }
        if (make_path(d, p.hops) != p) {
          throw InvariantError(fmt::format("L_{}_{} entry {} criteria disagree with d", i, j, k));
        }
        if (k > 0 && !(list[k - 1].max_link < p.max_link && list[k - 1].length > p.length)) {
          throw InvariantError(fmt::format("L_{}_{} is not a strict Pareto front at {}", i, j, k));
        }
      }
    }
  }
}

namespace {

std::string join_hops(const std::vector<NodeId>& hops) {
  std::string s;
  for (std::size_t k = 0; k < hops.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(hops[k]);
  }
  return s;
}

std::vector<NodeId> parse_hops(std::string_view text, int line) {
  std::vector<NodeId> hops;
  for (auto tok : split(text, ',')) {
    NodeId v = 0;
    if (!parse_int(tok, v)) throw InputError(fmt::format("bad hop '{}'", tok), line);
    hops.push_back(v);
  }
  return hops;
}

}  // namespace

void ParetoFront::write(std::ostream& out) const {
  for (NodeId i = 0; i < n_; ++i) {
    for (NodeId j = 0; j < n_; ++j) {
      for (const auto& p : at(i, j)) {
        out << fmt::format("pair {} {} maxlink {} length {} hops {} path {}\n", i, j,
                           format_ms(p.max_link), format_ms(p.length), p.hop_count(),
                           join_hops(p.hops));
      }
    }
  }
}

ParetoFront ParetoFront::read(std::istream& in, const DistanceMatrix& d) {
  ParetoFront front(d.size());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = tokenize(strip_comment(line));
    if (tokens.empty()) continue;
    if (tokens.size() != 11 || tokens[0] != "pair" || tokens[3] != "maxlink" ||
        tokens[5] != "length" || tokens[7] != "hops" || tokens[9] != "path") {
      throw InputError("malformed front line", line_no);
    }
    NodeId i = 0, j = 0;
    std::size_t k = 0;
    if (!parse_int(tokens[1], i) || !parse_int(tokens[2], j) || !parse_int(tokens[8], k) ||
        i >= d.size() || j >= d.size()) {
      throw InputError("bad pair or hop count", line_no);
    }
    auto hops = parse_hops(tokens[10], line_no);
    if (hops.size() != k) throw InputError("hop count does not match path", line_no);
    for (NodeId h : hops)
      if (h >= d.size()) throw InputError("path references an unknown node", line_no);
    front.at(i, j).push_back(make_path(d, std::move(hops)));
  }
  front.validate(d);
  return front;
}

// ---------------------------------------------------------------------------
// PathDp

PathDp::PathDp(std::size_t n)
    : n_(n), len_(n * n, Delay::infinite()), hops_(n * n, 0), next_(n * n, 0) {
  for (std::size_t i = 0; i < n; ++i) {
    len_[i * n + i] = Delay::zero();
    hops_[i * n + i] = 1;
    next_[i * n + i] = static_cast<NodeId>(i);
  }
}

void PathDp::append_path(NodeId i, NodeId j, std::vector<NodeId>& out) const {
  NodeId cur = i;
  out.push_back(cur);
  std::size_t guard = 0;
  while (cur != j) {
    cur = next_[idx(cur, j)];
    out.push_back(cur);
    if (++guard > n_) throw InvariantError("cycle while reconstructing a path");
  }
}

std::vector<NodeId> PathDp::path(NodeId i, NodeId j) const {
  std::vector<NodeId> out;
  if (!reachable(i, j)) return out;
  out.reserve(hops_[idx(i, j)]);
  append_path(i, j, out);
  return out;
}

bool PathDp::path_traverses(NodeId i, NodeId j, NodeId x, NodeId y) const {
  if (!reachable(i, j)) return false;
  NodeId cur = i;
  std::size_t guard = 0;
  while (cur != j) {
    NodeId nxt = next_[idx(cur, j)];
    if (cur == x && nxt == y) return true;
    cur = nxt;
    if (++guard > n_) throw InvariantError("cycle while reconstructing a path");
  }
  return false;
}

AbSets compute_ab_sets(const SortedLink& link, const PathDp& state) {
  AbSets sets;
  const auto n = static_cast<NodeId>(state.size());
  for (NodeId p = 0; p < n; ++p) {
    // p..b -> a, or a -> b..p
    if (state.path_traverses(p, link.a, link.b, link.a) || state.path_traverses(link.a, p, link.a, link.b)) {
      sets.a_set.push_back(p);
    }
    if (state.path_traverses(p, link.b, link.a, link.b) || state.path_traverses(link.b, p, link.b, link.a)) {
      sets.b_set.push_back(p);
    }
  }
  return sets;
}

// ---------------------------------------------------------------------------
// FrontBuilder: the shared dynamic program behind both algorithms.

class FrontBuilder {
 public:
  FrontBuilder(const DistanceMatrix& d, ParetoStats* stats, IterationObserver* observer)
      : d_(d),
        n_(d.size()),
        dp_(d.size()),
        front_(d.size()),
        dirty_(d.size() * d.size(), 0),
        stats_(stats),
        observer_(observer) {}

  ParetoFront run(bool optimized) {
    d_.validate();
    const auto links = sorted_links(d_);
    std::size_t g0 = 0;
    while (g0 < links.size()) {
      std::size_t g1 = g0;
      while (g1 < links.size() && links[g1].rtt == links[g0].rtt) ++g1;
      for (std::size_t h = g0; h < g1; ++h) iterate(h + 1, links[h], optimized);
      finalize_group(links[g0].rtt);
      if (stats_) ++stats_->link_groups;
      g0 = g1;
    }
    if (stats_) stats_->entries = front_.entry_count();
    return std::move(front_);
  }

 private:
  struct Candidate {
    Delay len = Delay::infinite();
    std::uint32_t hops = 0;
    NodeId x = 0, y = 0;  // traverses link x -> y; unused for the incumbent
    bool incumbent = true;
  };

  struct Update {
    std::size_t index;
    Delay len;
    std::uint32_t hops;
    NodeId next;
  };

  void materialize(NodeId i, NodeId j, const Candidate& c, std::vector<NodeId>& out) const {
    out.clear();
    if (c.incumbent) {
      dp_.append_path(i, j, out);
    } else {
      dp_.append_path(i, c.x, out);
      dp_.append_path(c.y, j, out);
    }
  }

  bool better(NodeId i, NodeId j, const Candidate& c, const Candidate& best) {
    if (c.len != best.len) return c.len < best.len;
    if (c.hops != best.hops) return c.hops < best.hops;
    materialize(i, j, c, scratch_a_);
    materialize(i, j, best, scratch_b_);
    return scratch_a_ < scratch_b_;
  }

  Candidate via(NodeId i, NodeId j, NodeId x, NodeId y, Delay w) const {
    Candidate c;
    const Delay head = dp_.len_[dp_.idx(i, x)];
    const Delay tail = dp_.len_[dp_.idx(y, j)];
    if (head.is_infinite() || tail.is_infinite()) return c;
    c.len = head + w + tail;
    c.hops = dp_.hops_[dp_.idx(i, x)] + dp_.hops_[dp_.idx(y, j)];
    c.x = x;
    c.y = y;
    c.incumbent = false;
    return c;
  }

  // Evaluates D(i,j,h) on the frozen state of iteration h-1; queues an update
  // when link l_h yields a better path.
  void relax(NodeId i, NodeId j, const SortedLink& l) {
    const std::size_t ij = dp_.idx(i, j);
    Candidate best;
    best.len = dp_.len_[ij];
    best.hops = dp_.hops_[ij];
    for (auto [x, y] : {std::pair{l.a, l.b}, std::pair{l.b, l.a}}) {
      Candidate c = via(i, j, x, y, l.rtt);
      if (c.len.is_infinite()) continue;
      if (best.len.is_infinite() || better(i, j, c, best)) best = c;
    }
    if (!best.incumbent) {
      const NodeId next = (i == best.x) ? best.y : dp_.next_[dp_.idx(i, best.x)];
      updates_.push_back({ij, best.len, best.hops, next});
    }
  }

  bool improves(NodeId i, NodeId j, NodeId x, NodeId y, Delay w) {
    Candidate c = via(i, j, x, y, w);
    if (c.len.is_infinite()) return false;
    const std::size_t ij = dp_.idx(i, j);
    Candidate inc;
    inc.len = dp_.len_[ij];
    inc.hops = dp_.hops_[ij];
    return inc.len.is_infinite() || better(i, j, c, inc);
  }

  // A_h / B_h from the frozen h-1 state: the new best path between p and a_h
  // uses l_h exactly when the one-link extension p..b_h -> a_h beats the
  // incumbent (or the mirrored a_h -> b_h..p).
  AbSets fast_sets(const SortedLink& l) {
    AbSets s;
    const auto n = static_cast<NodeId>(n_);
    for (NodeId p = 0; p < n; ++p) {
      if ((p != l.a && improves(p, l.a, l.b, l.a, l.rtt)) || (p != l.a && improves(l.a, p, l.a, l.b, l.rtt))) {
        s.a_set.push_back(p);
      }
      if ((p != l.b && improves(p, l.b, l.a, l.b, l.rtt)) || (p != l.b && improves(l.b, p, l.b, l.a, l.rtt))) {
        s.b_set.push_back(p);
      }
    }
    return s;
  }

  void iterate(std::size_t h, const SortedLink& l, bool optimized) {
    updates_.clear();
    std::uint64_t checks = 0;
    AbSets sets;
    if (optimized) {
      sets = fast_sets(l);
#ifndef NDEBUG
      for (NodeId p : sets.a_set)
        assert(!std::binary_search(sets.b_set.begin(), sets.b_set.end(), p) && "A_h and B_h intersect");
#endif
      for (NodeId p : sets.a_set) {
        for (NodeId q : sets.b_set) {
          relax(p, q, l);
          relax(q, p, l);
        }
      }
      checks = 2ull * sets.a_set.size() * sets.b_set.size();
    } else {
      const auto n = static_cast<NodeId>(n_);
      for (NodeId i = 0; i < n; ++i)
        for (NodeId j = 0; j < n; ++j)
          if (i != j) relax(i, j, l);
      checks = static_cast<std::uint64_t>(n_) * (n_ - 1);
    }
    for (const auto& u : updates_) {
      dp_.len_[u.index] = u.len;
      dp_.hops_[u.index] = u.hops;
      dp_.next_[u.index] = u.next;
      if (!dirty_[u.index]) {
        dirty_[u.index] = 1;
        dirty_list_.push_back(u.index);
      }
    }
    if (stats_) {
      ++stats_->iterations;
      stats_->pair_checks += checks;
      stats_->max_pair_checks = std::max(stats_->max_pair_checks, checks);
      stats_->state_updates += updates_.size();
    }
    if (observer_) observer_->on_iteration(h, l, optimized ? &sets : nullptr, dp_);
  }

  // Every pair whose best path changed within a group of equal-distance links
  // now has max_link equal to that distance; it is a new front entry when it
  // is strictly shorter than the previous one.
  void finalize_group(Delay group_rtt) {
    std::sort(dirty_list_.begin(), dirty_list_.end());
    for (std::size_t index : dirty_list_) {
      dirty_[index] = 0;
      const auto i = static_cast<NodeId>(index / n_);
      const auto j = static_cast<NodeId>(index % n_);
      auto& list = front_.at(i, j);
      if (!list.empty() && !(dp_.len_[index] < list.back().length)) continue;
      ParetoPath p = make_path(d_, dp_.path(i, j));
      if (p.length != dp_.len_[index] || p.max_link != group_rtt) {
        throw InvariantError(fmt::format("state for ({}, {}) disagrees with its path", i, j));
      }
      list.push_back(std::move(p));
    }
    dirty_list_.clear();
  }

  const DistanceMatrix& d_;
  std::size_t n_;
  PathDp dp_;
  ParetoFront front_;
  std::vector<char> dirty_;
  std::vector<std::size_t> dirty_list_;
  std::vector<Update> updates_;
  std::vector<NodeId> scratch_a_, scratch_b_;
  ParetoStats* stats_;
  IterationObserver* observer_;
};

ParetoFront pareto_baseline(const DistanceMatrix& d, ParetoStats* stats, IterationObserver* observer) {
  return FrontBuilder(d, stats, observer).run(false);
}

ParetoFront pareto_optimized(const DistanceMatrix& d, ParetoStats* stats, IterationObserver* observer) {
  return FrontBuilder(d, stats, observer).run(true);
}

const ParetoPath& shortest_path(const ParetoFront& front, NodeId i, NodeId j) {
  const auto& list = front.at(i, j);
  if (list.empty()) throw InputError(fmt::format("no path for pair ({}, {})", i, j));
  return list.back();
}

const ParetoPath& minimax_path(const ParetoFront& front, NodeId i, NodeId j) {
  const auto& list = front.at(i, j);
  if (list.empty()) throw InputError(fmt::format("no path for pair ({}, {})", i, j));
  return list.front();
}

}  // namespace mosto
