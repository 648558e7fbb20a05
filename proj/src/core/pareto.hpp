#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "delay.hpp"
#include "topology.hpp"

namespace mosto {

// A simple proxy path p_1..p_k with its two criteria.
struct ParetoPath {
  std::vector<NodeId> hops;
  Delay length;    // sum of d over consecutive hops
  Delay max_link;  // largest d over consecutive hops

  std::size_t hop_count() const { return hops.size(); }
  bool operator==(const ParetoPath&) const = default;
};

// Builds a path from its hop sequence, computing length and max_link from d.
ParetoPath make_path(const DistanceMatrix& d, std::vector<NodeId> hops);

// Tie order used everywhere a single path has to be picked among equals:
// fewer hops first, then the lexicographically smaller hop sequence.
bool tie_break_less(const ParetoPath& a, const ParetoPath& b);

// One unordered location pair {a, b} with its distance.
struct SortedLink {
  NodeId a;  // smaller endpoint
  NodeId b;  // larger endpoint
  Delay rtt;
  bool operator==(const SortedLink&) const = default;
};

// All n(n-1)/2 unordered links sorted by nondecreasing distance, ties broken
// by (a, b).
std::vector<SortedLink> sorted_links(const DistanceMatrix& d);

// Per ordered pair (i, j), the list L_ij of Pareto-optimal paths under
// (length, max_link), sorted by strictly increasing max_link. Lengths are
// then strictly decreasing.
class ParetoFront {
 public:
  ParetoFront() = default;
  explicit ParetoFront(std::size_t n) : n_(n), lists_(n * n) {}

  std::size_t size() const { return n_; }
  const std::vector<ParetoPath>& at(NodeId i, NodeId j) const { return lists_[index(i, j)]; }
  std::vector<ParetoPath>& at(NodeId i, NodeId j) { return lists_[index(i, j)]; }
  std::size_t entry_count() const;

  // Throws InvariantError when a list is empty, unsorted, dominated, or
  // inconsistent with d.
  void validate(const DistanceMatrix& d) const;

  // One line per entry, sorted by (i, j, maxlink):
  //   pair <i> <j> maxlink <ms> length <ms> hops <k> path <p1,...,pk>
  void write(std::ostream& out) const;
  static ParetoFront read(std::istream& in, const DistanceMatrix& d);

  bool operator==(const ParetoFront&) const = default;

 private:
  std::size_t index(NodeId i, NodeId j) const { return static_cast<std::size_t>(i) * n_ + j; }
  std::size_t n_ = 0;
  std::vector<std::vector<ParetoPath>> lists_;
};

// Rolling dynamic-programming state: for every ordered pair, the best path in
// the graph G_h made of the first h sorted links. "Best" is the minimum of
// (length, hop count, hop sequence). Paths are stored as first-hop pointers.
class PathDp {
 public:
  explicit PathDp(std::size_t n);

  std::size_t size() const { return n_; }
  Delay length(NodeId i, NodeId j) const { return len_[idx(i, j)]; }
  std::uint32_t hop_count(NodeId i, NodeId j) const { return hops_[idx(i, j)]; }
  bool reachable(NodeId i, NodeId j) const { return !len_[idx(i, j)].is_infinite(); }
  std::vector<NodeId> path(NodeId i, NodeId j) const;
  // Whether the best i->j path traverses x immediately followed by y.
  bool path_traverses(NodeId i, NodeId j, NodeId x, NodeId y) const;

 private:
  friend class FrontBuilder;
  std::size_t idx(NodeId i, NodeId j) const { return static_cast<std::size_t>(i) * n_ + j; }
  void append_path(NodeId i, NodeId j, std::vector<NodeId>& out) const;

  std::size_t n_;
  std::vector<Delay> len_;
  std::vector<std::uint32_t> hops_;
  std::vector<NodeId> next_;
};

struct AbSets {
  std::vector<NodeId> a_set;  // nodes whose best path to/from a_h uses l_h
  std::vector<NodeId> b_set;  // nodes whose best path to/from b_h uses l_h
};

// Literal evaluation of the candidate sets on a state that already includes
// link l_h. O(n^2); used by tests and debug checks.
AbSets compute_ab_sets(const SortedLink& link, const PathDp& state);

struct ParetoStats {
  std::uint64_t iterations = 0;
  std::uint64_t link_groups = 0;
  std::uint64_t pair_checks = 0;       // ordered pairs whose recursion was evaluated
  std::uint64_t max_pair_checks = 0;   // largest per-iteration pair_checks
  std::uint64_t state_updates = 0;
  std::uint64_t entries = 0;
};

class IterationObserver {
 public:
  virtual ~IterationObserver() = default;
  // Called after iteration h (1-based) has been applied to the state. sets is
  // null for the baseline algorithm.
  virtual void on_iteration(std::size_t h, const SortedLink& link, const AbSets* sets,
                            const PathDp& state) = 0;
};

// Straightforward recursion over all pairs for every link. Theta(n^4).
ParetoFront pareto_baseline(const DistanceMatrix& d, ParetoStats* stats = nullptr,
                            IterationObserver* observer = nullptr);

// Same output; per iteration only pairs in A_h x B_h (both orientations) are
// relaxed.
ParetoFront pareto_optimized(const DistanceMatrix& d, ParetoStats* stats = nullptr,
                             IterationObserver* observer = nullptr);

// Minimum-length member of L_ij (its last entry).
const ParetoPath& shortest_path(const ParetoFront& front, NodeId i, NodeId j);
// Minimum-bottleneck member of L_ij (its first entry): min max_link, then min
// length, then fewest hops.
const ParetoPath& minimax_path(const ParetoFront& front, NodeId i, NodeId j);

}  // namespace mosto
