#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "delay.hpp"

namespace mosto {

using NodeId = std::uint32_t;

struct Link {
  NodeId u;
  NodeId v;
  Delay rtt;
};

// Candidate proxy locations and the measured RTT of each direct link.
// Undirected, connected, no self-loops, at most one link per node pair.
class ProxyGraph {
 public:
  ProxyGraph(std::vector<std::string> names, std::vector<Link> links);

  // Parses the line-oriented topology format:
  //   node <index> [<name>]
  //   link <u> <v> <rtt_ms>
  // '#' starts a comment. Throws InputError with the offending line number.
  static ProxyGraph parse(std::string_view text);
  static ProxyGraph load(const std::string& path);

  std::size_t node_count() const { return names_.size(); }
  const std::vector<Link>& links() const { return links_; }
  const std::string& name(NodeId id) const { return names_.at(id); }

 private:
  std::vector<std::string> names_;
  std::vector<Link> links_;
};

// Full-mesh symmetric RTT matrix over all location pairs.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n);

  // Builds from row-major milliseconds; validates symmetry, zero diagonal and
  // strictly positive off-diagonal entries.
  static DistanceMatrix from_ms(std::size_t n, const std::vector<double>& rows);

  std::size_t size() const { return n_; }
  Delay at(NodeId i, NodeId j) const { return d_[static_cast<std::size_t>(i) * n_ + j]; }
  // Writes both (i,j) and (j,i).
  void set(NodeId i, NodeId j, Delay rtt);

  // Unordered pair count n(n-1)/2.
  std::size_t link_count() const { return n_ * (n_ - 1) / 2; }

  void validate() const;
  bool satisfies_triangle_inequality() const;

  // Restriction to the listed nodes, renumbered 0..k-1 in list order.
  DistanceMatrix submatrix(const std::vector<NodeId>& nodes) const;

  // CSV: header row "n=<count>", then one row per node with n values in ms.
  void write_csv(std::ostream& out) const;
  static DistanceMatrix read_csv(std::istream& in);
  void save_csv(const std::string& path) const;
  static DistanceMatrix load_csv(const std::string& path);

  bool operator==(const DistanceMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<Delay> d_;
};

// All-pairs shortest-path delays of g (Floyd-Warshall).
DistanceMatrix build_full_mesh(const ProxyGraph& g);

// Parses a millisecond value; rejects non-finite, non-positive and absurdly
// large RTTs.
Delay parse_rtt_ms(std::string_view token, int line);

std::string format_ms(Delay d);

}  // namespace mosto
