#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pareto.hpp"

namespace mosto {

// Slow-start parameters used to turn a transfer size into a round count.
struct TransferModel {
  int icw = 10;         // initial congestion window, segments
  int mss = 1460;       // bytes
  int max_rounds = 16;  // larger transfers use the max_rounds chain

  void validate() const;
  bool operator==(const TransferModel&) const = default;
};

// Smallest r with icw * (2^r - 1) * mss >= size, clamped to max_rounds.
// Throws InputError for size == 0.
int rounds_for_size(std::uint64_t size, const TransferModel& m);

// Modeled time of an r-round transfer: length/2 + (r - 1) * max_link.
double chain_time_ms(const ParetoPath& path, int rounds);
// Twice the modeled time, exact. Used for comparisons.
Delay chain_time_doubled(Delay length, Delay max_link, int rounds);
inline Delay chain_time_doubled(const ParetoPath& p, int rounds) {
  return chain_time_doubled(p.length, p.max_link, rounds);
}

// Member of the front minimizing chain_time for r rounds; ties go to fewer
// hops, then the smaller hop sequence. Throws InputError on an empty front.
const ParetoPath& select_chain(std::span<const ParetoPath> front_entry, int rounds);

// Static link from an edge location to the proxy it is steered to. Steered
// edges take no part in the Pareto computation; their chains are the LoP's
// chains with this link attached.
struct Steering {
  NodeId lop;
  Delay rtt;
  bool operator==(const Steering&) const = default;
};

struct ChainEntry {
  std::vector<NodeId> hops;
  double modeled_ms = 0;
  bool operator==(const ChainEntry&) const = default;
};

// Per (ingress, egress, rounds) the selected chain, over location ids
// 0..locations-1. Immutable once published.
class ChainLookupTable {
 public:
  ChainLookupTable() = default;
  ChainLookupTable(std::size_t locations, TransferModel model);

  std::size_t locations() const { return locations_; }
  const TransferModel& model() const { return model_; }
  std::uint64_t generation() const { return generation_; }
  void set_generation(std::uint64_t g) { generation_ = g; }

  // rounds above max_rounds use the max_rounds entry. Throws InputError for
  // unknown locations, from == to, or rounds < 1.
  const ChainEntry& lookup(NodeId from, NodeId to, int rounds) const;
  const ChainEntry& lookup_size(NodeId from, NodeId to, std::uint64_t size) const;

  void set(NodeId from, NodeId to, int rounds, ChainEntry e);

  // Text export:
  //   # generation <g>
  //   # model icw <icw> mss <mss> max_rounds <R> locations <N>
  //   chain <i> <j> <r> <p1,...,pk> <modeled_ms>
  void write(std::ostream& out) const;
  static ChainLookupTable read(std::istream& in);
  void save(const std::string& path) const;
  static ChainLookupTable load(const std::string& path);

  // Equal chains, times and model; the generation number is ignored.
  bool same_content(const ChainLookupTable& other) const;

 private:
  std::size_t index(NodeId a, NodeId b, int r) const {
    return (static_cast<std::size_t>(a) * locations_ + b) * static_cast<std::size_t>(model_.max_rounds) +
           static_cast<std::size_t>(r - 1);
  }
  void check_pair(NodeId from, NodeId to) const;

  std::size_t locations_ = 0;
  TransferModel model_;
  std::uint64_t generation_ = 0;
  std::vector<ChainEntry> entries_;
};

// Runs select_chain for every ordered pair and every r in 1..max_rounds.
ChainLookupTable build_lookup_table(const ParetoFront& front, const TransferModel& m);

// Variant for a front computed on a subset of locations. front_nodes[k] is
// the location id of front index k; every other location must be steered to
// one of them.
ChainLookupTable build_lookup_table(const ParetoFront& front, const TransferModel& m,
                                    const std::vector<NodeId>& front_nodes, std::size_t locations,
                                    const std::map<NodeId, Steering>& steering);

}  // namespace mosto
