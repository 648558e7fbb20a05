#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <utility>

#include "topology.hpp"
#include "transfer_model.hpp"

namespace mosto {

struct ControllerConfig {
  std::string topology_path;  // graph file; or
  std::string matrix_path;    // full-mesh CSV
  std::string input_path = "-";  // RTT reports; "-" is stdin, a FIFO works too
  std::string output_dir;        // empty: keep tables in memory only
  Delay period = Delay::from_ms(60000);
  double threshold = 0.10;
  Delay floor = Delay::from_ms(1);
  std::size_t dirty_trigger = 0;  // 0 means the number of locations
  std::map<NodeId, NodeId> steer;  // edge location -> proxy
  TransferModel model;
  std::uint64_t max_generations = 0;  // 0 = unlimited
};

// key = value lines; "steer = <edge>:<lop>" may repeat. Relative paths are
// taken relative to base_dir.
ControllerConfig parse_controller_config(std::string_view text, const std::string& base_dir = ".");
ControllerConfig load_controller_config(const std::string& path);

struct Snapshot {
  std::uint64_t generation = 0;
  ChainLookupTable table;
  DistanceMatrix matrix;
  double compute_ms = 0;
};

class Controller {
 public:
  Controller(DistanceMatrix d, ControllerConfig cfg);

  // Applies a measured RTT when it moved by more than
  // max(threshold * old, floor). Returns whether it was applied. Throws
  // InputError for unknown nodes, i == j or a non-positive RTT.
  bool apply_update(NodeId i, NodeId j, Delay rtt);

  // Recomputes fronts and the lookup table from the current matrix and
  // publishes them as the next generation.
  std::shared_ptr<const Snapshot> recompute_cycle();

  // The published snapshot; never observed half-built.
  std::shared_ptr<const Snapshot> current() const;

  std::size_t dirty_pairs() const;
  DistanceMatrix matrix() const;
  const ControllerConfig& config() const { return cfg_; }

  // Reads "rtt <i> <j> <ms>" lines from in on a reader thread and recomputes
  // every period or once enough pairs are dirty. Returns at end of input (after
  // a final recompute if anything is dirty) or after max_generations. Returns
  // false when the reader was left blocked on in, which must then outlive it.
  bool run(std::istream& in);

 private:
  void publish(std::shared_ptr<const Snapshot> s);

  ControllerConfig cfg_;
  std::vector<NodeId> front_nodes_;
  mutable std::mutex state_mu_;
  DistanceMatrix d_;
  std::set<std::pair<NodeId, NodeId>> dirty_;
  mutable std::mutex snap_mu_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::uint64_t generation_ = 0;
};

// Parses one "rtt <i> <j> <ms>" report line.
struct RttReport {
  NodeId i;
  NodeId j;
  Delay rtt;
};
RttReport parse_rtt_report(std::string_view line, int line_no = 0);

// Builds the controller from its config (loading topology or matrix) and runs
// it on the configured input.
int run_controller(const ControllerConfig& cfg);

}  // namespace mosto
