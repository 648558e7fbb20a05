#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pareto.hpp"
#include "transfer_model.hpp"

namespace mosto {

// Selected chain against the minimax chain for one pair and round count.
// improvement = (T_minimax - T_selected) / T_selected.
struct ComparisonRow {
  NodeId from = 0;
  NodeId to = 0;
  int rounds = 0;
  double minimax_ms = 0;
  double selected_ms = 0;
  double improvement = 0;
  std::size_t minimax_hops = 0;
  std::size_t selected_hops = 0;
};

struct ComparisonReport {
  std::vector<int> rounds;
  std::vector<ComparisonRow> rows;  // unordered pairs i < j, for each r

  void write_csv(std::ostream& out) const;
  // rounds,baseline,improvement,cumulative_fraction
  void write_cdf(std::ostream& out) const;
  std::string summary() const;
};

ComparisonReport compare_chains(const ParetoFront& front, const std::vector<int>& rounds);

}  // namespace mosto
