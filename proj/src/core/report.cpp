#include "report.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>

#include "error.hpp"

namespace mosto {

ComparisonReport compare_chains(const ParetoFront& front, const std::vector<int>& rounds) {
  if (rounds.empty()) throw InputError("no round counts given");
  for (int r : rounds)
    if (r < 1 || r > 62) throw InputError(fmt::format("round count {} out of range 1..62", r));
  ComparisonReport rep;
  rep.rounds = rounds;
  const auto n = static_cast<NodeId>(front.size());
  for (int r : rounds) {
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = i + 1; j < n; ++j) {
        const ParetoPath& mm = minimax_path(front, i, j);
        const ParetoPath& sel = select_chain(front.at(i, j), r);
        ComparisonRow row;
        row.from = i;
        row.to = j;
        row.rounds = r;
        row.minimax_ms = chain_time_ms(mm, r);
        row.selected_ms = chain_time_ms(sel, r);
        // Exact doubled times keep rounding from producing tiny negatives.
        const Delay dm = chain_time_doubled(mm, r);
        const Delay ds = chain_time_doubled(sel, r);
        row.improvement = static_cast<double>((dm - ds).picos()) / static_cast<double>(ds.picos());
        row.minimax_hops = mm.hop_count();
        row.selected_hops = sel.hop_count();
        rep.rows.push_back(row);
      }
    }
  }
  return rep;
}

void ComparisonReport::write_csv(std::ostream& out) const {
  out << "from,to,rounds,minimax_ms,selected_ms,improvement,minimax_hops,selected_hops\n";
  for (const auto& r : rows)
    out << fmt::format("{},{},{},{},{},{:.6f},{},{}\n", r.from, r.to, r.rounds, r.minimax_ms, r.selected_ms,
                       r.improvement, r.minimax_hops, r.selected_hops);
}

namespace {

std::vector<double> improvements_for(const std::vector<ComparisonRow>& rows, int r) {
  std::vector<double> v;
  for (const auto& row : rows)
    if (row.rounds == r) v.push_back(row.improvement);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

void ComparisonReport::write_cdf(std::ostream& out) const {
  out << "rounds,baseline,improvement,cumulative_fraction\n";
  for (int r : rounds) {
    const auto v = improvements_for(rows, r);
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k + 1 < v.size() && v[k + 1] == v[k]) continue;
      out << fmt::format("{},minimax,{:.6f},{:.6f}\n", r, v[k],
                         static_cast<double>(k + 1) / static_cast<double>(v.size()));
    }
  }
}

std::string ComparisonReport::summary() const {
  std::string s;
  for (int r : rounds) {
    const auto v = improvements_for(rows, r);
    if (v.empty()) continue;
    double sum = 0, hop_cut = 0;
    std::size_t better = 0, count = 0;
    for (const auto& row : rows) {
      if (row.rounds != r) continue;
      sum += row.improvement;
      hop_cut += static_cast<double>(row.minimax_hops) - static_cast<double>(row.selected_hops);
      better += row.improvement > 0;
      ++count;
    }
    s += fmt::format(
        "rounds {}: pairs {} mean_improvement {:.4f} median_improvement {:.4f} max_improvement {:.4f} "
        "improved_fraction {:.4f} mean_hop_reduction {:.4f}\n",
        r, count, sum / static_cast<double>(count), v[v.size() / 2], v.back(),
        static_cast<double>(better) / static_cast<double>(count), hop_cut / static_cast<double>(count));
  }
  return s;
}

}  // namespace mosto
