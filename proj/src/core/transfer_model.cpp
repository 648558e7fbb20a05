#include "transfer_model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "error.hpp"
#include "text.hpp"

namespace mosto {

void TransferModel::validate() const {
  if (icw < 1) throw InputError("icw must be >= 1");
  if (mss < 1) throw InputError("mss must be >= 1");
  if (max_rounds < 1 || max_rounds > 62) throw InputError("max_rounds must be in 1..62");
}

int rounds_for_size(std::uint64_t size, const TransferModel& m) {
  m.validate();
  if (size == 0) throw InputError("transfer size must be at least one byte");
  const auto per_round = static_cast<unsigned __int128>(m.icw) * static_cast<unsigned __int128>(m.mss);
  for (int r = 1; r < m.max_rounds; ++r) {
    const unsigned __int128 capacity = per_round * ((static_cast<unsigned __int128>(1) << r) - 1);
    if (capacity >= size) return r;
  }
  return m.max_rounds;
}

Delay chain_time_doubled(Delay length, Delay max_link, int rounds) {
  return length + max_link * (2 * static_cast<std::int64_t>(rounds - 1));
}

double chain_time_ms(const ParetoPath& path, int rounds) {
  return static_cast<double>(chain_time_doubled(path, rounds).picos()) / (2.0 * Delay::kPicosPerMs);
}

namespace {

// Index of the front member minimizing the time of the chain
// prefix + member + suffix, where the attached static links contribute
// extra_len to the length and extra_max to the bottleneck.
std::size_t select_index(std::span<const ParetoPath> entries, int rounds, Delay extra_len, Delay extra_max) {
  if (entries.empty()) throw InputError("cannot select a chain from an empty front");
  if (rounds < 1) throw InputError("rounds must be >= 1");
  std::size_t best = 0;
  Delay best_time = Delay::infinite();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& p = entries[k];
    Delay t = chain_time_doubled(p.length + extra_len, std::max(p.max_link, extra_max), rounds);
    if (t < best_time || (t == best_time && tie_break_less(p, entries[best]))) {
      best = k;
      best_time = t;
    }
  }
  return best;
}

}  // namespace

const ParetoPath& select_chain(std::span<const ParetoPath> front_entry, int rounds) {
  return front_entry[select_index(front_entry, rounds, Delay::zero(), Delay::zero())];
}

// ---------------------------------------------------------------------------

ChainLookupTable::ChainLookupTable(std::size_t locations, TransferModel model)
    : locations_(locations), model_(model) {
  model_.validate();
  entries_.resize(locations * locations * static_cast<std::size_t>(model_.max_rounds));
}

void ChainLookupTable::check_pair(NodeId from, NodeId to) const {
  if (from >= locations_ || to >= locations_) {
    throw InputError(fmt::format("unknown location in pair ({}, {})", from, to));
  }
  if (from == to) throw InputError("ingress and egress must differ");
}

const ChainEntry& ChainLookupTable::lookup(NodeId from, NodeId to, int rounds) const {
  check_pair(from, to);
  if (rounds < 1) throw InputError("rounds must be >= 1");
  return entries_[index(from, to, std::min(rounds, model_.max_rounds))];
}

const ChainEntry& ChainLookupTable::lookup_size(NodeId from, NodeId to, std::uint64_t size) const {
  return lookup(from, to, rounds_for_size(size, model_));
}

void ChainLookupTable::set(NodeId from, NodeId to, int rounds, ChainEntry e) {
  check_pair(from, to);
  if (rounds < 1 || rounds > model_.max_rounds) throw InputError("rounds out of range");
  entries_[index(from, to, rounds)] = std::move(e);
}

void ChainLookupTable::write(std::ostream& out) const {
  out << "# generation " << generation_ << '\n';
  out << fmt::format("# model icw {} mss {} max_rounds {} locations {}\n", model_.icw, model_.mss,
                     model_.max_rounds, locations_);
  for (NodeId i = 0; i < locations_; ++i) {
    for (NodeId j = 0; j < locations_; ++j) {
      if (i == j) continue;
      for (int r = 1; r <= model_.max_rounds; ++r) {
        const auto& e = entries_[index(i, j, r)];
        std::string hops;
        for (std::size_t k = 0; k < e.hops.size(); ++k) {
          if (k) hops += ',';
          hops += std::to_string(e.hops[k]);
        }
        out << fmt::format("chain {} {} {} {} {}\n", i, j, r, hops, e.modeled_ms);
      }
    }
  }
}

ChainLookupTable ChainLookupTable::read(std::istream& in) {
  std::string line;
  int line_no = 0;
  std::uint64_t generation = 0;
  bool have_model = false;
  ChainLookupTable table;
  std::vector<bool> seen;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty()) continue;
    if (t.starts_with('#')) {
      auto tokens = tokenize(t.substr(1));
      if (tokens.size() == 2 && tokens[0] == "generation") {
        if (!parse_int(tokens[1], generation)) throw InputError("bad generation", line_no);
      } else if (tokens.size() == 9 && tokens[0] == "model") {
        TransferModel m;
        std::size_t locations = 0;
        if (tokens[1] != "icw" || tokens[3] != "mss" || tokens[5] != "max_rounds" || tokens[7] != "locations" ||
            !parse_int(tokens[2], m.icw) || !parse_int(tokens[4], m.mss) || !parse_int(tokens[6], m.max_rounds) ||
            !parse_int(tokens[8], locations) || locations < 2) {
          throw InputError("malformed model header", line_no);
        }
        table = ChainLookupTable(locations, m);
        seen.assign(table.entries_.size(), false);
        have_model = true;
      }
      continue;
    }
    if (!have_model) throw InputError("chain line before the model header", line_no);
    auto tokens = tokenize(t);
    NodeId i = 0, j = 0;
    int r = 0;
    double ms = 0;
    if (tokens.size() != 6 || tokens[0] != "chain" || !parse_int(tokens[1], i) || !parse_int(tokens[2], j) ||
        !parse_int(tokens[3], r) || !parse_double(tokens[5], ms)) {
      throw InputError("malformed chain line", line_no);
    }
    ChainEntry e;
    for (auto tok : split(tokens[4], ',')) {
      NodeId v = 0;
      if (!parse_int(tok, v) || v >= table.locations_) throw InputError(fmt::format("bad hop '{}'", tok), line_no);
      e.hops.push_back(v);
    }
    if (e.hops.size() < 2 || e.hops.front() != i || e.hops.back() != j) {
      throw InputError("chain endpoints do not match the pair", line_no);
    }
    e.modeled_ms = ms;
    try {
      table.set(i, j, r, std::move(e));
    } catch (const InputError& err) {
      throw InputError(err.what(), line_no);
    }
    seen[table.index(i, j, r)] = true;
  }
  if (!have_model) throw InputError("table has no model header");
  for (NodeId i = 0; i < table.locations_; ++i)
    for (NodeId j = 0; j < table.locations_; ++j)
      for (int r = 1; i != j && r <= table.model_.max_rounds; ++r)
        if (!seen[table.index(i, j, r)]) throw InputError(fmt::format("missing entry ({}, {}, {})", i, j, r));
  table.generation_ = generation;
  return table;
}

void ChainLookupTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write(out);
}

ChainLookupTable ChainLookupTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read(in);
}

bool ChainLookupTable::same_content(const ChainLookupTable& other) const {
  return locations_ == other.locations_ && model_ == other.model_ && entries_ == other.entries_;
}

// ---------------------------------------------------------------------------

ChainLookupTable build_lookup_table(const ParetoFront& front, const TransferModel& m) {
  std::vector<NodeId> nodes(front.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) nodes[k] = static_cast<NodeId>(k);
  return build_lookup_table(front, m, nodes, front.size(), {});
}

ChainLookupTable build_lookup_table(const ParetoFront& front, const TransferModel& m,
                                    const std::vector<NodeId>& front_nodes, std::size_t locations,
                                    const std::map<NodeId, Steering>& steering) {
  if (front_nodes.size() != front.size()) throw InputError("front node map has the wrong size");
  ChainLookupTable table(locations, m);

  // Resolve every location to (front index, static link).
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> slot(locations, kNone);
  for (std::size_t k = 0; k < front_nodes.size(); ++k) {
    if (front_nodes[k] >= locations) throw InputError("front node out of range");
    slot[front_nodes[k]] = k;
  }
  struct Access {
    std::size_t core;
    bool steered;
    Delay rtt;
  };
  std::vector<Access> access(locations);
  for (NodeId loc = 0; loc < locations; ++loc) {
    auto it = steering.find(loc);
    if (slot[loc] != kNone) {
      if (it != steering.end()) throw InputError(fmt::format("location {} is both steered and a LoP", loc));
      access[loc] = {slot[loc], false, Delay::zero()};
    } else {
      if (it == steering.end()) throw InputError(fmt::format("location {} is neither a LoP nor steered", loc));
      if (it->second.lop >= locations || slot[it->second.lop] == kNone) {
        throw InputError(fmt::format("location {} is steered to {}, which is not a LoP", loc, it->second.lop));
      }
      access[loc] = {slot[it->second.lop], true, it->second.rtt};
    }
  }

  for (NodeId from = 0; from < locations; ++from) {
    for (NodeId to = 0; to < locations; ++to) {
      if (from == to) continue;
      const Access& in = access[from];
      const Access& out = access[to];
      const Delay extra_len = in.rtt + out.rtt;
      const Delay extra_max = std::max(in.rtt, out.rtt);
      const auto ci = static_cast<NodeId>(in.core);
      const auto co = static_cast<NodeId>(out.core);
      // Both ends steered to the same LoP: the core is the LoP alone.
      const ParetoPath trivial{{ci}, Delay::zero(), Delay::zero()};
      std::span<const ParetoPath> candidates =
          ci == co ? std::span<const ParetoPath>(&trivial, 1) : std::span<const ParetoPath>(front.at(ci, co));
      for (int r = 1; r <= m.max_rounds; ++r) {
        const ParetoPath& core = candidates[select_index(candidates, r, extra_len, extra_max)];
        ChainEntry e;
        if (in.steered) e.hops.push_back(from);
        for (NodeId h : core.hops) e.hops.push_back(front_nodes[h]);
        if (out.steered) e.hops.push_back(to);
        const Delay t2 = chain_time_doubled(core.length + extra_len, std::max(core.max_link, extra_max), r);
        e.modeled_ms = static_cast<double>(t2.picos()) / (2.0 * Delay::kPicosPerMs);
        table.set(from, to, r, std::move(e));
      }
    }
  }
  return table;
}

}  // namespace mosto
