#include "topology.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "error.hpp"
#include "text.hpp"

namespace mosto {

namespace {

NodeId parse_index(std::string_view token, int line) {
  NodeId value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw InputError(fmt::format("expected a node index, got '{}'", token), line);
  }
  return value;
}

bool connected(std::size_t n, const std::vector<Link>& links) {
  if (n == 0) return true;
  std::vector<NodeId> parent(n);
  std::iota(parent.begin(), parent.end(), NodeId{0});
  auto find = [&](NodeId x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (const auto& l : links) {
    NodeId a = find(l.u), b = find(l.v);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

}  // namespace

Delay parse_rtt_ms(std::string_view token, int line) {
  double ms = 0;
  if (!parse_double(token, ms)) {
    throw InputError(fmt::format("expected an RTT in ms, got '{}'", token), line);
  }
  if (!std::isfinite(ms) || ms <= 0) {
    throw InputError(fmt::format("RTT must be positive and finite, got '{}'", token), line);
  }
  if (ms > kMaxRttMs) {
    throw InputError(fmt::format("RTT {} ms exceeds the {} ms limit", token, kMaxRttMs), line);
  }
  Delay d = Delay::from_ms(ms);
  if (d.picos() <= 0) {
    throw InputError(fmt::format("RTT '{}' rounds to zero", token), line);
  }
  return d;
}

std::string format_ms(Delay d) { return fmt::format("{}", d.ms()); }

ProxyGraph::ProxyGraph(std::vector<std::string> names, std::vector<Link> links)
    : names_(std::move(names)), links_(std::move(links)) {
  const std::size_t n = names_.size();
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& l : links_) {
    if (l.u >= n || l.v >= n) throw InputError(fmt::format("link {}-{} references an unknown node", l.u, l.v));
    if (l.u == l.v) throw InputError(fmt::format("self-loop on node {}", l.u));
    if (l.rtt.picos() <= 0) throw InputError(fmt::format("non-positive RTT on link {}-{}", l.u, l.v));
    if (!seen.emplace(std::min(l.u, l.v), std::max(l.u, l.v)).second) {
      throw InputError(fmt::format("duplicate link {}-{}", l.u, l.v));
    }
  }
  if (!connected(n, links_)) throw InputError("topology is not connected");
}

ProxyGraph ProxyGraph::parse(std::string_view text) {
  std::vector<std::string> names;
  std::vector<bool> declared;
  std::vector<Link> links;
  std::set<std::pair<NodeId, NodeId>> seen;
  int line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    auto tokens = tokenize(strip_comment(line));
    if (tokens.empty()) continue;
    const std::string_view kind = tokens[0];
    if (kind == "node") {
      if (tokens.size() < 2 || tokens.size() > 3) {
        throw InputError("expected 'node <index> [<name>]'", line_no);
      }
      if (!links.empty()) throw InputError("node lines must precede link lines", line_no);
      NodeId id = parse_index(tokens[1], line_no);
      if (id >= 1'000'000) throw InputError(fmt::format("node index {} too large", id), line_no);
      if (id >= declared.size()) {
        declared.resize(id + 1, false);
        names.resize(id + 1);
      }
      if (declared[id]) throw InputError(fmt::format("node {} declared twice", id), line_no);
      declared[id] = true;
      names[id] = tokens.size() == 3 ? std::string(tokens[2]) : std::to_string(id);
    } else if (kind == "link") {
      if (tokens.size() != 4) throw InputError("expected 'link <u> <v> <rtt_ms>'", line_no);
      NodeId u = parse_index(tokens[1], line_no);
      NodeId v = parse_index(tokens[2], line_no);
      for (NodeId x : {u, v}) {
        if (x >= declared.size() || !declared[x]) {
          throw InputError(fmt::format("link references undeclared node {}", x), line_no);
        }
      }
      if (u == v) throw InputError(fmt::format("self-loop on node {}", u), line_no);
      Delay rtt = parse_rtt_ms(tokens[3], line_no);
      if (!seen.emplace(std::min(u, v), std::max(u, v)).second) {
        throw InputError(fmt::format("duplicate link {}-{}", u, v), line_no);
      }
      links.push_back({u, v, rtt});
    } else {
      throw InputError(fmt::format("unknown directive '{}'", kind), line_no);
    }
  }
  for (std::size_t i = 0; i < declared.size(); ++i) {
    if (!declared[i]) throw InputError(fmt::format("node indices are not dense: {} is missing", i));
  }
  if (names.empty()) throw InputError("topology declares no nodes");
  return ProxyGraph(std::move(names), std::move(links));
}

ProxyGraph ProxyGraph::load(const std::string& path) { return parse(read_file(path)); }

DistanceMatrix::DistanceMatrix(std::size_t n) : n_(n), d_(n * n, Delay::zero()) {}

DistanceMatrix DistanceMatrix::from_ms(std::size_t n, const std::vector<double>& rows) {
  if (rows.size() != n * n) throw InputError("matrix has the wrong number of entries");
  DistanceMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double v = rows[i * n + j];
      if (!std::isfinite(v) || v < 0 || v > kMaxRttMs) {
        throw InputError(fmt::format("invalid distance {} at ({}, {})", v, i, j));
      }
      m.d_[i * n + j] = Delay::from_ms(v);
    }
  }
  m.validate();
  return m;
}

void DistanceMatrix::set(NodeId i, NodeId j, Delay rtt) {
  if (i >= n_ || j >= n_) throw InputError(fmt::format("unknown node in pair ({}, {})", i, j));
  if (i == j) throw InputError("cannot set a diagonal distance");
  if (rtt.picos() <= 0) throw InputError("distance must be positive");
  d_[static_cast<std::size_t>(i) * n_ + j] = rtt;
  d_[static_cast<std::size_t>(j) * n_ + i] = rtt;
}

void DistanceMatrix::validate() const {
  for (std::size_t i = 0; i < n_; ++i) {
    if (d_[i * n_ + i] != Delay::zero()) throw InputError(fmt::format("d[{0}][{0}] must be 0", i));
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (d_[i * n_ + j] != d_[j * n_ + i]) {
        throw InputError(fmt::format("matrix is not symmetric at ({}, {})", i, j));
      }
      if (d_[i * n_ + j].picos() <= 0) {
        throw InputError(fmt::format("d[{}][{}] must be positive", i, j));
      }
    }
  }
}

bool DistanceMatrix::satisfies_triangle_inequality() const {
  for (std::size_t k = 0; k < n_; ++k)
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (d_[i * n_ + j] > d_[i * n_ + k] + d_[k * n_ + j]) return false;
  return true;
}

DistanceMatrix DistanceMatrix::submatrix(const std::vector<NodeId>& nodes) const {
  DistanceMatrix m(nodes.size());
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = 0; b < nodes.size(); ++b) m.d_[a * nodes.size() + b] = at(nodes[a], nodes[b]);
  m.validate();
  return m;
}

void DistanceMatrix::write_csv(std::ostream& out) const {
  out << "n=" << n_ << '\n';
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (j) out << ',';
      out << format_ms(d_[i * n_ + j]);
    }
    out << '\n';
  }
}

DistanceMatrix DistanceMatrix::read_csv(std::istream& in) {
  std::string line;
  int line_no = 0;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty()) continue;
    if (!t.starts_with("n=")) throw InputError("expected header 'n=<count>'", line_no);
    auto count = t.substr(2);
    auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), n);
    if (ec != std::errc() || ptr != count.data() + count.size() || n == 0) {
      throw InputError("invalid node count in header", line_no);
    }
    break;
  }
  if (n == 0) throw InputError("empty distance matrix file");
  std::vector<double> values;
  values.reserve(n * n);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty()) continue;
    if (rows == n) throw InputError("more rows than declared", line_no);
    std::size_t cols = 0;
    for (std::string_view cell : split(t, ',')) {
      double v = 0;
      if (!parse_double(trim(cell), v)) throw InputError(fmt::format("bad number '{}'", cell), line_no);
      values.push_back(v);
      ++cols;
    }
    if (cols != n) throw InputError(fmt::format("expected {} columns, got {}", n, cols), line_no);
    ++rows;
  }
  if (rows != n) throw InputError(fmt::format("expected {} rows, got {}", n, rows));
  return from_ms(n, values);
}

void DistanceMatrix::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_csv(out);
}

DistanceMatrix DistanceMatrix::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_csv(in);
}

DistanceMatrix build_full_mesh(const ProxyGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<Delay> d(n * n, Delay::infinite());
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = Delay::zero();
  for (const auto& l : g.links()) {
    d[l.u * n + l.v] = std::min(d[l.u * n + l.v], l.rtt);
    d[l.v * n + l.u] = std::min(d[l.v * n + l.u], l.rtt);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const Delay dik = d[i * n + k];
      if (dik.is_infinite()) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const Delay dkj = d[k * n + j];
        if (dkj.is_infinite()) continue;
        if (dik + dkj < d[i * n + j]) d[i * n + j] = dik + dkj;
      }
    }
  }
  DistanceMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m.set(static_cast<NodeId>(i), static_cast<NodeId>(j), d[i * n + j]);
  return m;
}

}  // namespace mosto
