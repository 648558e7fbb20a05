#pragma once

// Independent reference implementations used to check the library. None of
// these share code with the code under test beyond the basic data types.

#include <cstdint>
#include <random>
#include <vector>

#include "pareto.hpp"
#include "topology.hpp"

namespace oracle {

using mosto::Delay;
using mosto::DistanceMatrix;
using mosto::NodeId;
using mosto::ParetoFront;
using mosto::ParetoPath;
using mosto::ProxyGraph;

// Dijkstra from every source.
DistanceMatrix dijkstra_mesh(const ProxyGraph& g);

// Every simple path i -> j with its criteria.
std::vector<ParetoPath> simple_paths(const DistanceMatrix& d, NodeId i, NodeId j);

// Front by exhaustive enumeration: for each bottleneck value m (ascending),
// the best path with max_link <= m under (length, hops, hop sequence) is an
// entry when it is strictly shorter than the previous entry.
ParetoFront brute_force_front(const DistanceMatrix& d);

// Random connected graph: a random spanning tree plus extra edges, RTTs drawn
// uniformly from [lo, hi] ms with the given resolution.
ProxyGraph random_graph(std::size_t n, double extra_edge_prob, double lo_ms, double hi_ms, double resolution_ms,
                        std::mt19937_64& rng);

// Random symmetric matrix (not necessarily metric) with integer-ms RTTs in
// [1, max_ms]. Small max_ms gives many ties.
DistanceMatrix random_matrix(std::size_t n, int max_ms, std::mt19937_64& rng);

// Planet-scale synthetic topology: nodes at random points on a sphere, RTT
// proportional to great-circle distance with routing inflation, each node
// linked to its k nearest neighbours plus a few long-haul links.
ProxyGraph synthetic_backbone(std::size_t n, std::uint64_t seed);

}  // namespace oracle
