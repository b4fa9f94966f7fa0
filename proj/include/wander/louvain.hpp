#pragma once

#include <cstddef>
#include <vector>

namespace wander {

struct WeightedEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  double weight = 0.0;
};

/// Undirected weighted graph; each edge is listed once.
struct WeightedGraph {
  std::size_t node_count = 0;
  std::vector<WeightedEdge> edges;
};

/// Newman modularity of a node -> community assignment.
double modularity(const WeightedGraph& g, const std::vector<std::size_t>& community_of);

/// Two-phase Louvain (local moving, then aggregation, repeated until no node
/// moves). Nodes are visited in index order and gain ties go to the lowest
/// community index, so the result is deterministic. Communities are returned
/// with sorted members, ordered by their smallest member.
std::vector<std::vector<std::size_t>> louvain_cluster(const WeightedGraph& g);

}  // namespace wander
