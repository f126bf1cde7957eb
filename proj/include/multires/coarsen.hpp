#pragma once

#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "multires/graph.hpp"

namespace multires {

/// Collapses each community of `g` into one node. A community's internal
/// weight (self-loops of members included) becomes the new node's self-loop;
/// cross weights between two communities become one edge. Total weight is
/// preserved. The result is never a leaf graph.
inline std::pair<WeightedGraph, std::vector<NodeId>> coarsen_once(const WeightedGraph& g,
                                                                 const CommunityAssignment& c) {
  if (static_cast<int>(c.assign.size()) != g.num_nodes()) {
    throw std::invalid_argument("coarsen_once: assignment size does not match node count");
  }
  std::map<std::pair<NodeId, NodeId>, Weight> acc;
  for (const auto& e : g.edges()) {
    NodeId a = c.assign[e.u];
    NodeId b = c.assign[e.v];
    if (a > b) std::swap(a, b);
    acc[{a, b}] += e.w;
  }
  std::vector<Edge> edges;
  edges.reserve(acc.size());
  for (const auto& [key, w] : acc) {
    if (w > 0) edges.push_back({key.first, key.second, w});
  }
  return {WeightedGraph(c.count, std::move(edges), false), c.assign};
}

}  // namespace multires
