#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "multires/graph.hpp"

namespace multires {

enum class BlockKind { partition, bipartite };

/// One block of a level's adjacency matrix: either the induced subgraph of a
/// community (partition) or the cross edges between two communities
/// (bipartite). Node ids are ids of the level graph.
struct SubgraphBlock {
  BlockKind kind = BlockKind::partition;
  int level = 0;
  NodeId parent_a = 0;   // parent node (partition) or first endpoint of parent edge
  NodeId parent_b = -1;  // second endpoint of parent edge; -1 for partitions
  Weight parent_weight = 0;
  std::vector<NodeId> nodes;    // ordered members of the (first) community
  std::vector<NodeId> nodes_b;  // ordered members of the second community (bipartite only)
  std::vector<Edge> edges;      // block edges, global ids

  Weight total_weight() const {
    Weight t = 0;
    for (const auto& e : edges) t += e.w;
    return t;
  }

  /// Dense block adjacency in local order. Partition blocks give a symmetric
  /// n x n matrix with self-weights on the diagonal; bipartite blocks give
  /// |nodes| x |nodes_b|.
  std::vector<std::vector<Weight>> local_adjacency() const {
    std::unordered_map<NodeId, int> pos_a, pos_b;
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) pos_a[nodes[i]] = i;
    for (int i = 0; i < static_cast<int>(nodes_b.size()); ++i) pos_b[nodes_b[i]] = i;
    if (kind == BlockKind::partition) {
      std::vector<std::vector<Weight>> a(nodes.size(), std::vector<Weight>(nodes.size(), 0));
      for (const auto& e : edges) {
        const int i = pos_a.at(e.u), j = pos_a.at(e.v);
        a[i][j] = e.w;
        a[j][i] = e.w;
      }
      return a;
    }
    std::vector<std::vector<Weight>> a(nodes.size(), std::vector<Weight>(nodes_b.size(), 0));
    for (const auto& e : edges) {
      if (pos_a.count(e.u)) {
        a[pos_a.at(e.u)][pos_b.at(e.v)] = e.w;
      } else {
        a[pos_a.at(e.v)][pos_b.at(e.u)] = e.w;
      }
    }
    return a;
  }
};

/// Where the weighted BFS starts. Without an explicit node the start is the
/// member of maximum weighted degree, lowest id on ties.
struct StartRule {
  std::optional<NodeId> node;
};

/// Weighted BFS over the subgraph spanned by `members` and `edges`. The
/// frontier is kept sorted descending by (weight of edges to already-ordered
/// nodes + self-loop weight), ties to the lowest id. A disconnected remainder
/// restarts at its max-weighted-degree node.
inline std::vector<NodeId> bfs_weighted_order(std::span<const NodeId> members, std::span<const Edge> edges,
                                              StartRule start = {}) {
  if (members.empty()) throw std::invalid_argument("bfs_weighted_order: empty block");
  std::vector<NodeId> ids(members.begin(), members.end());
  std::sort(ids.begin(), ids.end());
  const int n = static_cast<int>(ids.size());
  auto local = [&](NodeId g) {
    auto it = std::lower_bound(ids.begin(), ids.end(), g);
    if (it == ids.end() || *it != g) throw std::invalid_argument("bfs_weighted_order: edge endpoint outside block");
    return static_cast<int>(it - ids.begin());
  };
  std::vector<std::vector<std::pair<int, Weight>>> adj(static_cast<std::size_t>(n));
  std::vector<Weight> self(static_cast<std::size_t>(n), 0), wdeg(static_cast<std::size_t>(n), 0);
  for (const auto& e : edges) {
    const int a = local(e.u), b = local(e.v);
    if (a == b) {
      self[a] += e.w;
      wdeg[a] += e.w;
    } else {
      adj[a].push_back({b, e.w});
      adj[b].push_back({a, e.w});
      wdeg[a] += e.w;
      wdeg[b] += e.w;
    }
  }

  std::vector<Weight> score(self);
  std::vector<char> ordered(static_cast<std::size_t>(n), 0), queued(static_cast<std::size_t>(n), 0);
  std::vector<int> frontier;
  std::vector<NodeId> out;
  out.reserve(static_cast<std::size_t>(n));
  bool first = true;
  while (static_cast<int>(out.size()) < n) {
    if (frontier.empty()) {
      int s = -1;
      if (first && start.node) {
        s = local(*start.node);
      } else {
        for (int i = 0; i < n; ++i) {
          if (!ordered[i] && (s < 0 || wdeg[i] > wdeg[s])) s = i;
        }
      }
      first = false;
      frontier.push_back(s);
      queued[s] = 1;
    }
    auto best = frontier.begin();
    for (auto it = frontier.begin(); it != frontier.end(); ++it) {
      if (score[*it] > score[*best] || (score[*it] == score[*best] && *it < *best)) best = it;
    }
    const int u = *best;
    frontier.erase(best);
    ordered[u] = 1;
    out.push_back(ids[u]);
    for (const auto& [v, w] : adj[u]) {
      if (ordered[v]) continue;
      score[v] += w;
      if (!queued[v]) {
        queued[v] = 1;
        frontier.push_back(v);
      }
    }
  }
  return out;
}

/// Block overload; only partition blocks have an ordering.
inline std::vector<NodeId> bfs_weighted_order(const SubgraphBlock& block, StartRule start = {}) {
  if (block.kind != BlockKind::partition) throw std::invalid_argument("bfs_weighted_order: not a partition block");
  return bfs_weighted_order(block.nodes, block.edges, start);
}

}  // namespace multires
