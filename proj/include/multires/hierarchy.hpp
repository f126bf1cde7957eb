#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "multires/blocks.hpp"
#include "multires/coarsen.hpp"
#include "multires/graph.hpp"
#include "multires/louvain.hpp"

namespace multires {

/// Chain G^0 (single root node) .. G^L (leaf) with parent maps.
/// parent_node[l - 1][v] is the node of G^{l-1} that contains node v of G^l.
struct HierarchicalGraph {
  std::vector<WeightedGraph> levels;
  std::vector<std::vector<NodeId>> parent_node;

  int depth() const { return static_cast<int>(levels.size()) - 1; }
  const WeightedGraph& leaf() const { return levels.back(); }
  const WeightedGraph& level(int l) const { return levels.at(static_cast<std::size_t>(l)); }
  const std::vector<NodeId>& parents(int l) const { return parent_node.at(static_cast<std::size_t>(l - 1)); }

  /// Members of community `p` of level l - 1, ascending id.
  std::vector<NodeId> children(int l, NodeId p) const {
    std::vector<NodeId> out;
    const auto& par = parents(l);
    for (NodeId v = 0; v < static_cast<NodeId>(par.size()); ++v) {
      if (par[v] == p) out.push_back(v);
    }
    return out;
  }

  bool conserves_weight() const {
    for (std::size_t l = 1; l < levels.size(); ++l) {
      if (levels[l].total_weight() != levels[l - 1].total_weight()) return false;
    }
    return true;
  }

  /// Checks every structural invariant; throws std::logic_error naming the first violation.
  void validate() const {
    if (levels.size() < 2) throw std::logic_error("hierarchy: needs at least root and leaf");
    if (levels[0].num_nodes() != 1) throw std::logic_error("hierarchy: root must have exactly one node");
    if (parent_node.size() != levels.size() - 1) throw std::logic_error("hierarchy: parent map count");
    for (std::size_t l = 0; l < levels.size(); ++l) {
      if (levels[l].is_leaf() != (l + 1 == levels.size())) {
        throw std::logic_error("hierarchy: leaf flag misplaced at level " + std::to_string(l));
      }
    }
    for (std::size_t l = 1; l < levels.size(); ++l) {
      const auto& par = parent_node[l - 1];
      if (static_cast<int>(par.size()) != levels[l].num_nodes()) {
        throw std::logic_error("hierarchy: parent map size at level " + std::to_string(l));
      }
      std::vector<char> hit(static_cast<std::size_t>(levels[l - 1].num_nodes()), 0);
      for (NodeId p : par) {
        if (p < 0 || p >= levels[l - 1].num_nodes()) throw std::logic_error("hierarchy: parent id out of range");
        hit[p] = 1;
      }
      if (std::find(hit.begin(), hit.end(), 0) != hit.end()) {
        throw std::logic_error("hierarchy: parent map not surjective at level " + std::to_string(l));
      }
      // Each coarse edge must equal the aggregated fine weights.
      auto coarse = coarsen_once(levels[l], CommunityAssignment{par, levels[l - 1].num_nodes()}).first;
      if (!std::equal(coarse.edges().begin(), coarse.edges().end(), levels[l - 1].edges().begin(),
                      levels[l - 1].edges().end())) {
        throw std::logic_error("hierarchy: level " + std::to_string(l - 1) + " is not the coarsening of level " +
                               std::to_string(l));
      }
    }
  }

  friend bool operator==(const HierarchicalGraph&, const HierarchicalGraph&) = default;
};

namespace detail {

inline WeightedGraph relabel(const WeightedGraph& g, const std::vector<NodeId>& new_id, bool leaf) {
  std::vector<Edge> edges;
  edges.reserve(g.num_edges());
  for (const auto& e : g.edges()) edges.push_back({new_id[e.u], new_id[e.v], e.w});
  return WeightedGraph(g.num_nodes(), std::move(edges), leaf);
}

}  // namespace detail

/// Relabels every level strictly between root and leaf so that node ids
/// follow (parent id, weighted-BFS position within the community). The leaf
/// keeps its ids. Idempotent.
inline HierarchicalGraph canonicalize(HierarchicalGraph hg) {
  const int L = hg.depth();
  for (int l = 1; l < L; ++l) {
    const auto& g = hg.levels[l];
    const auto& par = hg.parent_node[l - 1];
    std::vector<NodeId> new_id(static_cast<std::size_t>(g.num_nodes()), -1);
    std::vector<std::vector<NodeId>> members(static_cast<std::size_t>(hg.levels[l - 1].num_nodes()));
    for (NodeId v = 0; v < g.num_nodes(); ++v) members[par[v]].push_back(v);
    std::vector<std::vector<Edge>> inner(members.size());
    for (const auto& e : g.edges()) {
      if (par[e.u] == par[e.v]) inner[par[e.u]].push_back(e);
    }
    NodeId next = 0;
    for (std::size_t p = 0; p < members.size(); ++p) {
      for (NodeId v : bfs_weighted_order(members[p], inner[p])) new_id[v] = next++;
    }
    std::vector<NodeId> new_par(par.size());
    for (NodeId v = 0; v < g.num_nodes(); ++v) new_par[new_id[v]] = par[v];
    hg.levels[l] = detail::relabel(g, new_id, false);
    hg.parent_node[l - 1] = std::move(new_par);
    for (auto& p : hg.parent_node[l]) p = new_id[p];
  }
  return hg;
}

/// Builds a depth-L hierarchy over leaf graph `g` by repeated Louvain +
/// coarsening until a single node remains. When Louvain stops merging before
/// that, everything left is merged into the root. Deeper chains keep the
/// root, the leaf and the L-1 levels nearest the leaf; shallower chains get
/// single-node copies of the root inserted below it.
inline HierarchicalGraph build_hierarchy(const WeightedGraph& g, int target_depth, std::uint64_t seed = 0) {
  if (target_depth < 1) throw std::invalid_argument("build_hierarchy: target depth must be >= 1");
  if (!g.is_leaf()) throw std::invalid_argument("build_hierarchy: input must be a leaf graph");
  if (g.num_nodes() < 1) throw std::invalid_argument("build_hierarchy: empty graph");

  // Leaf first.
  std::vector<WeightedGraph> chain{g};
  std::vector<std::vector<NodeId>> up;  // up[i]: chain[i] node -> chain[i+1] node
  while (chain.back().num_nodes() > 1 || chain.size() == 1) {
    const auto& cur = chain.back();
    auto c = louvain(cur, seed);
    if (c.count == cur.num_nodes() && cur.num_nodes() > 1) c = CommunityAssignment::single(cur.num_nodes());
    if (cur.num_nodes() == 1) c = CommunityAssignment::single(1);
    auto [coarse, map] = coarsen_once(cur, c);
    chain.push_back(std::move(coarse));
    up.push_back(std::move(map));
  }
  const int natural = static_cast<int>(up.size());

  HierarchicalGraph hg;
  const WeightedGraph& root = chain.back();
  if (natural > target_depth) {
    // Keep chain[0..L-1] plus the root; the map into the root is all zeros.
    hg.levels.push_back(root);
    for (int i = target_depth - 1; i >= 0; --i) hg.levels.push_back(chain[i]);
    hg.parent_node.emplace_back(static_cast<std::size_t>(chain[target_depth - 1].num_nodes()), 0);
    for (int i = target_depth - 2; i >= 0; --i) hg.parent_node.push_back(up[i]);
  } else {
    hg.levels.push_back(root);
    for (int k = natural; k < target_depth; ++k) {
      hg.levels.push_back(root);
      hg.parent_node.emplace_back(1, 0);
    }
    for (int i = natural - 1; i >= 0; --i) {
      hg.levels.push_back(chain[i]);
      hg.parent_node.push_back(up[i]);
    }
  }
  return canonicalize(std::move(hg));
}

/// Partition blocks (one per node of G^{l-1}, ascending) followed by
/// bipartite blocks (one per positive non-self edge of G^{l-1}, sorted).
/// Every edge of G^l lands in exactly one block.
inline std::vector<SubgraphBlock> extract_blocks(const HierarchicalGraph& hg, int l) {
  if (l < 1 || l > hg.depth()) throw std::out_of_range("extract_blocks: level out of range");
  const auto& g = hg.level(l);
  const auto& parent_g = hg.level(l - 1);
  const auto& par = hg.parents(l);
  const int np = parent_g.num_nodes();

  std::vector<SubgraphBlock> parts(static_cast<std::size_t>(np));
  std::vector<std::vector<NodeId>> members(static_cast<std::size_t>(np));
  for (NodeId v = 0; v < g.num_nodes(); ++v) members[par[v]].push_back(v);
  std::map<std::pair<NodeId, NodeId>, std::vector<Edge>> cross;
  for (const auto& e : g.edges()) {
    NodeId a = par[e.u], b = par[e.v];
    if (a == b) {
      parts[a].edges.push_back(e);
    } else {
      if (a > b) std::swap(a, b);
      cross[{a, b}].push_back(e);
    }
  }
  std::vector<SubgraphBlock> out;
  out.reserve(static_cast<std::size_t>(np) + cross.size());
  for (NodeId p = 0; p < np; ++p) {
    auto& b = parts[p];
    b.kind = BlockKind::partition;
    b.level = l;
    b.parent_a = p;
    b.parent_weight = parent_g.self_weight(p);
    b.nodes = members[p].empty() ? std::vector<NodeId>{} : bfs_weighted_order(members[p], b.edges);
    out.push_back(std::move(b));
  }
  for (const auto& e : parent_g.edges()) {
    if (e.u == e.v) continue;
    SubgraphBlock b;
    b.kind = BlockKind::bipartite;
    b.level = l;
    b.parent_a = e.u;
    b.parent_b = e.v;
    b.parent_weight = e.w;
    b.nodes = out[e.u].nodes;
    b.nodes_b = out[e.v].nodes;
    auto it = cross.find({e.u, e.v});
    if (it != cross.end()) b.edges = it->second;
    out.push_back(std::move(b));
  }
  for (const auto& [key, edges] : cross) {
    if (parent_g.weight(key.first, key.second) == 0) {
      throw std::logic_error("extract_blocks: cross edges without a parent edge");
    }
  }
  return out;
}

}  // namespace multires
