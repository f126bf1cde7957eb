#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace multires {

using NodeId = int;
using Weight = std::int64_t;

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  Weight w = 1;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
  NodeId node;
  Weight w;
};

/// Undirected graph with positive integer edge weights. Edges are stored
/// once with u <= v, sorted by (u, v). Self-loops are permitted unless the
/// graph is a leaf. Immutable after construction.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  WeightedGraph(int n, std::vector<Edge> edges, bool leaf) : n_(n), leaf_(leaf), edges_(std::move(edges)) {
    if (n < 0) throw std::invalid_argument("WeightedGraph: negative node count");
    for (auto& e : edges_) {
      if (e.u > e.v) std::swap(e.u, e.v);
      if (e.u < 0 || e.v >= n) {
        throw std::invalid_argument("WeightedGraph: edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                    ") out of range for n=" + std::to_string(n));
      }
      if (e.w < 1) throw std::invalid_argument("WeightedGraph: non-positive edge weight");
      if (leaf && e.u == e.v) throw std::invalid_argument("WeightedGraph: self-loop in leaf graph");
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
    for (std::size_t i = 1; i < edges_.size(); ++i) {
      if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v) {
        throw std::invalid_argument("WeightedGraph: duplicate edge (" + std::to_string(edges_[i].u) + "," +
                                    std::to_string(edges_[i].v) + ")");
      }
    }
    build_adjacency();
  }

  int num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  bool is_leaf() const { return leaf_; }
  std::span<const Edge> edges() const { return edges_; }

  /// Non-self neighbors of u, sorted by node id.
  std::span<const Neighbor> neighbors(NodeId u) const {
    return {adj_.data() + offsets_[u], adj_.data() + offsets_[u + 1]};
  }

  Weight self_weight(NodeId u) const { return self_[u]; }

  /// Sum of incident non-self weights plus the self-loop weight once.
  Weight weighted_degree(NodeId u) const {
    Weight d = self_[u];
    for (const auto& nb : neighbors(u)) d += nb.w;
    return d;
  }

  int degree(NodeId u) const { return static_cast<int>(offsets_[u + 1] - offsets_[u]); }

  Weight weight(NodeId u, NodeId v) const {
    if (u == v) return self_[u];
    auto nbrs = neighbors(u);
    auto it = std::lower_bound(nbrs.begin(), nbrs.end(), v, [](const Neighbor& a, NodeId b) { return a.node < b; });
    return (it != nbrs.end() && it->node == v) ? it->w : 0;
  }

  /// Sum of all edge weights, self-loops included.
  Weight total_weight() const {
    Weight t = 0;
    for (const auto& e : edges_) t += e.w;
    return t;
  }

  friend bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
    return a.n_ == b.n_ && a.leaf_ == b.leaf_ && a.edges_ == b.edges_;
  }

 private:
  void build_adjacency() {
    offsets_.assign(static_cast<std::size_t>(n_) + 1, 0);
    self_.assign(static_cast<std::size_t>(n_), 0);
    for (const auto& e : edges_) {
      if (e.u == e.v) {
        self_[e.u] = e.w;
      } else {
        ++offsets_[e.u + 1];
        ++offsets_[e.v + 1];
      }
    }
    for (int i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
    adj_.resize(offsets_[n_]);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const auto& e : edges_) {
      if (e.u == e.v) continue;
      adj_[fill[e.u]++] = {e.v, e.w};
      adj_[fill[e.v]++] = {e.u, e.w};
    }
    for (int i = 0; i < n_; ++i) {
      std::sort(adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
                adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]),
                [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
    }
  }

  int n_ = 0;
  bool leaf_ = true;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adj_;
  std::vector<Weight> self_;
};

/// Node -> community map with contiguous ids 0..C-1, each used at least once.
struct CommunityAssignment {
  std::vector<int> assign;
  int count = 0;

  /// Renumbers arbitrary labels to 0..C-1 in order of first appearance.
  static CommunityAssignment from_labels(std::span<const int> labels) {
    CommunityAssignment c;
    c.assign.resize(labels.size());
    std::vector<int> remap;
    int max_label = -1;
    for (int l : labels) max_label = std::max(max_label, l);
    remap.assign(static_cast<std::size_t>(max_label + 1), -1);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] < 0) throw std::invalid_argument("CommunityAssignment: negative label");
      int& r = remap[labels[i]];
      if (r < 0) r = c.count++;
      c.assign[i] = r;
    }
    return c;
  }

  static CommunityAssignment singletons(int n) {
    CommunityAssignment c;
    c.assign.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) c.assign[i] = i;
    c.count = n;
    return c;
  }

  static CommunityAssignment single(int n) {
    CommunityAssignment c;
    c.assign.assign(static_cast<std::size_t>(n), 0);
    c.count = n > 0 ? 1 : 0;
    return c;
  }

  friend bool operator==(const CommunityAssignment&, const CommunityAssignment&) = default;
};

/// Newman modularity. A self-loop of weight w contributes 2w to its node's
/// strength and to its community's internal weight.
inline double modularity(const WeightedGraph& g, const CommunityAssignment& c) {
  const int n = g.num_nodes();
  double two_m = 0;
  std::vector<double> strength(static_cast<std::size_t>(n), 0.0);
  for (const auto& e : g.edges()) {
    if (e.u == e.v) {
      strength[e.u] += 2.0 * static_cast<double>(e.w);
    } else {
      strength[e.u] += static_cast<double>(e.w);
      strength[e.v] += static_cast<double>(e.w);
    }
    two_m += 2.0 * static_cast<double>(e.w);
  }
  if (two_m == 0) return 0.0;
  std::vector<double> internal(static_cast<std::size_t>(c.count), 0.0), total(static_cast<std::size_t>(c.count), 0.0);
  for (const auto& e : g.edges()) {
    if (c.assign[e.u] == c.assign[e.v]) internal[c.assign[e.u]] += 2.0 * static_cast<double>(e.w);
  }
  for (int i = 0; i < n; ++i) total[c.assign[i]] += strength[i];
  double q = 0;
  for (int k = 0; k < c.count; ++k) q += internal[k] / two_m - (total[k] / two_m) * (total[k] / two_m);
  return q;
}

}  // namespace multires
