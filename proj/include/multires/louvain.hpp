#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "multires/coarsen.hpp"
#include "multires/common.hpp"
#include "multires/graph.hpp"

namespace multires {

namespace detail {

// One local-moving phase. Gains are compared in exact integer arithmetic:
// gain(c) * 2m = k_in(c) * 2m - tot(c) * k_i, so ties are exact and broken
// toward the lowest community id.
inline CommunityAssignment louvain_local_moving(const WeightedGraph& g, const std::vector<NodeId>& order) {
  using Wide = __int128;
  const int n = g.num_nodes();
  std::vector<Weight> strength(static_cast<std::size_t>(n), 0);
  Weight two_m = 0;
  for (int i = 0; i < n; ++i) {
    strength[i] = 2 * g.self_weight(i);
    for (const auto& nb : g.neighbors(i)) strength[i] += nb.w;
    two_m += strength[i];
  }
  std::vector<int> comm(static_cast<std::size_t>(n));
  std::iota(comm.begin(), comm.end(), 0);
  std::vector<Weight> tot(strength);
  std::vector<Weight> k_in(static_cast<std::size_t>(n), 0);
  std::vector<int> touched;

  constexpr int kMaxPasses = 1000;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool moved = false;
    for (NodeId i : order) {
      const int own = comm[i];
      tot[own] -= strength[i];
      touched.clear();
      touched.push_back(own);
      for (const auto& nb : g.neighbors(i)) {
        const int c = comm[nb.node];
        if (k_in[c] == 0 && std::find(touched.begin(), touched.end(), c) == touched.end()) touched.push_back(c);
        k_in[c] += nb.w;
      }
      auto gain = [&](int c) { return Wide(k_in[c]) * two_m - Wide(tot[c]) * strength[i]; };
      int best = own;
      Wide best_gain = gain(own);
      for (int c : touched) {
        const Wide gc = gain(c);
        if (gc > best_gain || (gc == best_gain && c < best && best != own)) {
          best = c;
          best_gain = gc;
        }
      }
      for (int c : touched) k_in[c] = 0;
      comm[i] = best;
      tot[best] += strength[i];
      if (best != own) moved = true;
    }
    if (!moved) break;
  }
  return CommunityAssignment::from_labels(comm);
}

inline std::vector<NodeId> traversal_order(int n, std::uint64_t seed) {
  std::vector<NodeId> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (seed != 0) {
    Rng rng(seed);
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  }
  return order;
}

}  // namespace detail

/// Multi-phase Louvain community detection. Local moving runs to a fixed
/// point, communities are aggregated, and the process repeats until a phase
/// merges nothing. Seed 0 visits nodes in ascending id order; any other seed
/// visits them in a seeded random order. Deterministic for a given seed.
inline CommunityAssignment louvain(const WeightedGraph& g, std::uint64_t seed = 0) {
  const int n = g.num_nodes();
  if (n == 0) return {};
  std::vector<int> membership(static_cast<std::size_t>(n));
  std::iota(membership.begin(), membership.end(), 0);
  if (g.total_weight() == 0) return CommunityAssignment::singletons(n);

  WeightedGraph current = g;
  for (int phase = 0;; ++phase) {
    auto local = detail::louvain_local_moving(current, detail::traversal_order(current.num_nodes(), seed + phase * (seed != 0)));
    if (local.count == current.num_nodes()) break;
    for (auto& m : membership) m = local.assign[m];
    current = coarsen_once(current, local).first;
  }
  return CommunityAssignment::from_labels(membership);
}

}  // namespace multires
