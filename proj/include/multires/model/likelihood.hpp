#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "multires/blocks.hpp"
#include "multires/model/mrg.hpp"

namespace multires::model {

/// Log-likelihood of level l of `hg` given level l-1, split by block in
/// extract_blocks order. With `grads`, adds scale * d(total)/d(params).
struct LevelResult {
  double total = 0;
  std::vector<double> blocks;
};

namespace detail {

inline CountVector row_target(const Adjacency& A, int row, bool with_self) {
  CountVector u(A[row].begin(), A[row].begin() + row);
  if (with_self) u.push_back(A[row][row]);
  return u;
}

}  // namespace detail

inline LevelResult evaluate_level(const MRGModel& m, const HierarchicalGraph& hg, int l, ndiff::Grads* grads = nullptr,
                                  double scale = 1.0) {
  if (hg.depth() != m.depth()) throw std::invalid_argument("evaluate_level: hierarchy depth differs from model");
  if (l < 1 || l > m.depth()) throw std::out_of_range("evaluate_level: level out of range");
  const auto& lm = m.level(l);
  const HeadKind kind = m.head(l);
  const bool leaf = m.is_leaf(l);
  const bool bern = kind == HeadKind::bernoulli;

  Tape t(&m.params);
  const auto blocks = extract_blocks(hg, l);
  Var Hpar = parent_reps(t, lm, hg.level(l - 1));

  LevelResult res;
  res.blocks.assign(blocks.size(), 0.0);
  std::vector<Var> roots;
  std::map<NodeId, Var> embedded;  // partition parent -> row embeddings
  std::map<NodeId, Adjacency> adj;
  auto add_term = [&](std::size_t bi, Var v) {
    res.blocks[bi] += t.value(v).data[0];
    roots.push_back(v);
  };

  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& b = blocks[bi];
    if (b.kind != BlockKind::partition) continue;
    const int n = static_cast<int>(b.nodes.size());
    if (n == 0) continue;
    adj[b.parent_a] = b.local_adjacency();
    const auto& A = adj[b.parent_a];
    Var E = embed_rows(t, lm, A, n);
    embedded[b.parent_a] = E;
    Var ctx = partition_context(t, Hpar, b.parent_a);
    Count R = b.parent_weight;
    for (int row = leaf ? 1 : 0; row < n; ++row) {
      if (R == 0 && !bern) break;  // every later row is certainly empty
      const bool absorb = row == n - 1;
      const int C = row + (leaf ? 0 : 1);
      RowTarget tgt{detail::row_target(A, row, !leaf), R, absorb};
      R -= dist::total(tgt.u);
      if (absorb && C == 1 && !bern) continue;  // certain event
      HeadLogits h = partition_row_logits(t, lm, E, n, A, row, !leaf, ctx);
      add_term(bi, mixture_loglik_op(t, h.Z, h.e, h.b, tgt, kind));
    }
  }

  std::map<NodeId, Var> reps;
  auto reps_of = [&](NodeId p) {
    auto it = reps.find(p);
    if (it != reps.end()) return it->second;
    const auto& A = adj.at(p);
    Var H = block_reps(t, lm, embedded.at(p), A, static_cast<int>(A.size()));
    reps.emplace(p, H);
    return H;
  };
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& b = blocks[bi];
    if (b.kind != BlockKind::bipartite) continue;
    const int na = static_cast<int>(b.nodes.size());
    const int nb = static_cast<int>(b.nodes_b.size());
    if (na * nb == 0) throw std::invalid_argument("evaluate_level: positive parent edge over an empty community");
    if (na * nb == 1 && !bern) continue;  // all weight on the single pair
    const auto A = b.local_adjacency();
    RowTarget tgt;
    tgt.remaining = b.parent_weight;
    tgt.absorb = true;
    for (const auto& r : A) tgt.u.insert(tgt.u.end(), r.begin(), r.end());
    HeadLogits h = bipartite_logits(t, lm, reps_of(b.parent_a), na, reps_of(b.parent_b), nb,
                                    bipartite_context(t, Hpar, b.parent_a, b.parent_b));
    add_term(bi, mixture_loglik_op(t, h.Z, h.e, h.b, tgt, kind));
  }

  for (double v : res.blocks) res.total += v;
  if (grads && !roots.empty()) t.backward(roots, scale, *grads);
  return res;
}

inline double level_loglik(const MRGModel& m, const HierarchicalGraph& hg, int l) { return evaluate_level(m, hg, l).total; }

/// Sum of level log-likelihoods plus the empirical root term.
inline double hg_loglik(const MRGModel& m, const HierarchicalGraph& hg) {
  if (hg.depth() != m.depth()) throw std::invalid_argument("hg_loglik: hierarchy depth differs from model");
  double s = m.root_hist.log_prob(hg.level(0).self_weight(0));
  for (int l = 1; l <= m.depth(); ++l) s += level_loglik(m, hg, l);
  return s;
}

/// hg_loglik that also adds scale * d(hg_loglik)/d(params) into `grads`.
inline double hg_loglik_grad(const MRGModel& m, const HierarchicalGraph& hg, ndiff::Grads& grads, double scale) {
  if (hg.depth() != m.depth()) throw std::invalid_argument("hg_loglik: hierarchy depth differs from model");
  double s = m.root_hist.log_prob(hg.level(0).self_weight(0));
  for (int l = 1; l <= m.depth(); ++l) s += evaluate_level(m, hg, l, &grads, scale).total;
  return s;
}

}  // namespace multires::model
