#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "multires/hierarchy.hpp"
#include "multires/model/config.hpp"
#include "multires/model/heads.hpp"
#include "multires/model/histograms.hpp"
#include "multires/ndiff/layers.hpp"

namespace multires::model {

using ndiff::Tape;
using ndiff::Var;
using Adjacency = std::vector<std::vector<Weight>>;

/// Parameters of one level: row embedding, GNN, and the three heads.
struct LevelModel {
  ndiff::Linear embed;  // raw row -> d_h
  ndiff::GNN gnn;
  ndiff::MLP theta;  // [edge rep ; context] -> K logits per candidate cell
  ndiff::MLP eta;    // [pooled reps ; context] -> K
  ndiff::MLP beta;   // [pooled reps ; context] -> K

  static LevelModel create(ndiff::ParamStore& ps, const std::string& prefix, const ModelConfig& c, Rng& rng) {
    LevelModel m;
    const int d = c.hidden;
    m.embed = ndiff::Linear::create(ps, prefix + ".embed", c.input_width, d, rng);
    m.gnn = ndiff::GNN::create(ps, prefix + ".gnn", c.gnn_layers, d, rng);
    m.theta = ndiff::head_mlp(ps, prefix + ".theta", 2 * d, d, c.mixtures, rng);
    m.eta = ndiff::head_mlp(ps, prefix + ".eta", 2 * d, d, c.mixtures, rng);
    m.beta = ndiff::head_mlp(ps, prefix + ".beta", 2 * d, d, c.mixtures, rng);
    return m;
  }
};

struct MRGModel {
  ModelConfig config;
  ndiff::ParamStore params;
  std::vector<LevelModel> levels;  // one per level, or a single shared entry
  RootHistogram root_hist;
  std::vector<CountHistogram> count_hists;  // [l - 1]: children per node of G^{l-1}

  /// Fresh parameters; config.input_width must already be resolved.
  static MRGModel create(const ModelConfig& cfg) {
    cfg.validate();
    if (cfg.input_width < 1) throw std::invalid_argument("MRGModel: input_width must be resolved before creation");
    MRGModel m;
    m.config = cfg;
    Rng rng(cfg.seed, 0x6d6f64656cULL);
    const int n = cfg.shared ? 1 : cfg.depth;
    for (int l = 0; l < n; ++l) {
      m.levels.push_back(LevelModel::create(m.params, cfg.shared ? "shared" : "level" + std::to_string(l + 1), cfg, rng));
    }
    m.count_hists.resize(static_cast<std::size_t>(cfg.depth));
    return m;
  }

  int depth() const { return config.depth; }
  const LevelModel& level(int l) const { return config.shared ? levels.front() : levels.at(static_cast<std::size_t>(l - 1)); }
  HeadKind head(int l) const { return l == config.depth ? config.leaf_head : HeadKind::softmax; }
  bool is_leaf(int l) const { return l == config.depth; }

  void fit_histograms(const std::vector<HierarchicalGraph>& hgs) {
    root_hist = RootHistogram{};
    count_hists.assign(static_cast<std::size_t>(config.depth), CountHistogram{});
    for (const auto& hg : hgs) {
      if (hg.depth() != config.depth) throw std::invalid_argument("fit_histograms: hierarchy depth differs from model");
      root_hist.add(hg.level(0).self_weight(0));
      for (int l = 1; l <= hg.depth(); ++l) {
        const auto& parent = hg.level(l - 1);
        std::vector<int> n(static_cast<std::size_t>(parent.num_nodes()), 0);
        for (NodeId p : hg.parents(l)) ++n[p];
        for (NodeId p = 0; p < parent.num_nodes(); ++p) count_hists[l - 1].add(parent.self_weight(p), n[p]);
      }
    }
  }
};

/// Widest adjacency row across all blocks of all levels (at least 1).
inline int derive_input_width(const std::vector<HierarchicalGraph>& hgs) {
  int w = 1;
  for (const auto& hg : hgs) {
    for (int l = 1; l <= hg.depth(); ++l) {
      std::vector<int> n(static_cast<std::size_t>(hg.level(l - 1).num_nodes()), 0);
      for (NodeId p : hg.parents(l)) ++n[p];
      for (int c : n) w = std::max(w, c);
    }
  }
  return w;
}

// Features ------------------------------------------------------------------

/// Writes log1p of the lower-triangular row A[t][0..t] into row r of X,
/// zero-padded at the end; a row longer than the width keeps its trailing
/// entries.
inline void put_row(Tensor2& X, int r, const std::vector<Weight>& row, int t) {
  const int W = X.cols;
  const int len = t + 1;
  const int skip = std::max(0, len - W);
  for (int j = skip; j < len; ++j) X(r, j - skip) = std::log1p(static_cast<double>(row[j]));
}

inline Adjacency dense_adjacency(const WeightedGraph& g) {
  Adjacency a(static_cast<std::size_t>(g.num_nodes()), std::vector<Weight>(static_cast<std::size_t>(g.num_nodes()), 0));
  for (const auto& e : g.edges()) {
    a[e.u][e.v] = e.w;
    a[e.v][e.u] = e.w;
  }
  return a;
}

/// Embeddings of the first n rows of A, plus one embedded all-zero row at
/// index n (the node currently being generated).
inline Var embed_rows(Tape& t, const LevelModel& lm, const Adjacency& A, int n) {
  Tensor2 X(n + 1, lm.embed.in);
  for (int r = 0; r < n; ++r) put_row(X, r, A[r], r);
  return lm.embed(t, t.constant(std::move(X)));
}

inline ndiff::EdgeList block_edges(const Adjacency& A, int n) {
  ndiff::EdgeList e;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < a; ++b) {
      if (A[a][b] > 0) e.emplace_back(b, a);
    }
  }
  return e;
}

/// GNN representations of the nodes of G^{l-1}, used as generation context.
inline Var parent_reps(Tape& t, const LevelModel& lm, const WeightedGraph& parent) {
  const auto A = dense_adjacency(parent);
  const int n = parent.num_nodes();
  Var E = embed_rows(t, lm, A, n);
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  return ndiff::gnn_forward(t, lm.gnn, ndiff::gather_rows(t, E, idx), block_edges(A, n));
}

/// Representations of a completely generated partition (n nodes).
inline Var block_reps(Tape& t, const LevelModel& lm, Var E, const Adjacency& A, int n) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  return ndiff::gnn_forward(t, lm.gnn, ndiff::gather_rows(t, E, idx), block_edges(A, n));
}

struct HeadLogits {
  Var Z;  // C x K
  Var e;  // 1 x K
  Var b;  // 1 x K
};

/// Logits for row t of a partition. E holds embeddings of rows 0..t-1 and
/// the zero row at `zero_row`; A must be known for rows 0..t-1. Candidates
/// are the edges (t, s) for s < t, followed by the self-loop when
/// `with_self` is set.
inline HeadLogits partition_row_logits(Tape& t, const LevelModel& lm, Var E, int zero_row, const Adjacency& A, int row,
                                       bool with_self, Var ctx) {
  std::vector<int> idx(static_cast<std::size_t>(row));
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<int> nodes = idx;
  nodes.push_back(zero_row);
  auto edges = block_edges(A, row);
  for (int s = 0; s < row; ++s) edges.emplace_back(s, row);
  Var h = ndiff::gnn_forward(t, lm.gnn, ndiff::gather_rows(t, E, nodes), edges);

  std::vector<int> dst(static_cast<std::size_t>(row), row);
  std::vector<int> src = idx;
  if (with_self) {
    dst.push_back(row);
    src.push_back(row);
  }
  Var dh = ndiff::sub(t, ndiff::gather_rows(t, h, dst), ndiff::gather_rows(t, h, src));
  Var Z = lm.theta(t, ndiff::concat_broadcast(t, dh, ctx));
  Var pool = row > 0 ? ndiff::sum_rows(t, ndiff::gather_rows(t, h, idx)) : t.constant(Tensor2(1, lm.gnn.width));
  Var pc = ndiff::concat_cols(t, pool, ctx);
  return {Z, lm.eta(t, pc), lm.beta(t, pc)};
}

/// Logits for a bipartite block over all na x nb pairs, row-major.
inline HeadLogits bipartite_logits(Tape& t, const LevelModel& lm, Var Ha, int na, Var Hb, int nb, Var ctx) {
  std::vector<int> ia, ib;
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) {
      ia.push_back(i);
      ib.push_back(j);
    }
  }
  Var dh = ndiff::sub(t, ndiff::gather_rows(t, Ha, ia), ndiff::gather_rows(t, Hb, ib));
  Var Z = lm.theta(t, ndiff::concat_broadcast(t, dh, ctx));
  Var pc = ndiff::concat_cols(t, ndiff::sum_rows(t, dh), ctx);
  return {Z, lm.eta(t, pc), lm.beta(t, pc)};
}

inline Var partition_context(Tape& t, Var Hpar, NodeId p) { return ndiff::gather_rows(t, Hpar, {p}); }

inline Var bipartite_context(Tape& t, Var Hpar, NodeId a, NodeId b) {
  return ndiff::sub(t, ndiff::gather_rows(t, Hpar, {a}), ndiff::gather_rows(t, Hpar, {b}));
}

}  // namespace multires::model
