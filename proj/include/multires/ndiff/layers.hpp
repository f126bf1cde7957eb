#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "multires/ndiff/tape.hpp"

namespace multires::ndiff {

struct Linear {
  int weight = -1;  // in x out
  int bias = -1;    // 1 x out
  int in = 0;
  int out = 0;

  static Linear create(ParamStore& ps, const std::string& name, int in, int out, Rng& rng) {
    Linear l;
    l.in = in;
    l.out = out;
    l.weight = ps.add(name + ".W", glorot_uniform(in, out, rng));
    l.bias = ps.add(name + ".b", Tensor2(1, out));
    return l;
  }

  Var operator()(Tape& t, Var x) const { return add_bias(t, matmul(t, x, t.param(weight)), t.param(bias)); }
};

/// Affine layers with ReLU between them (none after the last).
struct MLP {
  std::vector<Linear> layers;

  /// widths = {in, hidden..., out}.
  static MLP create(ParamStore& ps, const std::string& name, const std::vector<int>& widths, Rng& rng) {
    if (widths.size() < 2) throw std::invalid_argument("MLP: need at least input and output widths");
    MLP m;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
      m.layers.push_back(Linear::create(ps, name + ".l" + std::to_string(i), widths[i], widths[i + 1], rng));
    }
    return m;
  }

  int in() const { return layers.front().in; }
  int out() const { return layers.back().out; }

  Var operator()(Tape& t, Var x) const {
    const auto& xv = t.value(x);
    if (xv.cols != in()) {
      throw std::invalid_argument("MLP: input width " + std::to_string(xv.cols) + ", expected " + std::to_string(in()));
    }
    if (!xv.all_finite()) throw std::domain_error("MLP: non-finite input");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      x = layers[i](t, x);
      if (i + 1 < layers.size()) x = relu(t, x);
    }
    return x;
  }
};

/// Two hidden layers of width `hidden`, as used by the output heads.
inline MLP head_mlp(ParamStore& ps, const std::string& name, int in, int hidden, int out, Rng& rng) {
  return MLP::create(ps, name, {in, hidden, hidden, out}, rng);
}

struct GNNLayer {
  MLP message;    // [h_dst ; h_src] -> d
  MLP attention;  // [h_dst ; h_src] -> 1, squashed by a sigmoid
  MLP update;     // [h ; aggregated messages] -> d
};

/// Attentive message passing. Each layer computes, over the given edges in
/// both directions,
///   m_ij = MLP_msg([h_i ; h_j]),  a_ij = sigmoid(MLP_att([h_i ; h_j])),
///   h_i <- MLP_upd([h_i ; sum_j a_ij m_ij]).
struct GNN {
  std::vector<GNNLayer> layers;
  int width = 0;

  static GNN create(ParamStore& ps, const std::string& name, int layers, int width, Rng& rng) {
    GNN g;
    g.width = width;
    for (int i = 0; i < layers; ++i) {
      const std::string p = name + ".layer" + std::to_string(i);
      g.layers.push_back({MLP::create(ps, p + ".msg", {2 * width, width, width}, rng),
                          MLP::create(ps, p + ".att", {2 * width, width, 1}, rng),
                          MLP::create(ps, p + ".upd", {2 * width, width, width}, rng)});
    }
    return g;
  }
};

using EdgeList = std::vector<std::pair<int, int>>;

/// Runs all layers of `gnn` over node features h (n x width). Each undirected
/// edge is used in both directions; messages are summed per destination in
/// ascending source order.
inline Var gnn_forward(Tape& t, const GNN& gnn, Var h, const EdgeList& edges) {
  const int n = t.value(h).rows;
  if (t.value(h).cols != gnn.width) throw std::invalid_argument("gnn_forward: feature width mismatch");
  std::vector<std::pair<int, int>> directed;  // (dst, src)
  directed.reserve(edges.size() * 2);
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) throw std::out_of_range("gnn_forward: dangling edge id");
    if (u == v) continue;
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());
  std::vector<int> dst, src;
  for (auto [d, s] : directed) {
    dst.push_back(d);
    src.push_back(s);
  }
  for (const auto& layer : gnn.layers) {
    Var agg;
    if (directed.empty()) {
      agg = t.constant(Tensor2(n, gnn.width));
    } else {
      Var pair = concat_cols(t, gather_rows(t, h, dst), gather_rows(t, h, src));
      Var msg = layer.message(t, pair);
      Var att = sigmoid(t, layer.attention(t, pair));
      agg = scatter_add_rows(t, scale_rows(t, msg, att), dst, n);
    }
    h = layer.update(t, concat_cols(t, h, agg));
  }
  return h;
}

}  // namespace multires::ndiff
