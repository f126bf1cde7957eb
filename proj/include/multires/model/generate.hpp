#pragma once

// Top-down sampling. Every block of a level is drawn from its own random
// stream given the finished parent level, so blocks are independent and the
// result does not depend on the order in which they are visited.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <tuple>
#include <vector>

#include "multires/model/mrg.hpp"

namespace multires::model {

namespace detail {

enum class Stream : std::uint64_t { root = 0, count = 1, partition = 2, bipartite = 3 };

inline Rng block_rng(std::uint64_t seed, int level, Stream kind, std::uint64_t id) {
  return Rng(seed, (static_cast<std::uint64_t>(level) << 40) ^ (static_cast<std::uint64_t>(kind) << 36) ^ id);
}

/// pmf of the number of successes among independent Bernoulli(p_e) cells.
inline std::vector<double> poisson_binomial_pmf(const std::vector<double>& p) {
  std::vector<double> f{1.0};
  for (double q : p) {
    std::vector<double> g(f.size() + 1, 0.0);
    for (std::size_t c = 0; c < f.size(); ++c) {
      g[c] += f[c] * (1 - q);
      g[c + 1] += f[c] * q;
    }
    f = std::move(g);
  }
  return f;
}

/// Draws (component, count) from the mixture restricted to counts in
/// [lo, hi]; pmf_k(v) gives each component's count distribution.
template <class Pmf>
std::pair<std::size_t, Count> constrained_mixture_draw(Rng& rng, const std::vector<double>& beta, Count lo, Count hi,
                                                       Pmf&& pmf_k) {
  std::vector<std::vector<double>> pv;
  std::vector<double> wk;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    std::vector<double> p;
    double s = 0;
    for (Count v = lo; v <= hi; ++v) {
      p.push_back(pmf_k(k, v));
      s += p.back();
    }
    pv.push_back(std::move(p));
    wk.push_back(beta[k] * s);
  }
  double total = 0;
  for (double w : wk) total += w;
  if (!(total > 0)) return {dist::categorical_sample(rng, beta), lo};  // numerically empty range
  const std::size_t k = dist::categorical_sample(rng, wk);
  return {k, lo + static_cast<Count>(dist::categorical_sample(rng, pv[k]))};
}

/// Samples one row (or a whole bipartite block when lo == hi == R).
inline CountVector sample_cells(Rng& rng, const RowDistribution& rd, Count R, Count lo, Count hi, bool binary) {
  if (rd.kind == HeadKind::bernoulli) {
    std::vector<std::vector<double>> pb;
    for (const auto& p : rd.cells) pb.push_back(poisson_binomial_pmf(p));
    auto [k, v] = constrained_mixture_draw(rng, rd.beta, lo, hi, [&](std::size_t k, Count v) { return pb[k][v]; });
    return dist::conditional_bernoulli_sample(rng, v, rd.cells[k]);
  }
  std::size_t k;
  Count v;
  if (lo == hi) {
    k = dist::categorical_sample(rng, rd.beta);
    v = lo;
  } else if (lo == 0 && hi == R) {
    k = dist::categorical_sample(rng, rd.beta);
    v = dist::binomial_sample(rng, R, rd.eta[k]);
  } else {
    std::tie(k, v) = constrained_mixture_draw(rng, rd.beta, lo, hi, [&](std::size_t k, Count v) {
      return std::exp(dist::bi_logpmf(v, R, rd.eta[k]));
    });
  }
  return binary ? dist::sample_without_replacement(rng, v, rd.cells[k]) : dist::mn_sample(rng, v, rd.cells[k]);
}

inline Tensor2 row_of(const Tensor2& H, int r) {
  Tensor2 out(1, H.cols);
  std::copy(H.row(r).begin(), H.row(r).end(), out.data.begin());
  return out;
}

}  // namespace detail

/// Samples a hierarchy of the model's depth. Identical (model, seed) give
/// identical output.
inline HierarchicalGraph generate(const MRGModel& m, std::uint64_t seed) {
  if (m.root_hist.empty()) throw std::logic_error("generate: model histograms are not fitted");
  HierarchicalGraph hg;
  {
    Rng rng = detail::block_rng(seed, 0, detail::Stream::root, 0);
    const Weight w0 = m.root_hist.sample(rng);
    std::vector<Edge> e;
    if (w0 > 0) e.push_back({0, 0, w0});
    hg.levels.emplace_back(1, std::move(e), false);
  }
  for (int l = 1; l <= m.depth(); ++l) {
    const auto& P = hg.level(l - 1);
    const int np = P.num_nodes();
    const bool leaf = m.is_leaf(l);
    const HeadKind kind = m.head(l);
    const auto& lm = m.level(l);

    Tensor2 Hpar;
    {
      Tape t(&m.params);
      Hpar = t.value(parent_reps(t, lm, P));
    }

    std::vector<int> n(static_cast<std::size_t>(np));
    for (NodeId p = 0; p < np; ++p) {
      Rng rng = detail::block_rng(seed, l, detail::Stream::count, static_cast<std::uint64_t>(p));
      n[p] = std::max(1, m.count_hists.at(l - 1).sample(rng, P.self_weight(p), leaf));
    }
    if (leaf) {
      // Binary cross edges need n_a * n_b >= w; grow the smaller side.
      for (const auto& e : P.edges()) {
        if (e.u == e.v) continue;
        while (static_cast<Weight>(n[e.u]) * n[e.v] < e.w) ++n[n[e.u] <= n[e.v] ? e.u : e.v];
      }
    }
    std::vector<int> offset(static_cast<std::size_t>(np) + 1, 0);
    for (NodeId p = 0; p < np; ++p) offset[p + 1] = offset[p] + n[p];

    std::vector<Edge> edges;
    std::vector<NodeId> parent_of(static_cast<std::size_t>(offset[np]));
    std::vector<Adjacency> adj(static_cast<std::size_t>(np));
    for (NodeId p = 0; p < np; ++p) {
      for (int i = 0; i < n[p]; ++i) parent_of[offset[p] + i] = p;
      Rng rng = detail::block_rng(seed, l, detail::Stream::partition, static_cast<std::uint64_t>(p));
      const int k = n[p];
      Adjacency A(static_cast<std::size_t>(k), std::vector<Weight>(static_cast<std::size_t>(k), 0));
      Count R = P.self_weight(p);
      for (int row = leaf ? 1 : 0; row < k; ++row) {
        if (R == 0 && kind != HeadKind::bernoulli) break;
        const bool absorb = row == k - 1;
        Count lo = 0, hi = R;
        if (absorb) {
          lo = R;
        } else if (leaf) {
          const Count cap_after = static_cast<Count>(k) * (k - 1) / 2 - static_cast<Count>(row) * (row + 1) / 2;
          lo = std::max<Count>(0, R - cap_after);
          hi = std::min<Count>(row, R);
        }
        Tape t(&m.params);
        Var E = embed_rows(t, lm, A, row);
        HeadLogits h = partition_row_logits(t, lm, E, row, A, row, !leaf, t.constant(detail::row_of(Hpar, p)));
        const auto rd = row_distribution(t.value(h.Z), t.value(h.e), t.value(h.b), kind);
        const auto u = detail::sample_cells(rng, rd, R, lo, hi, leaf);
        for (int s = 0; s < row; ++s) {
          A[row][s] = u[s];
          A[s][row] = u[s];
        }
        if (!leaf) A[row][row] = u[row];
        R -= dist::total(u);
      }
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b <= a; ++b) {
          if (A[a][b] > 0) edges.push_back({offset[p] + b, offset[p] + a, A[a][b]});
        }
      }
      adj[p] = std::move(A);
    }

    std::vector<Tensor2> reps(static_cast<std::size_t>(np));
    auto reps_of = [&](NodeId p) -> const Tensor2& {
      if (reps[p].size() == 0) {
        Tape t(&m.params);
        reps[p] = t.value(block_reps(t, lm, embed_rows(t, lm, adj[p], n[p]), adj[p], n[p]));
      }
      return reps[p];
    };
    std::uint64_t bid = 0;
    for (const auto& e : P.edges()) {
      if (e.u == e.v) continue;
      Rng rng = detail::block_rng(seed, l, detail::Stream::bipartite, bid++);
      const int na = n[e.u], nb = n[e.v];
      CountVector u;
      if (na * nb == 1) {
        u = {e.w};
      } else {
        Tape t(&m.params);
        Var ctx = t.constant(detail::row_of(Hpar, e.u));
        ctx = ndiff::sub(t, ctx, t.constant(detail::row_of(Hpar, e.v)));
        HeadLogits h = bipartite_logits(t, lm, t.constant(reps_of(e.u)), na, t.constant(reps_of(e.v)), nb, ctx);
        const auto rd = row_distribution(t.value(h.Z), t.value(h.e), t.value(h.b), kind);
        u = detail::sample_cells(rng, rd, e.w, e.w, e.w, leaf);
      }
      for (int i = 0; i < na; ++i) {
        for (int j = 0; j < nb; ++j) {
          const Count w = u[static_cast<std::size_t>(i) * nb + j];
          if (w > 0) edges.push_back({offset[e.u] + i, offset[e.v] + j, w});
        }
      }
    }
    hg.levels.emplace_back(offset[np], std::move(edges), leaf);
    hg.parent_node.push_back(std::move(parent_of));
  }
  return hg;
}

}  // namespace multires::model
