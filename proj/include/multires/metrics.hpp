#pragma once

// Graph statistics, their histograms, TV-kernel MMD and the Erdos-Renyi
// reference sampler.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "multires/common.hpp"
#include "multires/graph.hpp"
#include "multires/parallel.hpp"

namespace multires::metrics {

enum class Statistic { degree, clustering, orbit, spectrum };

inline std::string to_string(Statistic s) {
  switch (s) {
    case Statistic::degree: return "degree";
    case Statistic::clustering: return "clustering";
    case Statistic::orbit: return "orbit";
    case Statistic::spectrum: return "spectrum";
  }
  return "?";
}

/// Normalized histogram over uniform bins [lo + i*width, lo + (i+1)*width).
/// `empty` marks a graph without any sample; its mass is all zero.
struct StatHistogram {
  Statistic stat = Statistic::degree;
  double lo = 0;
  double width = 1;
  std::vector<double> mass;
  bool empty = false;

  double bin_edge(std::size_t i) const { return lo + width * static_cast<double>(i); }
};

namespace detail {

inline StatHistogram normalized(Statistic s, double lo, double width, std::vector<double> counts) {
  StatHistogram h{s, lo, width, std::move(counts), false};
  double total = 0;
  for (double c : h.mass) total += c;
  if (total == 0) {
    h.empty = true;
  } else {
    for (double& c : h.mass) c /= total;
  }
  return h;
}

inline StatHistogram integer_hist(Statistic s, const std::vector<long long>& values) {
  long long top = 0;
  for (long long v : values) top = std::max(top, v);
  std::vector<double> counts(static_cast<std::size_t>(top) + 1, 0.0);
  for (long long v : values) counts[static_cast<std::size_t>(v)] += 1;
  return normalized(s, 0, 1, std::move(counts));
}

inline StatHistogram uniform_hist(Statistic s, const std::vector<double>& values, double lo, double hi, int bins) {
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  const double width = (hi - lo) / bins;
  for (double v : values) {
    const double x = std::clamp(v, lo, hi);
    const int b = std::min(bins - 1, static_cast<int>(std::floor((x - lo) / width)));
    counts[static_cast<std::size_t>(b)] += 1;
  }
  return normalized(s, lo, width, std::move(counts));
}

}  // namespace detail

inline StatHistogram degree_hist(const WeightedGraph& g) {
  std::vector<long long> d(static_cast<std::size_t>(g.num_nodes()));
  for (NodeId u = 0; u < g.num_nodes(); ++u) d[u] = g.degree(u);
  return detail::integer_hist(Statistic::degree, d);
}

/// Local clustering coefficient per node; 0 below degree 2.
inline std::vector<double> clustering_coefficients(const WeightedGraph& g) {
  const int n = g.num_nodes();
  std::vector<char> mark(static_cast<std::size_t>(n), 0);
  std::vector<double> c(static_cast<std::size_t>(n), 0.0);
  for (NodeId v = 0; v < n; ++v) {
    const auto nb = g.neighbors(v);
    const long long d = static_cast<long long>(nb.size());
    if (d < 2) continue;
    for (const auto& a : nb) mark[a.node] = 1;
    long long links = 0;  // each neighbor pair counted twice
    for (const auto& a : nb) {
      for (const auto& b : g.neighbors(a.node)) links += mark[b.node];
    }
    for (const auto& a : nb) mark[a.node] = 0;
    c[v] = static_cast<double>(links) / static_cast<double>(d * (d - 1));
  }
  return c;
}

inline StatHistogram clustering_hist(const WeightedGraph& g) {
  return detail::uniform_hist(Statistic::clustering, clustering_coefficients(g), 0.0, 1.0, 100);
}

inline constexpr int kFirstOrbit = 4;
inline constexpr int kNumOrbits = 11;  // orbits 4..14
using OrbitCounts = std::array<long long, 15>;

/// Orbit of each node of a connected 4-node graph, given its within-graph
/// degree and the graph's degree sequence signature.
inline int orbit_of(int edges, int max_deg, int min_deg, int deg) {
  switch (edges) {
    case 3:
      if (max_deg == 3) return deg == 3 ? 7 : 6;  // star
      return deg == 1 ? 4 : 5;                     // path
    case 4:
      if (min_deg == 2) return 8;  // cycle
      return deg == 1 ? 9 : deg == 2 ? 10 : 11;  // paw
    case 5: return deg == 2 ? 12 : 13;           // diamond
    case 6: return 14;
  }
  throw std::logic_error("orbit_of: not a connected 4-node graph");
}

/// Per-node counts of orbits 4..14 (indices 0..3 stay zero), by enumerating
/// every connected 4-node induced subgraph once with ESU.
inline std::vector<OrbitCounts> orbit_counts_4(const WeightedGraph& g) {
  const int n = g.num_nodes();
  std::vector<OrbitCounts> out(static_cast<std::size_t>(n));
  for (auto& a : out) a.fill(0);
  std::vector<std::uint8_t> adj(static_cast<std::size_t>(n) * n, 0);
  for (const auto& e : g.edges()) {
    if (e.u == e.v) continue;
    adj[static_cast<std::size_t>(e.u) * n + e.v] = adj[static_cast<std::size_t>(e.v) * n + e.u] = 1;
  }
  auto linked = [&](int a, int b) { return adj[static_cast<std::size_t>(a) * n + b] != 0; };

  std::array<int, 4> sub{};
  auto record = [&] {
    std::array<int, 4> deg{};
    int edges = 0;
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        if (linked(sub[i], sub[j])) ++deg[i], ++deg[j], ++edges;
      }
    }
    const int hi = *std::max_element(deg.begin(), deg.end());
    const int lo = *std::min_element(deg.begin(), deg.end());
    for (int i = 0; i < 4; ++i) ++out[sub[i]][orbit_of(edges, hi, lo, deg[i])];
  };

  // ESU: extension candidates are neighbors of the newest node that exceed
  // the root and are not already in, or adjacent to, the subgraph.
  auto extend = [&](auto&& self, int size, std::vector<int> ext, int root) -> void {
    if (size == 4) {
      record();
      return;
    }
    while (!ext.empty()) {
      const int w = ext.back();
      ext.pop_back();
      std::vector<int> next = ext;
      for (const auto& nb : g.neighbors(w)) {
        const int u = nb.node;
        if (u <= root) continue;
        bool excluded = false;
        for (int i = 0; i < size && !excluded; ++i) excluded = u == sub[i] || linked(u, sub[i]);
        if (!excluded) next.push_back(u);
      }
      sub[size] = w;
      self(self, size + 1, std::move(next), root);
    }
  };
  for (int v = 0; v < n; ++v) {
    sub[0] = v;
    std::vector<int> ext;
    for (const auto& nb : g.neighbors(v)) {
      if (nb.node > v) ext.push_back(nb.node);
    }
    extend(extend, 1, std::move(ext), v);
  }
  return out;
}

/// One histogram per orbit 4..14 over the nodes' counts.
inline std::vector<StatHistogram> orbit_hists(const WeightedGraph& g) {
  const auto counts = orbit_counts_4(g);
  std::vector<StatHistogram> out;
  for (int o = kFirstOrbit; o < kFirstOrbit + kNumOrbits; ++o) {
    std::vector<long long> v;
    for (const auto& c : counts) v.push_back(c[o]);
    out.push_back(detail::integer_hist(Statistic::orbit, v));
  }
  return out;
}

/// Ascending eigenvalues of I - D^{-1/2} A D^{-1/2}; isolated nodes give 0.
inline std::vector<double> laplacian_spectrum(const WeightedGraph& g) {
  const int n = g.num_nodes();
  if (n == 0) return {};
  Eigen::VectorXd dinv(n);
  for (NodeId u = 0; u < n; ++u) {
    Weight d = 0;
    for (const auto& nb : g.neighbors(u)) d += nb.w;
    dinv(u) = d > 0 ? 1.0 / std::sqrt(static_cast<double>(d)) : 0.0;
  }
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (NodeId u = 0; u < n; ++u) {
    if (dinv(u) > 0) L(u, u) = 1.0;
    for (const auto& nb : g.neighbors(u)) L(u, nb.node) = -static_cast<double>(nb.w) * dinv(u) * dinv(nb.node);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(L, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("laplacian_spectrum: eigensolver failed");
  const auto& ev = solver.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + n);
}

inline StatHistogram laplacian_spectrum_hist(const WeightedGraph& g) {
  return detail::uniform_hist(Statistic::spectrum, laplacian_spectrum(g), 0.0, 2.0, 200);
}

inline double tv_distance(const StatHistogram& a, const StatHistogram& b) {
  if (a.stat != b.stat || a.lo != b.lo || a.width != b.width || a.mass.size() != b.mass.size()) {
    throw std::invalid_argument("tv_distance: histogram bins are not aligned");
  }
  double s = 0;
  for (std::size_t i = 0; i < a.mass.size(); ++i) s += std::abs(a.mass[i] - b.mass[i]);
  return 0.5 * s;
}

/// Extends integer-binned histograms with zero bins to a common length.
inline void pad_to_common(std::vector<StatHistogram>& a, std::vector<StatHistogram>& b) {
  std::size_t len = 0;
  for (const auto* set : {&a, &b}) {
    for (const auto& h : *set) len = std::max(len, h.mass.size());
  }
  for (auto* set : {&a, &b}) {
    for (auto& h : *set) h.mass.resize(len, 0.0);
  }
}

/// Biased MMD^2 with kernel exp(-TV^2 / (2 sigma^2)).
inline double mmd(const std::vector<StatHistogram>& A, const std::vector<StatHistogram>& B, double sigma = 1.0,
                  int threads = 1) {
  if (A.empty() || B.empty()) throw std::invalid_argument("mmd: empty set");
  auto mean_kernel = [&](const std::vector<StatHistogram>& X, const std::vector<StatHistogram>& Y) {
    std::vector<double> rows(X.size(), 0.0);
    parallel_for(static_cast<int>(X.size()), threads, [&](int i) {
      for (const auto& y : Y) {
        const double tv = tv_distance(X[i], y);
        rows[i] += std::exp(-tv * tv / (2 * sigma * sigma));
      }
    });
    double s = 0;
    for (double r : rows) s += r;
    return s / (static_cast<double>(X.size()) * static_cast<double>(Y.size()));
  };
  return mean_kernel(A, A) + mean_kernel(B, B) - 2 * mean_kernel(A, B);
}

/// MMD of one statistic between two graph sets. Integer-binned statistics
/// are padded to the global maximum; the orbit score averages the MMDs of
/// the eleven per-orbit histograms.
inline double mmd_statistic(const std::vector<WeightedGraph>& A, const std::vector<WeightedGraph>& B, Statistic s,
                            int threads = 1) {
  if (A.empty() || B.empty()) throw std::invalid_argument("mmd_statistic: empty set");
  auto per_graph = [&](const std::vector<WeightedGraph>& gs) {
    std::vector<std::vector<StatHistogram>> out(gs.size());
    parallel_for(static_cast<int>(gs.size()), threads, [&](int i) {
      switch (s) {
        case Statistic::degree: out[i] = {degree_hist(gs[i])}; break;
        case Statistic::clustering: out[i] = {clustering_hist(gs[i])}; break;
        case Statistic::orbit: out[i] = orbit_hists(gs[i]); break;
        case Statistic::spectrum: out[i] = {laplacian_spectrum_hist(gs[i])}; break;
      }
    });
    return out;
  };
  const auto ha = per_graph(A);
  const auto hb = per_graph(B);
  const std::size_t parts = ha.front().size();
  double total = 0;
  for (std::size_t p = 0; p < parts; ++p) {
    std::vector<StatHistogram> xa, xb;
    for (const auto& h : ha) xa.push_back(h[p]);
    for (const auto& h : hb) xb.push_back(h[p]);
    pad_to_common(xa, xb);
    total += mmd(xa, xb, 1.0, threads);
  }
  return total / static_cast<double>(parts);
}

struct MmdRow {
  double degree = 0, clustering = 0, orbit = 0, spectrum = 0;
};

inline MmdRow mmd_table_row(const std::vector<WeightedGraph>& ref, const std::vector<WeightedGraph>& gen,
                            int threads = 1) {
  return {mmd_statistic(ref, gen, Statistic::degree, threads), mmd_statistic(ref, gen, Statistic::clustering, threads),
          mmd_statistic(ref, gen, Statistic::orbit, threads), mmd_statistic(ref, gen, Statistic::spectrum, threads)};
}

/// Uniform simple graph with exactly m edges (G(n, m)).
inline WeightedGraph erdos_renyi_sample(int n, long long m, Rng& rng) {
  const long long pairs = static_cast<long long>(n) * (n - 1) / 2;
  if (n < 0 || m < 0 || m > pairs) {
    throw std::invalid_argument("erdos_renyi_sample: m=" + std::to_string(m) + " infeasible for n=" + std::to_string(n));
  }
  // Floyd's subset sampling over pair indices.
  std::unordered_set<long long> chosen;
  for (long long j = pairs - m; j < pairs; ++j) {
    const auto t = static_cast<long long>(rng.below(static_cast<std::uint64_t>(j + 1)));
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<long long> idx(chosen.begin(), chosen.end());
  std::sort(idx.begin(), idx.end());
  std::vector<Edge> edges;
  edges.reserve(idx.size());
  // Pair index t enumerates (a, b), a < b, row by row over b.
  for (long long t : idx) {
    auto b = static_cast<long long>((1 + std::sqrt(1.0 + 8.0 * static_cast<double>(t))) / 2);
    while (b * (b - 1) / 2 > t) --b;
    while ((b + 1) * b / 2 <= t) ++b;
    const long long a = t - b * (b - 1) / 2;
    edges.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b), 1});
  }
  return WeightedGraph(n, std::move(edges), true);
}

/// `count` G(n, m) graphs whose (n, m) pairs are drawn from the reference
/// set's empirical joint distribution.
inline std::vector<WeightedGraph> erdos_renyi_baseline(const std::vector<WeightedGraph>& ref, int count,
                                                       std::uint64_t seed) {
  if (ref.empty()) throw std::invalid_argument("erdos_renyi_baseline: empty reference set");
  std::vector<WeightedGraph> out;
  for (int i = 0; i < count; ++i) {
    Rng rng(seed, 0x45520000ULL + static_cast<std::uint64_t>(i));
    const auto& r = ref[rng.below(ref.size())];
    long long m = 0;
    for (const auto& e : r.edges()) m += e.u != e.v;
    out.push_back(erdos_renyi_sample(r.num_nodes(), m, rng));
  }
  return out;
}

}  // namespace multires::metrics
