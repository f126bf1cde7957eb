#pragma once

// Synthetic community graphs and dataset splitting.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "multires/common.hpp"
#include "multires/graph.hpp"
#include "multires/io.hpp"

namespace multires::datasets {

struct RewireStats {
  long selected = 0;  // edges chosen for rewiring
  long moved = 0;     // rewired to a new pair
  long dropped = 0;   // rewiring collided with an existing edge
};

/// Relaxed caveman graph: l cliques of k nodes; each edge is rewired with
/// probability p by moving one uniformly chosen endpoint to a uniform node
/// outside the source clique. A rewiring that lands on an existing edge
/// drops the edge.
inline WeightedGraph gen_rcg(int l, int k, double p, Rng& rng, RewireStats* stats = nullptr) {
  if (l < 1 || k < 1) throw std::invalid_argument("gen_rcg: need l >= 1 and k >= 1");
  if (p < 0 || p > 1) throw std::invalid_argument("gen_rcg: p outside [0, 1]");
  const int n = l * k;
  std::set<std::pair<int, int>> present;
  std::vector<std::pair<int, int>> original;
  for (int c = 0; c < l; ++c) {
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) original.emplace_back(c * k + i, c * k + j);
    }
  }
  present.insert(original.begin(), original.end());
  RewireStats local;
  for (auto [u, v] : original) {
    if (l < 2 || rng.uniform() >= p) continue;
    ++local.selected;
    const int keep = rng.below(2) == 0 ? u : v;
    const int clique = keep / k;
    int w = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - k)));
    if (w >= clique * k) w += k;  // skip the source clique
    present.erase({u, v});
    const auto key = std::minmax(keep, w);
    if (present.count(key)) {
      ++local.dropped;
    } else {
      present.insert(key);
      ++local.moved;
    }
  }
  if (stats) *stats = local;
  std::vector<Edge> edges;
  for (auto [a, b] : present) edges.push_back({a, b, 1});
  return WeightedGraph(n, std::move(edges), true);
}

/// Planted partition graph: l groups of k nodes, intra-group pairs linked
/// with p_in and inter-group pairs with p_out.
inline WeightedGraph gen_ppg(int l, int k, double p_in, double p_out, Rng& rng) {
  if (l < 1 || k < 1) throw std::invalid_argument("gen_ppg: need l >= 1 and k >= 1");
  if (p_in < 0 || p_in > 1 || p_out < 0 || p_out > 1) throw std::invalid_argument("gen_ppg: probability outside [0, 1]");
  const int n = l * k;
  std::vector<Edge> edges;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (rng.uniform() < (a / k == b / k ? p_in : p_out)) edges.push_back({a, b, 1});
    }
  }
  return WeightedGraph(n, std::move(edges), true);
}

enum class Kind { rcg, ppg, edge_list_dir };

inline std::string to_string(Kind k) {
  return k == Kind::rcg ? "rcg" : k == Kind::ppg ? "ppg" : "edge-list-dir";
}

inline Kind kind_from_string(const std::string& s, const std::string& field = "dataset.kind") {
  if (s == "rcg") return Kind::rcg;
  if (s == "ppg") return Kind::ppg;
  if (s == "edge-list-dir") return Kind::edge_list_dir;
  throw ParseError(field, "unknown dataset kind '" + s + "' (rcg, ppg, edge-list-dir)");
}

/// Inclusive size ranges plus optional probability overrides.
struct DatasetSpec {
  Kind kind = Kind::rcg;
  int l_min = 7, l_max = 24;
  int k_min = 15, k_max = 24;
  int count = 100;
  std::uint64_t seed = 0;
  std::optional<double> p;      // RCG rewiring probability; default 1/l
  std::optional<double> p_in;   // PPG; default 0.75
  std::optional<double> p_out;  // PPG; default 10 / (k l^2)
  std::string dir;              // edge-list-dir: every regular file, by name

  void validate() const {
    if (l_min < 1 || l_max < l_min) throw ParseError("dataset.l", "empty or invalid range");
    if (k_min < 1 || k_max < k_min) throw ParseError("dataset.k", "empty or invalid range");
    if (count < 0) throw ParseError("dataset.count", "must be >= 0");
    if (kind == Kind::edge_list_dir && dir.empty()) throw ParseError("dataset.dir", "required for edge-list-dir");
    for (auto [v, name] : {std::pair{p, "dataset.p"}, {p_in, "dataset.p_in"}, {p_out, "dataset.p_out"}}) {
      if (v && (*v < 0 || *v > 1)) throw ParseError(name, "must lie in [0, 1]");
    }
  }

  static DatasetSpec rcg_paper() { return {}; }
  static DatasetSpec rcg_desk() {
    DatasetSpec s;
    s.l_min = 4, s.l_max = 7, s.k_min = 5, s.k_max = 9;
    return s;
  }
  static DatasetSpec ppg_paper() {
    DatasetSpec s;
    s.kind = Kind::ppg;
    s.l_min = 20, s.l_max = 29, s.k_min = 15, s.k_max = 24;
    return s;
  }
  static DatasetSpec ppg_desk() {
    DatasetSpec s = rcg_desk();
    s.kind = Kind::ppg;
    return s;
  }
};

/// Graph i is drawn from its own stream, so any subset regenerates identically.
inline WeightedGraph generate_one(const DatasetSpec& s, int i) {
  Rng rng(s.seed, static_cast<std::uint64_t>(i));
  const int l = static_cast<int>(rng.range(s.l_min, s.l_max));
  const int k = static_cast<int>(rng.range(s.k_min, s.k_max));
  if (s.kind == Kind::rcg) return gen_rcg(l, k, s.p.value_or(1.0 / l), rng);
  return gen_ppg(l, k, s.p_in.value_or(0.75), s.p_out.value_or(std::min(1.0, 10.0 / (k * l * l))), rng);
}

/// Every regular file of `dir` in name order, parsed as an edge list.
inline std::vector<WeightedGraph> load_edge_list_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("cannot open directory " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<WeightedGraph> out;
  for (const auto& f : files) out.push_back(read_edge_list_text(read_file(f.string()), f.filename().string()));
  return out;
}

inline std::vector<WeightedGraph> generate_dataset(const DatasetSpec& s) {
  s.validate();
  if (s.kind == Kind::edge_list_dir) return load_edge_list_dir(s.dir);
  std::vector<WeightedGraph> out;
  out.reserve(static_cast<std::size_t>(s.count));
  for (int i = 0; i < s.count; ++i) out.push_back(generate_one(s, i));
  return out;
}

struct Split {
  std::vector<int> train, val, test;  // indices into the input
};

/// 20% test, then 20% of the remainder as validation, after a seeded shuffle.
inline Split split_80_20(int n, std::uint64_t seed) {
  if (n < 5) throw std::invalid_argument("split_80_20: need at least 5 graphs");
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed, 0x73706c6974ULL);
  for (int i = n - 1; i > 0; --i) std::swap(idx[i], idx[rng.below(static_cast<std::uint64_t>(i + 1))]);
  const int n_test = n / 5;
  const int n_val = (n - n_test) / 5;
  Split s;
  s.test.assign(idx.begin(), idx.begin() + n_test);
  s.val.assign(idx.begin() + n_test, idx.begin() + n_test + n_val);
  s.train.assign(idx.begin() + n_test + n_val, idx.end());
  for (auto* v : {&s.train, &s.val, &s.test}) std::sort(v->begin(), v->end());
  return s;
}

}  // namespace multires::datasets
