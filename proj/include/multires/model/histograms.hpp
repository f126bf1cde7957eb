#pragma once

// Empirical distributions that the network does not model: the root weight
// and the number of children of each parent node.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "multires/common.hpp"
#include "multires/graph.hpp"

namespace multires::model {

/// Weight bucket: exact up to 32, then one bucket per power of two.
inline int weight_bucket(Weight w) {
  if (w <= 32) return static_cast<int>(w);
  return 32 + static_cast<int>(std::bit_width(static_cast<std::uint64_t>(w - 1))) - 5;
}

/// Histogram of root self-weights.
class RootHistogram {
 public:
  void add(Weight w) {
    ++counts_[w];
    ++total_;
  }
  bool empty() const { return total_ == 0; }
  const std::map<Weight, long>& counts() const { return counts_; }

  /// log p(w); an unseen weight gives -inf and a warning on stderr.
  double log_prob(Weight w) const {
    auto it = counts_.find(w);
    if (it == counts_.end()) {
      std::cerr << "warning: root weight " << w << " never seen in training data\n";
      return kNegInf;
    }
    return std::log(static_cast<double>(it->second) / static_cast<double>(total_));
  }

  Weight sample(Rng& rng) const {
    if (empty()) throw std::logic_error("RootHistogram: empty");
    auto r = static_cast<long>(rng.below(static_cast<std::uint64_t>(total_)));
    for (const auto& [w, c] : counts_) {
      if (r < c) return w;
      r -= c;
    }
    return counts_.rbegin()->first;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [w, c] : counts_) j.push_back({w, c});
    return j;
  }

  static RootHistogram from_json(const nlohmann::json& j) {
    RootHistogram h;
    if (!j.is_array()) throw ParseError("root_hist", "expected an array of [weight, count]");
    for (const auto& e : j) {
      if (!e.is_array() || e.size() != 2) throw ParseError("root_hist", "expected [weight, count]");
      const auto c = e[1].get<long>();
      h.counts_[e[0].get<Weight>()] += c;
      h.total_ += c;
    }
    return h;
  }

 private:
  std::map<Weight, long> counts_;
  long total_ = 0;
};

/// Number of children per parent node, keyed by the bucket of the parent's
/// self-weight.
class CountHistogram {
 public:
  void add(Weight parent_weight, int n) { ++table_[weight_bucket(parent_weight)][n]; }
  bool empty() const { return table_.empty(); }
  const std::map<int, std::map<int, long>>& table() const { return table_; }

  /// Draws a child count for a parent of weight w. When `leaf` is set, only
  /// counts that can hold w binary edges (n(n-1)/2 >= w) are eligible. Falls
  /// back to the nearest populated bucket, then to the smallest feasible n.
  int sample(Rng& rng, Weight w, bool leaf) const {
    auto feasible = [&](int n) { return n >= 1 && (!leaf || static_cast<Weight>(n) * (n - 1) / 2 >= w); };
    const int key = weight_bucket(w);
    std::vector<int> order;  // buckets by distance from key, lower first on ties
    for (const auto& [b, _] : table_) order.push_back(b);
    std::stable_sort(order.begin(), order.end(), [key](int a, int b) { return std::abs(a - key) < std::abs(b - key); });
    for (int b : order) {
      const auto& row = table_.at(b);
      long total = 0;
      for (const auto& [n, c] : row) {
        if (feasible(n)) total += c;
      }
      if (total == 0) continue;
      auto r = static_cast<long>(rng.below(static_cast<std::uint64_t>(total)));
      for (const auto& [n, c] : row) {
        if (!feasible(n)) continue;
        if (r < c) return n;
        r -= c;
      }
    }
    int n = 1;
    while (!feasible(n)) ++n;
    return n;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [b, row] : table_) {
      for (const auto& [n, c] : row) j.push_back({b, n, c});
    }
    return j;
  }

  static CountHistogram from_json(const nlohmann::json& j, const std::string& field) {
    CountHistogram h;
    if (!j.is_array()) throw ParseError(field, "expected an array of [bucket, n, count]");
    for (const auto& e : j) {
      if (!e.is_array() || e.size() != 3) throw ParseError(field, "expected [bucket, n, count]");
      h.table_[e[0].get<int>()][e[1].get<int>()] += e[2].get<long>();
    }
    return h;
  }

 private:
  std::map<int, std::map<int, long>> table_;
};

}  // namespace multires::model
