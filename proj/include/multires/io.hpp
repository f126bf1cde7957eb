#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <tuple>
#include <string>
#include <vector>

#include <json.hpp>

#include "multires/common.hpp"
#include "multires/hierarchy.hpp"

namespace multires {

// HG file format (JSON, integers only):
//   {"depth": L,
//    "levels": [{"n": 1, "leaf": false, "edges": [[u, v, w], ...]}, ...],   // L + 1 entries, root first
//    "parent_node": [[...], ...]}                                           // L entries, for levels 1..L
// Edges are listed with u <= v, sorted by (u, v).

inline nlohmann::json hierarchy_to_json(const HierarchicalGraph& hg) {
  nlohmann::json j;
  j["depth"] = hg.depth();
  j["levels"] = nlohmann::json::array();
  for (const auto& g : hg.levels) {
    nlohmann::json lj;
    lj["n"] = g.num_nodes();
    lj["leaf"] = g.is_leaf();
    lj["edges"] = nlohmann::json::array();
    for (const auto& e : g.edges()) lj["edges"].push_back({e.u, e.v, e.w});
    j["levels"].push_back(std::move(lj));
  }
  j["parent_node"] = hg.parent_node;
  return j;
}

inline std::string serialize(const HierarchicalGraph& hg) { return hierarchy_to_json(hg).dump() + "\n"; }

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "." + key, "missing");
  return *it;
}

inline long long as_int(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ParseError(path, "expected an integer");
  return v.get<long long>();
}

}  // namespace detail

inline HierarchicalGraph hierarchy_from_json(const nlohmann::json& j) {
  using detail::as_int;
  using detail::field;
  const long long depth = as_int(field(j, "depth", "hg"), "hg.depth");
  const auto& levels = field(j, "levels", "hg");
  if (!levels.is_array()) throw ParseError("hg.levels", "expected an array");
  if (depth < 1 || static_cast<long long>(levels.size()) != depth + 1) {
    throw ParseError("hg.levels", "expected depth + 1 entries");
  }
  HierarchicalGraph hg;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const std::string path = "hg.levels[" + std::to_string(l) + "]";
    const long long n = as_int(field(levels[l], "n", path), path + ".n");
    const auto& leaf = field(levels[l], "leaf", path);
    if (!leaf.is_boolean()) throw ParseError(path + ".leaf", "expected a boolean");
    const auto& edges = field(levels[l], "edges", path);
    if (!edges.is_array()) throw ParseError(path + ".edges", "expected an array");
    std::vector<Edge> es;
    es.reserve(edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const std::string ep = path + ".edges[" + std::to_string(k) + "]";
      if (!edges[k].is_array() || edges[k].size() != 3) throw ParseError(ep, "expected [u, v, w]");
      es.push_back({static_cast<NodeId>(as_int(edges[k][0], ep + "[0]")),
                    static_cast<NodeId>(as_int(edges[k][1], ep + "[1]")), as_int(edges[k][2], ep + "[2]")});
    }
    try {
      hg.levels.emplace_back(static_cast<int>(n), std::move(es), leaf.get<bool>());
    } catch (const std::invalid_argument& e) {
      throw ParseError(path + ".edges", e.what());
    }
  }
  const auto& parents = field(j, "parent_node", "hg");
  if (!parents.is_array() || static_cast<long long>(parents.size()) != depth) {
    throw ParseError("hg.parent_node", "expected depth entries");
  }
  for (std::size_t l = 0; l < parents.size(); ++l) {
    const std::string path = "hg.parent_node[" + std::to_string(l) + "]";
    if (!parents[l].is_array()) throw ParseError(path, "expected an array");
    std::vector<NodeId> p;
    for (std::size_t k = 0; k < parents[l].size(); ++k) {
      p.push_back(static_cast<NodeId>(as_int(parents[l][k], path + "[" + std::to_string(k) + "]")));
    }
    hg.parent_node.push_back(std::move(p));
  }
  try {
    hg.validate();
  } catch (const std::logic_error& e) {
    throw ParseError("hg", e.what());
  }
  return hg;
}

inline HierarchicalGraph deserialize(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("hg", std::string("malformed JSON (") + e.what() + ")");
  }
  return hierarchy_from_json(j);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

/// Reads a whitespace-separated "u v [w]" edge list. Lines starting with
/// '#' are comments. Node ids are compacted to 0..n-1 in ascending order of
/// the original ids; repeated pairs keep the first weight; self-loops are
/// dropped since leaves may not carry them.
inline WeightedGraph parse_edge_list(const std::string& text, const std::string& source = "edge list") {
  std::istringstream in(text);
  std::string line;
  std::vector<std::tuple<long long, long long, long long>> raw;
  std::map<long long, NodeId> ids;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<long long> tok;
    std::string t;
    while (ls >> t) {
      try {
        std::size_t used = 0;
        tok.push_back(std::stoll(t, &used));
        if (used != t.size()) throw std::invalid_argument(t);
      } catch (const std::exception&) {
        throw ParseError(source + ":" + std::to_string(line_no), "non-integer token '" + t + "'");
      }
    }
    if (tok.empty()) continue;
    if (tok.size() < 2 || tok.size() > 3) throw ParseError(source + ":" + std::to_string(line_no), "expected 'u v [w]'");
    const long long w = tok.size() == 3 ? tok[2] : 1;
    if (w < 1) throw ParseError(source + ":" + std::to_string(line_no), "weight must be positive");
    if (tok[0] < 0 || tok[1] < 0) throw ParseError(source + ":" + std::to_string(line_no), "negative node id");
    ids.emplace(tok[0], 0);
    ids.emplace(tok[1], 0);
    raw.emplace_back(tok[0], tok[1], w);
  }
  NodeId next = 0;
  for (auto& [orig, id] : ids) id = next++;
  std::map<std::pair<NodeId, NodeId>, Weight> edges;
  for (const auto& [a, b, w] : raw) {
    NodeId u = ids[a], v = ids[b];
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    edges.emplace(std::make_pair(u, v), w);
  }
  std::vector<Edge> es;
  for (const auto& [k, w] : edges) es.push_back({k.first, k.second, w});
  return WeightedGraph(next, std::move(es), true);
}

/// Writes "u v w" lines; a header comment records the node count so that
/// isolated trailing nodes survive a round trip through read_edge_list.
inline std::string format_edge_list(const WeightedGraph& g) {
  std::ostringstream out;
  out << "# nodes " << g.num_nodes() << "\n";
  for (const auto& e : g.edges()) out << e.u << " " << e.v << " " << e.w << "\n";
  return out.str();
}

/// Like parse_edge_list, but honours a "# nodes N" header: ids are then taken
/// as-is (no compaction) so isolated nodes are kept.
inline WeightedGraph read_edge_list_text(const std::string& text, const std::string& source = "edge list") {
  const std::string tag = "# nodes ";
  if (text.rfind(tag, 0) != 0) return parse_edge_list(text, source);
  const auto eol = text.find('\n');
  int n = 0;
  try {
    n = std::stoi(text.substr(tag.size(), eol - tag.size()));
  } catch (const std::exception&) {
    throw ParseError(source + ":1", "bad node count header");
  }
  std::istringstream in(text.substr(eol == std::string::npos ? text.size() : eol + 1));
  std::vector<Edge> es;
  long long u, v, w;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    if (!(ls >> u)) continue;
    if (!(ls >> v)) throw ParseError(source + ":" + std::to_string(line_no), "expected 'u v [w]'");
    if (!(ls >> w)) w = 1;
    if (u < 0 || v < 0 || u >= n || v >= n) throw ParseError(source + ":" + std::to_string(line_no), "node id out of range");
    es.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v), w});
  }
  try {
    return WeightedGraph(n, std::move(es), true);
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, e.what());
  }
}

}  // namespace multires
