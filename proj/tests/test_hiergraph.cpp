#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "multires/blocks.hpp"
#include "multires/coarsen.hpp"
#include "multires/hierarchy.hpp"
#include "multires/io.hpp"
#include "multires/louvain.hpp"
#include "test_util.hpp"

using namespace multires;
using namespace multires::testing;

// ---------------------------------------------------------------- graph

TEST(WeightedGraph, RejectsInvalidEdges) {
  EXPECT_THROW(WeightedGraph(3, {{0, 3, 1}}, true), std::invalid_argument);
  EXPECT_THROW(WeightedGraph(3, {{0, 1, 0}}, true), std::invalid_argument);
  EXPECT_THROW(WeightedGraph(3, {{1, 1, 2}}, true), std::invalid_argument);
  EXPECT_THROW(WeightedGraph(3, {{0, 1, 1}, {1, 0, 2}}, true), std::invalid_argument);
  EXPECT_NO_THROW(WeightedGraph(3, {{1, 1, 2}}, false));
}

TEST(WeightedGraph, NormalisesEdgeOrder) {
  WeightedGraph g(3, {{2, 0, 4}, {1, 0, 1}}, true);
  ASSERT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.edges()[0], (Edge{0, 1, 1}));
  EXPECT_EQ(g.edges()[1], (Edge{0, 2, 4}));
  EXPECT_EQ(g.weight(2, 0), 4);
  EXPECT_EQ(g.weighted_degree(0), 5);
}

TEST(Modularity, MatchesDenseFormula) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = random_graph(rng, 8, 0.4);
    std::vector<int> labels(8);
    for (auto& l : labels) l = static_cast<int>(rng.below(3));
    auto c = CommunityAssignment::from_labels(labels);
    EXPECT_NEAR(modularity(g, c), dense_modularity(g, c.assign), 1e-12);
  }
}

// ---------------------------------------------------------------- louvain

TEST(Louvain, TwoCliquesJoinedByBridge) {
  auto g = two_k5();
  auto c = louvain(g);
  ASSERT_EQ(c.count, 2);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(c.assign[i], c.assign[0]);
  for (int i = 5; i < 10; ++i) EXPECT_EQ(c.assign[i], c.assign[5]);
  EXPECT_NE(c.assign[0], c.assign[5]);

  const double q_cliques = dense_modularity(g, c.assign);
  const double q_single = dense_modularity(g, std::vector<int>(10, 0));
  std::vector<int> singles(10);
  std::iota(singles.begin(), singles.end(), 0);
  const double q_singletons = dense_modularity(g, singles);
  EXPECT_GT(q_cliques, q_single);
  EXPECT_GT(q_cliques, q_singletons);
}

TEST(Louvain, SingleNode) {
  WeightedGraph g(1, {}, true);
  auto c = louvain(g);
  EXPECT_EQ(c.count, 1);
  EXPECT_EQ(c.assign, std::vector<int>{0});
}

TEST(Louvain, TriangleIsOneCommunity) {
  auto g = make_graph(3, clique_pairs(0, 3));
  double best = -1e9;
  std::vector<int> best_part;
  for_each_partition(3, [&](const std::vector<int>& p) {
    const double q = dense_modularity(g, p);
    if (q > best + 1e-12) {
      best = q;
      best_part = p;
    }
  });
  EXPECT_NEAR(best, 0.0, 1e-12);
  EXPECT_EQ(best_part, (std::vector<int>{0, 0, 0}));
  auto c = louvain(g);
  EXPECT_EQ(c.count, 1);
}

TEST(Louvain, EdgelessGivesSingletons) {
  WeightedGraph g(4, {}, true);
  auto c = louvain(g);
  EXPECT_EQ(c.count, 4);
}

TEST(Louvain, NeverWorseThanSingletonsAndDeterministic) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = random_community_graph(rng, 3, 3, 6, 0.7, 0.1);
    auto c = louvain(g);
    std::vector<int> singles(g.num_nodes());
    std::iota(singles.begin(), singles.end(), 0);
    EXPECT_GE(dense_modularity(g, c.assign) + 1e-12, dense_modularity(g, singles));
    EXPECT_EQ(c, louvain(g));
    EXPECT_EQ(louvain(g, 7), louvain(g, 7));
    // Every community id is used.
    std::set<int> used(c.assign.begin(), c.assign.end());
    EXPECT_EQ(static_cast<int>(used.size()), c.count);
  }
}

TEST(Louvain, OptimalOnSmallGraphsOftenEnough) {
  // Louvain is a heuristic; it must at least beat the all-in-one partition
  // whenever the exhaustive optimum does.
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = random_graph(rng, 7, 0.35);
    double best = -1e9;
    for_each_partition(7, [&](const std::vector<int>& p) { best = std::max(best, dense_modularity(g, p)); });
    const double q = dense_modularity(g, louvain(g).assign);
    EXPECT_LE(q, best + 1e-12);
    if (best > 1e-9) EXPECT_GT(q, 0.0);
  }
}

// ---------------------------------------------------------------- coarsen

TEST(Coarsen, TwoTriangles) {
  auto g = two_triangles();
  auto c = CommunityAssignment::from_labels(std::vector<int>{0, 0, 0, 1, 1, 1});
  auto [coarse, map] = coarsen_once(g, c);
  EXPECT_EQ(coarse.num_nodes(), 2);
  EXPECT_EQ(coarse.self_weight(0), 3);
  EXPECT_EQ(coarse.self_weight(1), 3);
  EXPECT_EQ(coarse.weight(0, 1), 1);
  EXPECT_EQ(coarse.total_weight(), 7);
  EXPECT_EQ(g.total_weight(), 7);
  EXPECT_FALSE(coarse.is_leaf());
  EXPECT_EQ(map, c.assign);
}

TEST(Coarsen, SingletonPartitionIsIdentity) {
  WeightedGraph g(4, {{0, 0, 2}, {0, 1, 1}, {1, 3, 5}, {2, 2, 1}}, false);
  auto [coarse, map] = coarsen_once(g, CommunityAssignment::singletons(4));
  EXPECT_EQ(coarse, g);
}

TEST(Coarsen, K4IntoOneNode) {
  auto g = make_graph(4, clique_pairs(0, 4));
  auto [coarse, map] = coarsen_once(g, CommunityAssignment::single(4));
  EXPECT_EQ(coarse.num_nodes(), 1);
  EXPECT_EQ(coarse.self_weight(0), 6);
}

TEST(Coarsen, PureAndWeightPreserving) {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = random_graph(rng, 12, 0.3);
    std::vector<int> labels(12);
    for (auto& l : labels) l = static_cast<int>(rng.below(4));
    auto c = CommunityAssignment::from_labels(labels);
    auto a = coarsen_once(g, c);
    auto b = coarsen_once(g, c);
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.first.total_weight(), g.total_weight());
  }
}

// ---------------------------------------------------------------- hierarchy

TEST(BuildHierarchy, TwoTrianglesDepthTwo) {
  auto hg = build_hierarchy(two_triangles(), 2);
  ASSERT_EQ(hg.depth(), 2);
  EXPECT_EQ(hg.level(0).num_nodes(), 1);
  EXPECT_EQ(hg.level(0).self_weight(0), 7);
  EXPECT_EQ(hg.level(1).num_nodes(), 2);
  EXPECT_EQ(hg.level(1).self_weight(0), 3);
  EXPECT_EQ(hg.level(1).self_weight(1), 3);
  EXPECT_EQ(hg.level(1).weight(0, 1), 1);
  EXPECT_EQ(hg.leaf(), two_triangles());
  EXPECT_EQ(hg.leaf().num_edges(), 7u);
  EXPECT_NO_THROW(hg.validate());
}

TEST(BuildHierarchy, SingleNodeLeaf) {
  WeightedGraph g(1, {}, true);
  auto hg = build_hierarchy(g, 1);
  ASSERT_EQ(hg.depth(), 1);
  EXPECT_EQ(hg.level(0).num_nodes(), 1);
  EXPECT_EQ(hg.level(0).self_weight(0), 0);
  EXPECT_EQ(hg.leaf(), g);
  EXPECT_NO_THROW(hg.validate());
}

TEST(BuildHierarchy, RejectsBadDepth) {
  EXPECT_THROW(build_hierarchy(two_triangles(), 0), std::invalid_argument);
}

TEST(BuildHierarchy, PadsShallowChainsAtTheRoot) {
  auto hg = build_hierarchy(two_triangles(), 4);
  ASSERT_EQ(hg.depth(), 4);
  EXPECT_EQ(hg.level(1).num_nodes(), 1);
  EXPECT_EQ(hg.level(2).num_nodes(), 1);
  EXPECT_EQ(hg.level(3).num_nodes(), 2);
  EXPECT_TRUE(hg.conserves_weight());
  EXPECT_NO_THROW(hg.validate());
}

TEST(BuildHierarchy, SplicesDeepChainsKeepingLeafSide) {
  // Groups of cliques: Louvain finds cliques, then groups of cliques.
  std::vector<std::pair<int, int>> pairs;
  int offset = 0;
  for (int group = 0; group < 4; ++group) {
    const int base = offset;
    for (int c = 0; c < 4; ++c) {
      auto p = clique_pairs(offset, 4);
      pairs.insert(pairs.end(), p.begin(), p.end());
      if (c > 0) pairs.emplace_back(offset - 1, offset);
      offset += 4;
    }
    pairs.emplace_back(base, base + 5);
    if (group > 0) pairs.emplace_back(base - 16, base);
  }
  auto g = make_graph(offset, pairs);
  auto deep = build_hierarchy(g, 6);
  auto spliced = build_hierarchy(g, 1);
  ASSERT_EQ(spliced.depth(), 1);
  EXPECT_EQ(spliced.level(0).self_weight(0), g.total_weight());
  auto two = build_hierarchy(g, 2);
  ASSERT_EQ(two.depth(), 2);
  // The kept middle level is the one directly above the leaf in the full chain.
  EXPECT_EQ(two.level(1), deep.level(deep.depth() - 1));
  EXPECT_NO_THROW(two.validate());
}

TEST(BuildHierarchy, ConservesWeightOnRandomGraphs) {
  Rng rng(9);
  for (int trial = 0; trial < 60; ++trial) {
    auto g = random_community_graph(rng, 4, 3, 8, 0.8, 0.05);
    for (int depth : {1, 2, 3}) {
      auto hg = build_hierarchy(g, depth);
      ASSERT_EQ(hg.depth(), depth);
      for (int l = 0; l <= depth; ++l) EXPECT_EQ(hg.level(l).total_weight(), g.total_weight());
      EXPECT_NO_THROW(hg.validate());
      EXPECT_EQ(canonicalize(hg), hg);
    }
  }
}

// ---------------------------------------------------------------- ordering

TEST(BfsOrder, PathFromExplicitStart) {
  auto g = make_graph(3, {{0, 1}, {1, 2}});
  std::vector<NodeId> nodes{0, 1, 2};
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  EXPECT_EQ(bfs_weighted_order(nodes, edges, StartRule{0}), (std::vector<NodeId>{0, 1, 2}));
}

TEST(BfsOrder, StarStartsAtCentre) {
  auto g = make_graph(4, {{2, 0}, {2, 1}, {2, 3}});
  std::vector<NodeId> nodes{0, 1, 2, 3};
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  EXPECT_EQ(bfs_weighted_order(nodes, edges), (std::vector<NodeId>{2, 0, 1, 3}));
}

TEST(BfsOrder, HeavierConnectionEntersFirst) {
  WeightedGraph g(3, {{0, 1, 5}, {0, 2, 1}, {1, 2, 1}}, true);
  std::vector<NodeId> nodes{0, 1, 2};
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  EXPECT_EQ(bfs_weighted_order(nodes, edges), (std::vector<NodeId>{0, 1, 2}));
}

TEST(BfsOrder, SelfWeightCountsInQueueScore) {
  // 0 is the hub; 1 and 2 each connect to 0 with weight 1, but 2 has a heavy self-loop.
  WeightedGraph g(3, {{0, 1, 1}, {0, 2, 1}, {2, 2, 4}, {0, 0, 9}}, false);
  std::vector<NodeId> nodes{0, 1, 2};
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  EXPECT_EQ(bfs_weighted_order(nodes, edges), (std::vector<NodeId>{0, 2, 1}));
}

TEST(BfsOrder, RestartsOnDisconnectedRemainder) {
  auto g = make_graph(5, {{0, 1}, {2, 3}, {3, 4}});
  std::vector<NodeId> nodes{0, 1, 2, 3, 4};
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  EXPECT_EQ(bfs_weighted_order(nodes, edges), (std::vector<NodeId>{3, 2, 4, 0, 1}));
}

TEST(BfsOrder, EmptyBlockThrows) {
  EXPECT_THROW(bfs_weighted_order(std::vector<NodeId>{}, std::vector<Edge>{}), std::invalid_argument);
}

TEST(BfsOrder, IsAPermutation) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = random_graph(rng, 10, 0.25);
    std::vector<NodeId> nodes(10);
    std::iota(nodes.begin(), nodes.end(), 0);
    std::vector<Edge> edges(g.edges().begin(), g.edges().end());
    auto order = bfs_weighted_order(nodes, edges);
    std::sort(order.begin(), order.end());
    EXPECT_EQ(order, nodes);
  }
}

// ---------------------------------------------------------------- blocks

TEST(ExtractBlocks, TwoTrianglesLeafLevel) {
  auto hg = build_hierarchy(two_triangles(), 2);
  auto blocks = extract_blocks(hg, 2);
  ASSERT_EQ(blocks.size(), 3u);
  EXPECT_EQ(blocks[0].kind, BlockKind::partition);
  EXPECT_EQ(blocks[0].edges.size(), 3u);
  EXPECT_EQ(blocks[1].kind, BlockKind::partition);
  EXPECT_EQ(blocks[1].edges.size(), 3u);
  EXPECT_EQ(blocks[2].kind, BlockKind::bipartite);
  EXPECT_EQ(blocks[2].edges.size(), 1u);
  EXPECT_EQ(blocks[2].parent_weight, 1);
}

TEST(ExtractBlocks, NoCrossEdgesMeansNoBipartites) {
  auto g = make_graph(6, [] {
    auto p = clique_pairs(0, 3);
    auto q = clique_pairs(3, 3);
    p.insert(p.end(), q.begin(), q.end());
    return p;
  }());
  auto hg = build_hierarchy(g, 2);
  for (const auto& b : extract_blocks(hg, hg.depth())) EXPECT_EQ(b.kind, BlockKind::partition);
}

TEST(ExtractBlocks, PartitionsTheEdgeSet) {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    auto g = random_community_graph(rng, 4, 3, 7, 0.8, 0.08);
    auto hg = build_hierarchy(g, 2);
    for (int l = 1; l <= hg.depth(); ++l) {
      std::vector<Edge> all;
      for (const auto& b : extract_blocks(hg, l)) {
        all.insert(all.end(), b.edges.begin(), b.edges.end());
        if (b.kind == BlockKind::partition) {
          for (const auto& e : b.edges) EXPECT_EQ(hg.parents(l)[e.u], hg.parents(l)[e.v]);
        } else {
          for (const auto& e : b.edges) EXPECT_NE(hg.parents(l)[e.u], hg.parents(l)[e.v]);
          EXPECT_EQ(b.total_weight(), b.parent_weight);
        }
      }
      auto key = [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); };
      std::sort(all.begin(), all.end(), key);
      std::vector<Edge> level(hg.level(l).edges().begin(), hg.level(l).edges().end());
      EXPECT_EQ(all, level);
    }
  }
}

TEST(ExtractBlocks, InvariantUnderWithinCommunityOrderPreservingRelabeling) {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    auto g = random_community_graph(rng, 4, 3, 7, 0.7, 0.1);
    auto hg = build_hierarchy(g, 2);
    auto permuted = interleave_leaf(hg, rng);
    ASSERT_NO_THROW(permuted.validate());
    for (int l = 1; l <= hg.depth(); ++l) {
      auto a = extract_blocks(hg, l);
      auto b = extract_blocks(permuted, l);
      ASSERT_EQ(a.size(), b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].kind, b[i].kind);
        EXPECT_EQ(a[i].local_adjacency(), b[i].local_adjacency());
      }
    }
  }
}

// ---------------------------------------------------------------- io

TEST(Serialize, RoundTrip) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    auto hg = build_hierarchy(random_community_graph(rng, 3, 3, 6, 0.8, 0.1), 2);
    EXPECT_EQ(deserialize(serialize(hg)), hg);
  }
}

TEST(Serialize, EmptyEdgeLeafRoundTrips) {
  auto hg = build_hierarchy(WeightedGraph(3, {}, true), 1);
  EXPECT_EQ(deserialize(serialize(hg)), hg);
}

TEST(Serialize, TruncatedInputIsAParseError) {
  auto text = serialize(build_hierarchy(two_triangles(), 2));
  EXPECT_THROW(deserialize(text.substr(0, text.size() / 2)), ParseError);
  EXPECT_THROW(deserialize(""), ParseError);
}

TEST(Serialize, ParseErrorNamesTheField) {
  auto j = hierarchy_to_json(build_hierarchy(two_triangles(), 2));
  j["levels"][2]["edges"][1] = {0, 1};
  try {
    hierarchy_from_json(j);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "hg.levels[2].edges[1]");
  }
  auto k = hierarchy_to_json(build_hierarchy(two_triangles(), 2));
  k.erase("parent_node");
  try {
    hierarchy_from_json(k);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "hg.parent_node");
  }
}

TEST(EdgeList, ParsesAndCompacts) {
  auto g = parse_edge_list("# comment\n10 20\n20 30 3\n\n10 20 7\n30 30\n");
  EXPECT_EQ(g.num_nodes(), 3);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.weight(0, 1), 1);
  EXPECT_EQ(g.weight(1, 2), 3);
  EXPECT_THROW(parse_edge_list("1 x\n"), ParseError);
  EXPECT_THROW(parse_edge_list("1 2 3 4\n"), ParseError);
}

TEST(EdgeList, FormatKeepsIsolatedNodes) {
  WeightedGraph g(5, {{0, 1, 1}, {1, 2, 1}}, true);
  EXPECT_EQ(read_edge_list_text(format_edge_list(g)), g);
}
