#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "hetcause/graph.hpp"
#include "helpers.hpp"

using namespace hetcause;

namespace {

MixedGraph graph(std::vector<std::string> nodes, std::vector<std::pair<std::string, std::string>> directed,
                 std::vector<std::pair<std::string, std::string>> undirected = {}) {
  MixedGraph g(std::move(nodes));
  for (auto& [a, b] : directed) g.add_directed(a, b);
  for (auto& [a, b] : undirected) g.add_undirected(a, b);
  return g;
}

MixedGraph random_dag(std::size_t n, double p, std::mt19937_64& rng) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("n" + std::to_string(i));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  MixedGraph g(names);
  std::bernoulli_distribution coin(p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng)) g.add_directed(perm[i], perm[j]);
  return g;
}

// Undirected skeleton plus the DAG's own v-structures.
MixedGraph v_structure_pdag(const MixedGraph& dag) {
  MixedGraph g(dag.nodes());
  std::set<Edge> keep;
  for (auto [a, b, c] : v_structures(dag)) {
    keep.emplace(a, b);
    keep.emplace(c, b);
  }
  for (auto [a, b] : dag.directed_edges()) {
    if (keep.count({a, b})) g.add_directed(a, b);
    else g.add_undirected(a, b);
  }
  return g;
}

// Directed edges that every extension shares.
std::set<Edge> common_orientations(const std::vector<MixedGraph>& exts) {
  std::set<Edge> common;
  bool first = true;
  for (const auto& e : exts) {
    auto d = e.directed_edges();
    std::set<Edge> s(d.begin(), d.end());
    if (first) common = s;
    else {
      std::set<Edge> keep;
      for (const auto& x : common)
        if (s.count(x)) keep.insert(x);
      common = keep;
    }
    first = false;
  }
  return common;
}

}  // namespace

TEST(Relatives, ChainAncestors) {
  auto g = graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
  EXPECT_EQ(relatives(g, "c", RelativeKind::ancestors), (std::set<std::string>{"a", "b"}));
  EXPECT_EQ(relatives(g, "a", RelativeKind::descendants), (std::set<std::string>{"b", "c"}));
  EXPECT_EQ(relatives(g, "c", RelativeKind::parents), (std::set<std::string>{"b"}));
}

TEST(Relatives, UndirectedEdgesIgnored) {
  auto g = graph({"a", "b", "c"}, {{"b", "c"}}, {{"a", "b"}});
  EXPECT_EQ(relatives(g, "c", RelativeKind::ancestors), (std::set<std::string>{"b"}));
}

TEST(Relatives, UnknownNodeThrows) {
  auto g = graph({"a"}, {});
  EXPECT_ANY_THROW(relatives(g, "zz", RelativeKind::parents));
}

TEST(Relatives, MatchesClosureOracleAndAreConverse) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = random_dag(6, 0.4, rng);
    auto reach = testutil::transitive_closure(g);
    for (std::size_t v = 0; v < g.size(); ++v) {
      std::set<std::string> anc, des;
      for (std::size_t u = 0; u < g.size(); ++u) {
        if (reach[u][v]) anc.insert(g.name(u));
        if (reach[v][u]) des.insert(g.name(u));
      }
      ASSERT_EQ(relatives(g, g.name(v), RelativeKind::ancestors), anc);
      ASSERT_EQ(relatives(g, g.name(v), RelativeKind::descendants), des);
    }
  }
}

TEST(ValidateEdgeAddition, ColliderAndCycleFlags) {
  auto g = graph({"a", "b", "c"}, {{"c", "b"}}, {{"a", "b"}});
  auto r = validate_edge_addition(g, "a", "b");
  EXPECT_TRUE(r.creates_new_unshielded_collider);
  EXPECT_FALSE(r.creates_cycle);
  auto h = graph({"a", "b"}, {{"b", "a"}});
  EXPECT_TRUE(validate_edge_addition(h, "a", "b").creates_cycle);
}

TEST(ValidateEdgeAddition, MatchesBruteForce) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    auto g = random_dag(5, 0.4, rng);
    auto reach = testutil::transitive_closure(g);
    for (std::size_t a = 0; a < 5; ++a)
      for (std::size_t b = 0; b < 5; ++b) {
        if (a == b || g.adjacent(a, b)) continue;
        bool collider = false;
        for (std::size_t p = 0; p < 5; ++p)
          if (p != a && g.has_directed(p, b) && !g.adjacent(p, a)) collider = true;
        auto r = validate_edge_addition(g, a, b);
        ASSERT_EQ(r.creates_cycle, bool(reach[b][a]));
        ASSERT_EQ(r.creates_new_unshielded_collider, collider);
      }
  }
}

TEST(MeekRules, RuleOne) {
  auto g = graph({"a", "b", "c"}, {{"a", "b"}}, {{"b", "c"}});
  auto m = apply_meek_rules(g);
  EXPECT_TRUE(m.has_directed(m.index("b"), m.index("c")));
}

TEST(MeekRules, DagUnchanged) {
  auto g = graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
  EXPECT_EQ(apply_meek_rules(g), g);
}

TEST(MeekRules, RejectsCycle) {
  auto g = graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"c", "a"}});
  EXPECT_THROW(apply_meek_rules(g), data_error);
}

// The closure keeps the skeleton and agrees with the orientations shared by
// every consistent extension.
TEST(MeekRules, EqualsExtensionIntersectionOnRandomDags) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto dag = random_dag(5 + trial % 2, 0.5, rng);
    auto pdag = v_structure_pdag(dag);
    auto closed = apply_meek_rules(pdag);
    auto exts = enumerate_consistent_extensions(pdag);
    ASSERT_FALSE(exts.empty());
    auto common = common_orientations(exts);
    auto d = closed.directed_edges();
    ASSERT_EQ(std::set<Edge>(d.begin(), d.end()), common);
    ASSERT_EQ(apply_meek_rules(closed), closed);
    ASSERT_EQ(closed.edge_count(), pdag.edge_count());
    for (auto e : pdag.directed_edges()) ASSERT_TRUE(closed.has_directed(e.first, e.second));
    ASSERT_EQ(closed, cpdag_from_dag(dag));
  }
}

TEST(AncestralSubgraph, DropsDisconnectedNodes) {
  auto g = graph({"a", "b", "c", "y"}, {{"a", "y"}, {"b", "c"}});
  auto s = ancestral_subgraph(g, "y");
  EXPECT_EQ(s.nodes(), (std::vector<std::string>{"a", "y"}));
  EXPECT_TRUE(s.has_directed(0, 1));
}

TEST(AncestralSubgraph, KeepsDiamond) {
  auto g = graph({"a", "b", "c", "y"}, {{"a", "b"}, {"a", "c"}, {"b", "y"}, {"c", "y"}});
  EXPECT_EQ(ancestral_subgraph(g, "y"), g);
  EXPECT_ANY_THROW(ancestral_subgraph(g, "q"));
}

TEST(AncestralSubgraph, MatchesReachabilityFilter) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = random_dag(8, 0.3, rng);
    const std::size_t y = trial % 8;
    auto reach = testutil::transitive_closure(g);
    auto s = ancestral_subgraph(g, g.name(y));
    std::vector<std::size_t> kept;
    for (std::size_t v = 0; v < 8; ++v)
      if (v == y || reach[v][y]) kept.push_back(v);
    ASSERT_EQ(s.size(), kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t j = 0; j < kept.size(); ++j)
        ASSERT_EQ(s.has_directed(i, j), g.has_directed(kept[i], kept[j]));
  }
}

TEST(ConsistentExtensions, SmallCases) {
  EXPECT_EQ(enumerate_consistent_extensions(graph({"a", "b"}, {}, {{"a", "b"}})).size(), 2u);
  auto g = graph({"a", "b", "c"}, {{"c", "b"}}, {{"a", "b"}});
  auto exts = enumerate_consistent_extensions(g);
  ASSERT_EQ(exts.size(), 1u);
  EXPECT_TRUE(exts[0].has_directed(exts[0].index("b"), exts[0].index("a")));
  auto dag = graph({"a", "b"}, {{"a", "b"}});
  auto one = enumerate_consistent_extensions(dag);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], dag);
}

TEST(ConsistentExtensions, BudgetEnforced) {
  std::vector<std::string> names;
  for (int i = 0; i < 6; ++i) names.push_back("n" + std::to_string(i));
  MixedGraph g(names);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i + 1; j < 6; ++j) g.add_undirected(i, j);
  EXPECT_THROW(enumerate_consistent_extensions(g, 12), config_error);
}

TEST(PdagExtension, IsAConsistentExtension) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto cp = cpdag_from_dag(random_dag(6, 0.5, rng));
    auto ext = pdag_extension(cp);
    ASSERT_TRUE(ext.has_value());
    ASSERT_TRUE(is_dag(*ext));
    ASSERT_EQ(cpdag_from_dag(*ext), cp);
  }
}

TEST(EdgeList, RoundTripWithIsolatesAndConflicts) {
  auto g = graph({"a", "b", "c", "iso"}, {{"a", "b"}}, {{"b", "c"}});
  g.mark_conflict(g.index("b"), g.index("c"));
  std::stringstream ss(to_edge_list(g));
  auto h = read_edge_list(ss);
  EXPECT_EQ(h, g);
  EXPECT_TRUE(h.is_conflict(h.index("c"), h.index("b")));
  std::istringstream bad("a => b\n");
  EXPECT_THROW(read_edge_list(bad), data_error);
}

TEST(Graph, RejectsSelfLoopsAndDuplicates) {
  MixedGraph g({"a", "b"});
  EXPECT_ANY_THROW(g.add_directed(0, 0));
  g.add_directed(0, 1);
  EXPECT_ANY_THROW(g.add_undirected(0, 1));
}
