#include <gtest/gtest.h>

#include <random>

#include "hetcause/learn/registry.hpp"
#include "helpers.hpp"

using namespace hetcause;

namespace {

LearnerParams serial_params(std::uint64_t seed = 0) {
  LearnerParams p;
  p.seed = seed;
  p.parallel = false;
  return p;
}

const testutil::LogisticNet kChain{{"X", "M", "Y"}, {0.0, -1.0, -1.0}, {{}, {{0, 2.0}}, {{1, 2.0}}}};
const testutil::LogisticNet kCollider{{"X", "Z", "C"}, {0.0, 0.0, -1.5}, {{}, {}, {{0, 2.0}, {1, 2.0}}}};
// a -> b, a -> c, b -> d, c -> d
const testutil::LogisticNet kDiamond{{"A", "B", "C", "D"},
                                     {0.0, -1.0, -1.0, -1.5},
                                     {{}, {{0, 2.0}}, {{0, 2.0}}, {{1, 1.5}, {2, 1.5}}}};

bool same_skeleton(const MixedGraph& a, const MixedGraph& b) {
  if (a.nodes() != b.nodes()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (a.adjacent(i, j) != b.adjacent(i, j)) return false;
  return true;
}

bool respects(const MixedGraph& g, const StructuralConstraints& c) {
  for (const auto& [a, b] : c.forbidden_edges)
    if (g.has_directed(g.index(a), g.index(b))) return false;
  return true;
}

}  // namespace

TEST(PcStable, ChainSkeleton) {
  const auto d = kChain.sample(50000, 1);
  const auto g = pc_stable(d, {}, serial_params());
  EXPECT_TRUE(g.adjacent(0, 1));
  EXPECT_TRUE(g.adjacent(1, 2));
  EXPECT_FALSE(g.adjacent(0, 2));
  EXPECT_EQ(g, cpdag_from_dag(kChain.dag()));
}

// Each marginal test rejects a true independence with probability alpha, so
// structural expectations are counted over seeds.
TEST(PcStable, ColliderOriented) {
  int hits = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto g = pc_stable(kCollider.sample(50000, 100 + s), {}, serial_params());
    hits += g.has_directed(0, 2) && g.has_directed(1, 2) && !g.adjacent(0, 1);
  }
  EXPECT_GE(hits, 8);
}

TEST(PcStable, UnfaithfulColliderHidesEdge) {
  int hidden = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto d = testutil::unfaithful_collider(100000, 1000 + s);
    hidden += !pc_stable(d, {}, serial_params()).adjacent(d.index("X"), d.index("Y"));
  }
  EXPECT_GE(hidden, 8);
}

TEST(PcStable, SkeletonInvariantUnderColumnPermutation) {
  const auto d = kDiamond.sample(5000, 3);
  const auto g = pc_stable(d, {}, serial_params());
  std::vector<std::string> perm{"D", "B", "A", "C"};
  const auto dp = d.select_columns(perm);
  const auto gp = pc_stable(dp, {}, serial_params());
  for (const auto& a : perm)
    for (const auto& b : perm)
      if (a != b) {
        EXPECT_EQ(g.adjacent(g.index(a), g.index(b)), gp.adjacent(gp.index(a), gp.index(b)));
      }
}

TEST(PcStable, ConstantColumnHasNoEdges) {
  auto d = kChain.sample(2000, 4);
  std::vector<std::vector<std::uint8_t>> cols;
  for (std::size_t c = 0; c < d.cols(); ++c) cols.push_back(d.column(c));
  cols.emplace_back(d.rows(), 0);
  auto names = d.names();
  names.push_back("K");
  const BinaryDataset dk(names, cols);
  const auto g = pc_stable(dk, {}, serial_params());
  EXPECT_TRUE(g.adjacents(g.index("K")).empty());
}

TEST(HillClimb, IndependentColumnsGiveEmptyGraph) {
  const auto d = testutil::random_binary(2, 5000, 5);
  EXPECT_EQ(hill_climb(d, {}, serial_params()).edge_count(), 0u);
}

TEST(HillClimb, ChainRecoveredUpToEquivalence) {
  const auto d = kChain.sample(20000, 6);
  const auto g = hill_climb(d, {}, serial_params());
  EXPECT_TRUE(is_dag(g));
  EXPECT_TRUE(markov_equivalent(g, kChain.dag()));
}

TEST(HillClimb, ForbiddenOutcomeChildren) {
  const auto d = kChain.sample(20000, 7);
  const auto c = StructuralConstraints::outcome_sink(d.names());
  const auto g = hill_climb(d, c, serial_params());
  EXPECT_TRUE(g.children(g.index("Y")).empty());
  EXPECT_TRUE(g.adjacent(g.index("M"), g.index("Y")));
}

TEST(Mmpc, IndependentColumnsGiveEmptySets) {
  auto p = serial_params();
  p.alpha = 0.01;
  int clean = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    bool empty = true;
    for (const auto& [v, s] : mmpc_named(testutil::random_binary(4, 5000, seed), p)) empty = empty && s.empty();
    clean += empty;
  }
  EXPECT_GE(clean, 16);
}

TEST(Mmpc, StarCenterFindsChildren) {
  testutil::LogisticNet star{{"c", "k1", "k2", "k3"},
                             {0.0, -1.0, -1.0, -1.0},
                             {{}, {{0, 2.0}}, {{0, 2.0}}, {{0, 2.0}}}};
  int exact = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto pc = mmpc_named(star.sample(20000, 9 + s), serial_params());
    EXPECT_EQ(pc.at("c"), (std::set<std::string>{"k1", "k2", "k3"}));
    exact += pc.at("k1") == std::set<std::string>{"c"} && pc.at("k2") == std::set<std::string>{"c"} &&
             pc.at("k3") == std::set<std::string>{"c"};
  }
  EXPECT_GE(exact, 8);
}

TEST(Mmpc, SingleColumn) {
  const auto d = testutil::random_binary(1, 100, 1);
  const auto pc = mmpc_named(d, serial_params());
  ASSERT_EQ(pc.size(), 1u);
  EXPECT_TRUE(pc.begin()->second.empty());
}

TEST(Mmhc, StaysInsideSkeleton) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto d = kDiamond.sample(3000, 20 + s);
    const auto pc = mmpc(d, serial_params());
    const auto g = mmhc(d, {}, serial_params());
    EXPECT_TRUE(is_dag(g));
    for (std::size_t a = 0; a < d.cols(); ++a)
      for (std::size_t b = 0; b < d.cols(); ++b)
        if (g.adjacent(a, b)) {
          EXPECT_TRUE(std::find(pc[a].begin(), pc[a].end(), b) != pc[a].end());
        }
  }
}

TEST(Mmhc, EmptySkeletonGivesEmptyDag) {
  const auto d = testutil::random_binary(3, 4000, 10);
  EXPECT_EQ(mmhc(d, {}, serial_params()).edge_count(), 0u);
}

// Greedy search without restarts can settle on the reversed diamond (a
// collider at A), so only the skeleton is expected to be stable.
TEST(Mmhc, DiamondSkeleton) {
  int hits = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto d = kDiamond.sample(50000, 40 + s);
    const auto g = mmhc(d, {}, serial_params());
    hits += same_skeleton(g, kDiamond.dag());
  }
  EXPECT_GE(hits, 8);
}

TEST(Ges, IndependentColumnsGiveEmptyCpdag) {
  const auto d = testutil::random_binary(3, 5000, 11);
  EXPECT_EQ(ges(d, {}, serial_params()).edge_count(), 0u);
}

TEST(Ges, ColliderAndChain) {
  EXPECT_EQ(ges(kCollider.sample(20000, 12), {}, serial_params()), cpdag_from_dag(kCollider.dag()));
  const auto chain = ges(kChain.sample(20000, 13), {}, serial_params());
  EXPECT_EQ(chain, cpdag_from_dag(kChain.dag()));
  EXPECT_TRUE(chain.has_undirected(0, 1));
}

TEST(Ges, DiamondCpdag) {
  EXPECT_EQ(ges(kDiamond.sample(50000, 14), {}, serial_params()), cpdag_from_dag(kDiamond.dag()));
}

TEST(AggregateGraphs, UnanimityReproducesInput) {
  const auto d = kDiamond.sample(10, 1);
  const auto g = kDiamond.dag();
  EXPECT_EQ(aggregate_graphs(std::vector<MixedGraph>(20, g), d, {}), g);
}

TEST(AggregateGraphs, EvenDirectionSplitStaysUndirected) {
  const auto d = testutil::random_binary(2, 10, 1);
  MixedGraph ab(d.names()), ba(d.names());
  ab.add_directed(0, 1);
  ba.add_directed(1, 0);
  std::vector<MixedGraph> runs(10, ab);
  runs.insert(runs.end(), 10, ba);
  const auto g = aggregate_graphs(runs, d, {});
  EXPECT_TRUE(g.has_undirected(0, 1));
  runs[10] = ab;  // 11 vs 9
  EXPECT_TRUE(aggregate_graphs(runs, d, {}).has_directed(0, 1));
}

TEST(AggregateGraphs, MinorityAdjacencyDropped) {
  const auto d = testutil::random_binary(2, 10, 1);
  MixedGraph e(d.names()), ab(d.names());
  ab.add_directed(0, 1);
  std::vector<MixedGraph> runs(9, ab);
  runs.insert(runs.end(), 11, e);
  EXPECT_FALSE(aggregate_graphs(runs, d, {}).adjacent(0, 1));
  std::vector<MixedGraph> half(10, ab);
  half.insert(half.end(), 10, e);
  EXPECT_FALSE(aggregate_graphs(half, d, {}).adjacent(0, 1));
}

TEST(AggregateGraphs, BreaksCyclesAtWeakestEdge) {
  const auto d = testutil::random_binary(3, 10, 1);
  // a->b (3/3), b->c (3/3), c->a (2/3 of its runs)
  MixedGraph g1(d.names()), g2(d.names()), g3(d.names());
  for (auto* g : {&g1, &g2, &g3}) {
    g->add_directed(0, 1);
    g->add_directed(1, 2);
  }
  g1.add_directed(2, 0);
  g2.add_directed(2, 0);
  g3.add_directed(0, 2);
  const auto out = aggregate_graphs({g1, g2, g3}, d, {});
  // c -> a is unoriented, then a -> b -> c forces a -> c.
  EXPECT_FALSE(has_directed_cycle(out));
  EXPECT_TRUE(out.has_directed(0, 2));
  EXPECT_TRUE(out.has_directed(0, 1));
  EXPECT_TRUE(out.has_directed(1, 2));
}

TEST(BootstrapAggregate, DeterministicAndConstrained) {
  const auto d = kChain.sample(3000, 15);
  const auto c = StructuralConstraints::outcome_sink(d.names());
  auto p = serial_params(3);
  p.bootstrap_runs = 5;
  for (auto base : {BaseLearner::hill_climb, BaseLearner::mmhc}) {
    const auto a = bootstrap_aggregate(d, base, c, p);
    EXPECT_EQ(a, bootstrap_aggregate(d, base, c, p));
    auto par = p;
    par.parallel = true;
    EXPECT_EQ(a, bootstrap_aggregate(d, base, c, par));
    EXPECT_TRUE(respects(a, c));
    EXPECT_FALSE(has_directed_cycle(a));
  }
}

TEST(NoisyBaseline, DeterministicSinkAndThreshold) {
  const auto d = kDiamond.sample(5000, 16);
  std::vector<std::string> names = d.names();
  names.back() = "Y";
  std::vector<std::vector<std::uint8_t>> cols;
  for (std::size_t c = 0; c < d.cols(); ++c) cols.push_back(d.column(c));
  const BinaryDataset dy(names, cols);
  const auto c = StructuralConstraints::outcome_sink(dy.names());
  const auto g = noisy_baseline(dy, c, serial_params(9));
  EXPECT_EQ(g, noisy_baseline(dy, c, serial_params(9)));
  EXPECT_TRUE(g.children(g.index("Y")).empty());
  EXPECT_TRUE(is_dag(g));

  auto p = serial_params();
  p.noisy_threshold = 0.2;
  EXPECT_EQ(noisy_baseline(testutil::random_binary(5, 5000, 17), {}, p).edge_count(), 0u);
}

TEST(NoisyBaseline, MatchesPhiOracle) {
  const auto d = kDiamond.sample(2000, 18);
  const auto g = noisy_baseline(d, {}, serial_params());
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = a + 1; b < 4; ++b) {
      double n[2][2] = {{0, 0}, {0, 0}};
      for (std::size_t r = 0; r < d.rows(); ++r) n[d.at(r, a)][d.at(r, b)] += 1;
      const double phi = (n[1][1] * n[0][0] - n[1][0] * n[0][1]) /
                         std::sqrt((n[0][0] + n[0][1]) * (n[1][0] + n[1][1]) * (n[0][0] + n[1][0]) *
                                   (n[0][1] + n[1][1]));
      EXPECT_EQ(g.adjacent(a, b), std::abs(phi) > 0.1);
    }
}

// Every learner: constraints hold, Y is a sink, output deterministic, and
// the structural guarantees of each method.
TEST(Learners, SharedInvariants) {
  testutil::LogisticNet net{{"A", "B", "C", "Y"},
                            {0.0, -0.5, -1.0, -1.0},
                            {{}, {{0, 1.5}}, {{0, 1.5}, {1, -1.5}}, {{1, 2.0}, {2, 1.5}}}};
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto d = net.sample(4000, 60 + s);
    auto c = StructuralConstraints::outcome_sink(d.names());
    c.forbidden_edges.emplace("C", "A");
    auto p = serial_params(s);
    p.bootstrap_runs = 3;
    for (auto k : {LearnerKind::pc, LearnerKind::hc, LearnerKind::mmhc, LearnerKind::ges, LearnerKind::noisy}) {
      const auto g = run_learner(k, d, c, p);
      SCOPED_TRACE(to_string(k));
      EXPECT_TRUE(respects(g, c));
      EXPECT_TRUE(g.children(g.index("Y")).empty());
      EXPECT_FALSE(has_directed_cycle(g));
      EXPECT_EQ(g, run_learner(k, d, c, p));
      if (k == LearnerKind::ges) {
        EXPECT_EQ(apply_meek_rules(g), g);
      }
    }
    for (auto k : {LearnerKind::hc, LearnerKind::noisy}) {
      auto single = p;
      single.bootstrap_runs = 1;
      EXPECT_TRUE(is_dag(run_learner(k, d, c, single)));
    }
  }
}

TEST(Learners, ParseNames) {
  EXPECT_EQ(parse_learner("noisy_baseline"), LearnerKind::noisy);
  EXPECT_EQ(parse_learner_list("pc,hc,mmhc").size(), 3u);
  EXPECT_THROW(parse_learner("lingam"), config_error);
  EXPECT_THROW(StructuralConstraints({{{"A", "B"}}, {{"A", "B"}}}).validate(), config_error);
}
