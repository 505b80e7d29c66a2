#include <gtest/gtest.h>

#include <random>

#include "hetcause/ensemble.hpp"
#include "helpers.hpp"

using namespace hetcause;

namespace {

EventLog log_from(std::vector<std::vector<std::pair<int, std::string>>> units,
                  std::vector<std::string> vocab) {
  EventLog log;
  log.outcome_event = "Y";
  log.event_vocabulary = std::move(vocab);
  int id = 0;
  for (auto& evs : units) {
    UnitTimeline u;
    u.unit_id = "u" + std::to_string(id++);
    for (auto& [t, e] : evs) u.add(t, e);
    log.units.push_back(std::move(u));
  }
  return log;
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

OrientationSupportTable random_support(const MixedGraph& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  OrientationSupportTable t;
  for (auto [a, b] : g.undirected_edges()) {
    const double s = u(rng);
    t.set(g.name(a), g.name(b), s);
    t.set(g.name(b), g.name(a), 1.0 - s);
  }
  return t;
}

double total_support(const MixedGraph& before, const MixedGraph& after, const OrientationSupportTable& t) {
  double s = 0;
  for (auto [a, b] : before.undirected_edges())
    s += after.has_directed(a, b) ? t.get(before.name(a), before.name(b)) : t.get(before.name(b), before.name(a));
  return s;
}

}  // namespace

TEST(OrientationSupport, DefinitionalFraction) {
  std::vector<std::vector<std::pair<int, std::string>>> units;
  for (int i = 0; i < 7; ++i) units.push_back({{1, "j"}, {2, "k"}, {3, "Y"}});
  for (int i = 0; i < 3; ++i) units.push_back({{1, "k"}, {2, "j"}, {3, "Y"}});
  units.push_back({{1, "j"}, {3, "Y"}});  // not eligible
  const auto s = orientation_support(log_from(units, {"j", "k"}), "j", "k");
  EXPECT_DOUBLE_EQ(s.value, 0.7);
  EXPECT_EQ(s.eligible_units, 10u);
}

TEST(OrientationSupport, SimultaneousFirstOccurrenceCountsAgainst) {
  const auto log = log_from({{{2, "j"}, {2, "k"}, {3, "Y"}}, {{1, "j"}, {2, "k"}, {3, "Y"}}}, {"j", "k"});
  EXPECT_DOUBLE_EQ(orientation_support(log, "j", "k").value, 0.5);
  EXPECT_DOUBLE_EQ(orientation_support(log, "k", "j").value, 0.0);
}

TEST(OrientationSupport, MatchesScanOracle) {
  std::mt19937_64 rng(3);
  std::vector<std::vector<std::pair<int, std::string>>> units(5);
  const std::vector<std::string> vocab{"a", "b", "c"};
  for (auto& u : units) {
    u.push_back({20, "Y"});
    for (int k = 0; k < 4; ++k) u.push_back({1 + int(rng() % 10), vocab[rng() % 3]});
  }
  const auto log = log_from(units, vocab);
  for (const auto& j : vocab)
    for (const auto& k : vocab) {
      if (j == k) continue;
      int elig = 0, before = 0;
      for (const auto& u : units) {
        int tj = 1000, tk = 1000;
        for (auto& [t, e] : u) {
          if (e == j) tj = std::min(tj, t);
          if (e == k) tk = std::min(tk, t);
        }
        if (tj == 1000 || tk == 1000) continue;
        ++elig;
        before += tj < tk;
      }
      const auto s = orientation_support(log, j, k);
      EXPECT_EQ(s.eligible_units, std::size_t(elig));
      EXPECT_DOUBLE_EQ(s.value, elig ? double(before) / elig : 0.5);
    }
}

TEST(OrientationSupport, NoDataAndUnknown) {
  const auto log = log_from({{{1, "j"}, {3, "Y"}}}, {"j", "k"});
  const auto s = orientation_support(log, "j", "k");
  EXPECT_TRUE(s.no_data());
  EXPECT_DOUBLE_EQ(s.value, 0.5);
  EXPECT_THROW(orientation_support(log, "j", "zz"), data_error);
  EXPECT_NO_THROW(orientation_support(log, "j", "Y"));
}

TEST(OrientPdag, SingleFreeEdgeFollowsSupport) {
  MixedGraph g({"a", "b"});
  g.add_undirected(0, 1);
  OrientationSupportTable t;
  t.set("a", "b", 0.8);
  t.set("b", "a", 0.2);
  const auto o = orient_pdag(g, t);
  EXPECT_TRUE(o.has_directed(0, 1));
  EXPECT_EQ(o, orient_pdag_exhaustive(g, t));
}

TEST(OrientPdag, SkipsNewCollider) {
  MixedGraph g({"a", "b", "c"});
  g.add_directed("c", "b");
  g.add_undirected("a", "b");
  OrientationSupportTable t;
  t.set("a", "b", 0.9);
  t.set("b", "a", 0.1);
  const auto o = orient_pdag(g, t);
  EXPECT_TRUE(o.has_directed(o.index("b"), o.index("a")));
}

TEST(OrientPdag, ZeroUndirectedEdgesUnchanged) {
  MixedGraph g({"a", "b"});
  g.add_directed(0, 1);
  EXPECT_EQ(orient_pdag(g, {}), g);
  EXPECT_EQ(orient_pdag_exhaustive(g, {}), g);
}

TEST(OrientPdag, ConflictEdgesLeftAlone) {
  MixedGraph g({"a", "b"});
  g.add_undirected(0, 1);
  g.mark_conflict(0, 1);
  EXPECT_TRUE(orient_pdag(g, {}).has_undirected(0, 1));
}

TEST(OrientPdag, ExhaustiveCanBeatGreedy) {
  // Path a - b - c - d. Greedy commits the single best a->b, and Meek then
  // forces b->c->d; the reverse chain collects more support in total.
  MixedGraph g({"a", "b", "c", "d"});
  g.add_undirected("a", "b");
  g.add_undirected("b", "c");
  g.add_undirected("c", "d");
  OrientationSupportTable t;
  t.set("a", "b", 1.0);
  t.set("b", "a", 0.0);
  t.set("b", "c", 0.1);
  t.set("c", "b", 0.9);
  t.set("c", "d", 0.1);
  t.set("d", "c", 0.9);
  const auto greedy = orient_pdag(g, t);
  const auto best = orient_pdag_exhaustive(g, t);
  EXPECT_TRUE(greedy.has_directed(greedy.index("c"), greedy.index("d")));
  EXPECT_TRUE(best.has_directed(best.index("d"), best.index("c")));
  EXPECT_NEAR(total_support(g, greedy, t), 1.2, 1e-12);
  EXPECT_NEAR(total_support(g, best, t), 1.8, 1e-12);
}

TEST(OrientPdag, ExhaustiveBudget) {
  std::vector<std::string> names;
  for (int i = 0; i < 7; ++i) names.push_back("n" + std::to_string(i));
  MixedGraph g(names);
  for (std::size_t i = 0; i + 1 < 7; ++i) g.add_undirected(i, i + 1);
  EXPECT_THROW(orient_pdag_exhaustive(g, {}, 3), config_error);
}

// Random CPDAGs: greedy output is a consistent extension and never beats the
// exhaustive optimum; with one undirected edge both agree.
TEST(OrientPdag, ConsistentExtensionProperty) {
  std::mt19937_64 rng(4);
  int tested = 0, single = 0;
  while (tested < 300) {
    const auto cp = cpdag_from_dag(random_dag(5 + rng() % 3, 0.45, rng));
    const auto und = cp.undirected_edges().size();
    if (und == 0 || und > 5) continue;
    ++tested;
    const auto t = random_support(cp, rng);
    const auto o = orient_pdag(cp, t);
    const auto exts = enumerate_consistent_extensions(cp);
    ASSERT_TRUE(std::find(exts.begin(), exts.end(), o) != exts.end());
    const auto best = orient_pdag_exhaustive(cp, t);
    ASSERT_GE(total_support(cp, best, t) + 1e-12, total_support(cp, o, t));
    if (und == 1) {
      ++single;
      ASSERT_EQ(o, best);
    }
  }
  EXPECT_GT(single, 0);
}

TEST(CauseSupport, Definitional) {
  EnsembleResult r;
  r.variables = {"a", "b", "c"};
  MixedGraph with_a({"a", "b", "c", "Y"}), none({"a", "b", "c", "Y"});
  with_a.add_directed("a", "Y");
  r.graphs = {with_a, with_a, with_a, none, none};
  rebuild_cause_tuples(r);
  const auto s = cause_support(r);
  EXPECT_DOUBLE_EQ(s.at("a"), 0.6);
  EXPECT_DOUBLE_EQ(s.at("b"), 0.0);
  r.graphs = {none, with_a, none, with_a};
  rebuild_cause_tuples(r);
  EXPECT_DOUBLE_EQ(cause_support(r).at("a"), 0.5);
  r.graphs.clear();
  EXPECT_THROW(cause_support(r), config_error);
}

namespace {

const testutil::LogisticNet kNet{{"A", "B", "C", "D", "Y"},
                                 {0.0, -0.5, -1.0, 0.0, -1.5},
                                 {{}, {{0, 1.5}}, {{0, 1.5}}, {}, {{1, 1.5}, {2, 1.5}}}};

EnsembleOptions serial_options(std::vector<LearnerKind> learners) {
  EnsembleOptions opt;
  opt.learners = std::move(learners);
  opt.params.parallel = false;
  opt.params.bootstrap_runs = 3;
  opt.params.seed = 5;
  return opt;
}

}  // namespace

TEST(RunEnsemble, SingleLearnerMatchesAncestors) {
  const auto d = kNet.sample(5000, 1);
  const auto c = StructuralConstraints::outcome_sink(d.names());
  const auto r = run_ensemble(d, nullptr, c, serial_options({LearnerKind::hc}));
  ASSERT_EQ(r.size(), 1u);
  const auto anc = relatives(r.graphs[0], "Y", RelativeKind::ancestors);
  for (const auto& v : r.variables) EXPECT_EQ(r.contains(v, 0), anc.count(v) == 1);
}

TEST(RunEnsemble, IdenticalMembersGiveUnitSupport) {
  const auto d = kNet.sample(5000, 2);
  const auto c = StructuralConstraints::outcome_sink(d.names());
  const auto r = run_ensemble(d, nullptr, c, serial_options({LearnerKind::pc, LearnerKind::pc, LearnerKind::pc}));
  for (const auto& [v, s] : cause_support(r)) EXPECT_TRUE(s == 0.0 || s == 1.0);
}

TEST(RunEnsemble, PropertiesOnSampledData) {
  const auto d = kNet.sample(5000, 3);
  const auto c = StructuralConstraints::outcome_sink(d.names());
  auto opt = serial_options({LearnerKind::pc, LearnerKind::hc, LearnerKind::mmhc, LearnerKind::ges, LearnerKind::noisy});
  const auto r = run_ensemble(d, nullptr, c, opt);
  EXPECT_EQ(r.algorithm_names, (std::vector<std::string>{"pc", "hc", "mmhc", "ges", "noisy_baseline"}));
  for (std::size_t k = 0; k < r.size(); ++k) {
    const auto anc = relatives(r.graphs[k], "Y", RelativeKind::ancestors);
    for (const auto& v : r.variables) EXPECT_EQ(r.contains(v, k), anc.count(v) == 1);
    EXPECT_FALSE(r.contains("Y", k));
  }
  for (const auto& [v, s] : cause_support(r)) {
    const double scaled = s * double(r.size());
    EXPECT_NEAR(scaled, std::round(scaled), 1e-12);
  }
  auto par = opt;
  par.params.parallel = true;
  const auto r2 = run_ensemble(d, nullptr, c, par);
  EXPECT_EQ(r2.cause_tuples, r.cause_tuples);
  for (std::size_t k = 0; k < r.size(); ++k) EXPECT_EQ(r2.graphs[k], r.graphs[k]);
}

TEST(RunEnsemble, OrientsWithEventLog) {
  // Chain A - B - Y learned as undirected by PC; the log says A precedes B.
  testutil::LogisticNet chain{{"A", "B", "Y"}, {0.0, -1.0, -1.0}, {{}, {{0, 2.0}}, {{1, 2.0}}}};
  const auto d = chain.sample(20000, 4);
  EventLog log = log_from({{{1, "A"}, {2, "B"}, {3, "Y"}}, {{1, "A"}, {4, "B"}, {5, "Y"}}}, {"A", "B"});
  auto opt = serial_options({LearnerKind::pc});
  const auto plain = run_ensemble(d, nullptr, {}, opt);
  ASSERT_TRUE(plain.graphs[0].has_undirected(0, 1));
  const auto oriented = run_ensemble(d, &log, {}, opt);
  EXPECT_TRUE(oriented.graphs[0].has_directed(0, 1));
  EXPECT_TRUE(oriented.graphs[0].has_directed(1, 2));
  EXPECT_TRUE(oriented.contains("A", 0));
}

TEST(RunEnsemble, Errors) {
  const auto d = testutil::random_binary(3, 100, 1);
  EXPECT_THROW(run_ensemble(d, nullptr, {}, serial_options({LearnerKind::pc})), data_error);
  const auto dy = kNet.sample(100, 1);
  EXPECT_THROW(run_ensemble(dy, nullptr, {}, serial_options({})), config_error);
}
