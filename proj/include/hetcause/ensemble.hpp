#pragma once

#include <algorithm>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "hetcause/dataset.hpp"
#include "hetcause/event_model.hpp"
#include "hetcause/graph.hpp"
#include "hetcause/learn/registry.hpp"

namespace hetcause {

struct OrientationSupport {
  double value = 0.5;
  std::size_t eligible_units = 0;
  bool no_data() const { return eligible_units == 0; }
};

// Fraction of units, among those that record both events, whose first `j`
// strictly precedes their first `k`. No eligible unit gives 0.5.
inline OrientationSupport orientation_support(const EventLog& log, const std::string& j,
                                              const std::string& k) {
  const auto& vocab = log.event_vocabulary;
  for (const auto* e : {&j, &k})
    if (*e != log.outcome_event && std::find(vocab.begin(), vocab.end(), *e) == vocab.end())
      throw data_error("orientation_support: unknown event '" + *e + "'");
  OrientationSupport s;
  std::size_t before = 0;
  for (const auto& u : log.units) {
    auto tj = u.first_time(j), tk = u.first_time(k);
    if (!tj || !tk) continue;
    ++s.eligible_units;
    if (*tj < *tk) ++before;
  }
  if (s.eligible_units) s.value = double(before) / double(s.eligible_units);
  return s;
}

struct OrientationSupportTable {
  std::map<NamedEdge, OrientationSupport> entries;

  double get(const std::string& parent, const std::string& child) const {
    auto it = entries.find({parent, child});
    return it == entries.end() ? 0.5 : it->second.value;
  }
  void set(const std::string& parent, const std::string& child, double v,
           std::size_t eligible = 1) {
    entries[{parent, child}] = OrientationSupport{v, eligible};
  }
};

// Support for both directions of every undirected edge of g whose endpoints
// are both events of the log. Other pairs fall back to 0.5 on lookup.
inline OrientationSupportTable orientation_support_table(const EventLog& log, const MixedGraph& g) {
  std::set<std::string> events(log.event_vocabulary.begin(), log.event_vocabulary.end());
  events.insert(log.outcome_event);
  OrientationSupportTable t;
  for (auto [a, b] : g.undirected_edges()) {
    const auto &na = g.name(a), &nb = g.name(b);
    if (!events.count(na) || !events.count(nb)) continue;
    t.entries[{na, nb}] = orientation_support(log, na, nb);
    t.entries[{nb, na}] = orientation_support(log, nb, na);
  }
  return t;
}

namespace detail {

inline bool creates_new_collider(const MixedGraph& g, std::size_t a, std::size_t b) {
  for (auto c : g.parents(b))
    if (c != a && !g.adjacent(c, a)) return true;
  return false;
}

}  // namespace detail

// Greedy orientation of the remaining undirected edges: candidate
// orientations are taken by decreasing support; one that would add an
// unshielded collider or a directed cycle is skipped, otherwise it is
// committed and followed by Meek closure. Edges blocked in both directions
// stay undirected.
inline MixedGraph orient_pdag(MixedGraph g, const OrientationSupportTable& s_o) {
  struct Candidate {
    double s;
    std::string parent, child;
    std::size_t a, b;
  };
  std::vector<Candidate> cands;
  for (auto [a, b] : g.undirected_edges()) {
    if (g.is_conflict(a, b)) continue;
    for (auto [p, c] : {Edge{a, b}, Edge{b, a}})
      cands.push_back({s_o.get(g.name(p), g.name(c)), g.name(p), g.name(c), p, c});
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
    if (x.s != y.s) return x.s > y.s;
    return std::tie(x.parent, x.child) < std::tie(y.parent, y.child);
  });
  for (const auto& c : cands) {
    if (!g.has_undirected(c.a, c.b)) continue;
    if (detail::creates_new_collider(g, c.a, c.b)) continue;
    if (directed_path_exists(g, c.b, c.a)) continue;
    g.orient(c.a, c.b);
    g = apply_meek_rules(std::move(g));
  }
  return g;
}

// The consistent extension with the largest summed support over newly
// oriented edges; ties go to the lexicographically smallest list of new
// (parent, child) name pairs.
inline MixedGraph orient_pdag_exhaustive(const MixedGraph& g, const OrientationSupportTable& s_o,
                                         std::size_t budget = 12) {
  const auto und = g.undirected_edges();
  if (und.empty()) return g;
  auto exts = enumerate_consistent_extensions(g, budget);
  if (exts.empty()) throw data_error("orient_pdag_exhaustive: PDAG has no consistent extension");
  std::optional<std::pair<double, std::vector<NamedEdge>>> best;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < exts.size(); ++i) {
    double total = 0.0;
    std::vector<NamedEdge> oriented;
    for (auto [a, b] : und) {
      auto [p, c] = exts[i].has_directed(a, b) ? Edge{a, b} : Edge{b, a};
      total += s_o.get(g.name(p), g.name(c));
      oriented.emplace_back(g.name(p), g.name(c));
    }
    std::sort(oriented.begin(), oriented.end());
    if (!best || total > best->first + 1e-12 ||
        (std::abs(total - best->first) <= 1e-12 && oriented < best->second)) {
      best.emplace(total, std::move(oriented));
      best_i = i;
    }
  }
  return exts[best_i];
}

struct EnsembleResult {
  std::vector<MixedGraph> graphs;
  std::vector<std::string> algorithm_names;
  std::set<std::pair<std::string, std::size_t>> cause_tuples;  // (variable, graph index)
  std::vector<std::string> variables;                          // every non-outcome column
  std::string outcome = std::string(kOutcomeColumn);

  std::size_t size() const { return graphs.size(); }
  bool contains(const std::string& v, std::size_t k) const { return cause_tuples.count({v, k}) != 0; }
};

// Rebuilds R from the graphs: (X, k) is present iff X reaches the outcome by
// a directed path in graph k.
inline void rebuild_cause_tuples(EnsembleResult& r) {
  r.cause_tuples.clear();
  for (std::size_t k = 0; k < r.graphs.size(); ++k)
    for (const auto& v : relatives(r.graphs[k], r.outcome, RelativeKind::ancestors))
      r.cause_tuples.emplace(v, k);
}

struct EnsembleOptions {
  std::vector<LearnerKind> learners{LearnerKind::pc, LearnerKind::hc, LearnerKind::mmhc,
                                    LearnerKind::ges, LearnerKind::noisy};
  LearnerParams params;
};

inline EnsembleResult run_ensemble(const BinaryDataset& d, const EventLog* log,
                                   const StructuralConstraints& constraints,
                                   const EnsembleOptions& opt) {
  if (opt.learners.empty()) throw config_error("run_ensemble: at least one learner is required");
  d.require_outcome();
  opt.params.validate();
  EnsembleResult r;
  for (const auto& n : d.names())
    if (n != kOutcomeColumn) r.variables.push_back(n);

  auto one = [&](std::size_t k) {
    LearnerParams p = opt.params;
    p.seed = splitmix64(opt.params.seed + 0x9E37 * (k + 1));
    MixedGraph g = run_learner(opt.learners[k], d, constraints, p);
    if (log) g = orient_pdag(std::move(g), orientation_support_table(*log, g));
    return g;
  };

  r.graphs.resize(opt.learners.size());
  if (opt.params.parallel && opt.learners.size() > 1) {
    std::vector<std::future<MixedGraph>> fut;
    for (std::size_t k = 0; k < opt.learners.size(); ++k)
      fut.push_back(std::async(std::launch::async, one, k));
    for (std::size_t k = 0; k < fut.size(); ++k) r.graphs[k] = fut[k].get();
  } else {
    for (std::size_t k = 0; k < opt.learners.size(); ++k) r.graphs[k] = one(k);
  }
  for (auto l : opt.learners) r.algorithm_names.push_back(to_string(l));
  rebuild_cause_tuples(r);
  return r;
}

// S_c: fraction of graphs in which each variable is an ancestor of Y.
inline std::map<std::string, double> cause_support(const EnsembleResult& r) {
  if (r.graphs.empty()) throw config_error("cause_support: empty ensemble");
  std::map<std::string, double> s;
  for (const auto& v : r.variables) s[v] = 0.0;
  for (const auto& [v, k] : r.cause_tuples) s[v] += 1.0;
  for (auto& [v, x] : s) x /= double(r.graphs.size());
  return s;
}

}  // namespace hetcause
