#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hetcause/learn/common.hpp"
#include "hetcause/learn/ges.hpp"
#include "hetcause/learn/hill_climb.hpp"
#include "hetcause/learn/mmpc.hpp"
#include "hetcause/learn/pc.hpp"

namespace hetcause {

enum class BaseLearner { hill_climb, mmhc };

// Combines graphs over the dataset's columns: an adjacency is kept when it
// appears in more than half of them, and among those a direction wins with
// more than half of the votes, otherwise the edge stays undirected. Directed
// cycles in the aggregate are broken by un-orienting the least supported
// edge on a cycle. Constraints are enforced last.
inline MixedGraph aggregate_graphs(const std::vector<MixedGraph>& graphs, const BinaryDataset& d,
                                   const StructuralConstraints& constraints) {
  const std::size_t runs = graphs.size(), n = d.cols();
  if (runs == 0) throw config_error("aggregate_graphs: no graphs");
  std::vector<std::size_t> present(n * n, 0), forward(n * n, 0);
  for (const auto& g : graphs) {
    if (g.nodes() != d.names()) throw data_error("aggregate_graphs: graph nodes differ from the data columns");
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        if (!g.adjacent(a, b)) continue;
        ++present[a * n + b];
        if (g.has_directed(a, b)) ++forward[a * n + b];
        if (g.has_directed(b, a)) ++forward[b * n + a];
      }
  }

  MixedGraph out = empty_graph(d);
  std::vector<double> support(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto p = present[a * n + b];
      if (2 * p <= runs) continue;
      if (2 * forward[a * n + b] > p) {
        out.add_directed(a, b);
        support[a * n + b] = double(forward[a * n + b]) / double(p);
      } else if (2 * forward[b * n + a] > p) {
        out.add_directed(b, a);
        support[b * n + a] = double(forward[b * n + a]) / double(p);
      } else {
        out.add_undirected(a, b);
      }
    }

  while (has_directed_cycle(out)) {
    std::optional<Edge> weakest;
    for (auto [u, v] : out.directed_edges())
      if (directed_path_exists(out, v, u) &&
          (!weakest || support[u * n + v] < support[weakest->first * n + weakest->second]))
        weakest = Edge{u, v};
    out.unorient(weakest->first, weakest->second);
  }
  return enforce_constraints(std::move(out), ConstraintMatrix(d, constraints));
}

// Runs `base` on bootstrap resamples (size N, with replacement) and
// aggregates the results with aggregate_graphs.
inline MixedGraph bootstrap_aggregate(const BinaryDataset& d, BaseLearner base,
                                      const StructuralConstraints& constraints,
                                      const LearnerParams& params) {
  params.validate();
  const std::size_t runs = params.bootstrap_runs, rows = d.rows();
  if (rows == 0) throw data_error("bootstrap_aggregate: empty data");

  auto one_run = [&](std::size_t r) {
    std::mt19937_64 rng(splitmix64(params.seed * 0x2545F4914F6CDD1DULL + r));
    std::uniform_int_distribution<std::size_t> pick(0, rows - 1);
    std::vector<std::size_t> idx(rows);
    for (auto& i : idx) i = pick(rng);
    const auto sample = d.select_rows(idx);
    return base == BaseLearner::hill_climb ? hill_climb(sample, constraints, params)
                                           : mmhc(sample, constraints, params);
  };

  std::vector<MixedGraph> graphs(runs);
  if (params.parallel && runs > 1) {
    std::vector<std::future<MixedGraph>> fut;
    for (std::size_t r = 0; r < runs; ++r) fut.push_back(std::async(std::launch::async, one_run, r));
    for (std::size_t r = 0; r < runs; ++r) graphs[r] = fut[r].get();
  } else {
    for (std::size_t r = 0; r < runs; ++r) graphs[r] = one_run(r);
  }
  return aggregate_graphs(graphs, d, constraints);
}

// Noise learner: pairs whose absolute phi correlation exceeds the threshold
// become adjacent and are oriented along a seeded random order in which
// sink nodes (all outgoing edges forbidden) come last.
inline MixedGraph noisy_baseline(const BinaryDataset& d, const StructuralConstraints& constraints,
                                 const LearnerParams& params) {
  const ConstraintMatrix cm(d, constraints);
  const std::size_t n = d.cols();
  const double rows = static_cast<double>(d.rows());
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(splitmix64(params.seed ^ 0x6E6F697379ULL));
  std::shuffle(order.begin(), order.end(), rng);
  std::stable_partition(order.begin(), order.end(), [&](std::size_t v) { return !cm.is_sink(v); });
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[order[i]] = i;

  MixedGraph g = empty_graph(d);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const std::size_t ab[2] = {a, b};
      const auto c = d.joint_counts(ab);
      const double n00 = c[0], n10 = c[1], n01 = c[2], n11 = c[3];
      const double den = std::sqrt((n00 + n01) * (n10 + n11) * (n00 + n10) * (n01 + n11));
      if (den <= 0.0 || rows == 0) continue;
      const double phi = (n11 * n00 - n10 * n01) / den;
      if (std::abs(phi) <= params.noisy_threshold) continue;
      auto [u, v] = rank[a] < rank[b] ? Edge{a, b} : Edge{b, a};
      if (cm.forbidden(u, v)) std::swap(u, v);
      if (cm.forbidden(u, v)) continue;
      g.add_directed(u, v);
    }
  if (has_directed_cycle(g)) {
    // Only possible through a constraint-driven swap; fall back to the order.
    for (auto [u, v] : g.directed_edges())
      if (rank[u] > rank[v] && !cm.forbidden(v, u)) g.orient(v, u);
  }
  return g;
}

enum class LearnerKind { pc, hc, mmhc, ges, noisy };

inline std::string to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::pc: return "pc";
    case LearnerKind::hc: return "hc";
    case LearnerKind::mmhc: return "mmhc";
    case LearnerKind::ges: return "ges";
    case LearnerKind::noisy: return "noisy_baseline";
  }
  return "?";
}

inline LearnerKind parse_learner(std::string_view s) {
  if (s == "pc") return LearnerKind::pc;
  if (s == "hc") return LearnerKind::hc;
  if (s == "mmhc") return LearnerKind::mmhc;
  if (s == "ges") return LearnerKind::ges;
  if (s == "noisy" || s == "noisy_baseline") return LearnerKind::noisy;
  throw config_error("unknown learner '" + std::string(s) + "'");
}

inline std::vector<LearnerKind> parse_learner_list(std::string_view csv) {
  std::vector<LearnerKind> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    auto end = csv.find(',', start);
    if (end == std::string_view::npos) end = csv.size();
    auto tok = csv.substr(start, end - start);
    if (!tok.empty()) out.push_back(parse_learner(tok));
    start = end + 1;
  }
  if (out.empty()) throw config_error("empty learner list");
  return out;
}

// One ensemble member. Hill climbing and MMHC are bootstrapped whenever
// bootstrap_runs > 1.
inline MixedGraph run_learner(LearnerKind kind, const BinaryDataset& d,
                              const StructuralConstraints& constraints, const LearnerParams& params) {
  switch (kind) {
    case LearnerKind::pc: return pc_stable(d, constraints, params);
    case LearnerKind::ges: return ges(d, constraints, params);
    case LearnerKind::noisy: return noisy_baseline(d, constraints, params);
    case LearnerKind::hc:
      return params.bootstrap_runs > 1
                 ? bootstrap_aggregate(d, BaseLearner::hill_climb, constraints, params)
                 : hill_climb(d, constraints, params);
    case LearnerKind::mmhc:
      return params.bootstrap_runs > 1 ? bootstrap_aggregate(d, BaseLearner::mmhc, constraints, params)
                                       : mmhc(d, constraints, params);
  }
  throw error("run_learner: unhandled learner");
}

}  // namespace hetcause
