#pragma once

#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "hetcause/learn/common.hpp"

namespace hetcause {

// PC-stable: the adjacency sets used at each conditioning depth are frozen
// at the start of that depth, which makes the skeleton independent of the
// column order. Colliders are decided per nonadjacent pair by the
// conditioning set with the largest p-value; conflicting collider decisions
// leave the edge undirected and conflict-marked.
inline MixedGraph pc_stable(const BinaryDataset& d, const StructuralConstraints& constraints,
                            const LearnerParams& params, const CITestCache* shared_cache = nullptr) {
  params.validate();
  if (d.cols() < 2) throw data_error("pc_stable: need at least two columns");
  const ConstraintMatrix cm(d, constraints);
  std::optional<CITestCache> local;
  if (!shared_cache) local.emplace(d, params.pc_test, params.alpha);
  const CITestCache& ci = shared_cache ? *shared_cache : *local;

  const std::size_t n = d.cols();
  std::vector<char> adj(n * n, 1);
  for (std::size_t i = 0; i < n; ++i) adj[i * n + i] = 0;
  auto adjacent = [&](std::size_t i, std::size_t j) { return adj[i * n + j] != 0; };

  for (std::size_t depth = 0; depth <= params.max_cond_size; ++depth) {
    std::vector<std::vector<std::size_t>> frozen(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j)
        if (adjacent(i, j)) frozen[i].push_back(j);
      if (frozen[i].size() > depth) any = true;
    }
    if (!any) break;
    std::vector<std::pair<std::size_t, std::size_t>> removals;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!adjacent(i, j) || cm.required_either(i, j)) continue;
        bool separated = false;
        for (auto [a, b] : {std::pair{i, j}, std::pair{j, i}}) {
          std::vector<std::size_t> others;
          for (auto k : frozen[a])
            if (k != b) others.push_back(k);
          for_each_subset(others, depth, [&](const std::vector<std::size_t>& s) {
            separated = ci.test(i, j, s).independent;
            return separated;
          });
          if (separated) break;
        }
        if (separated) removals.emplace_back(i, j);
      }
    for (auto [i, j] : removals) adj[i * n + j] = adj[j * n + i] = 0;
  }

  MixedGraph g = empty_graph(d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (adjacent(i, j)) g.add_undirected(i, j);

  // Max-p separating set for every nonadjacent pair with a common neighbour.
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> colliders;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t c = a + 1; c < n; ++c) {
      if (adjacent(a, c)) continue;
      std::vector<std::size_t> common;
      for (std::size_t b = 0; b < n; ++b)
        if (adjacent(a, b) && adjacent(c, b)) common.push_back(b);
      if (common.empty()) continue;
      double best_p = -1.0;
      std::vector<std::size_t> best_set;
      for (auto [u, v] : {std::pair{a, c}, std::pair{c, a}}) {
        std::vector<std::size_t> others;
        for (std::size_t k = 0; k < n; ++k)
          if (k != v && adjacent(u, k)) others.push_back(k);
        for (std::size_t size = 0; size <= std::min(params.max_cond_size, others.size()); ++size)
          for_each_subset(others, size, [&](const std::vector<std::size_t>& s) {
            const double p = ci.test(a, c, s).p_value;
            if (p > best_p) {
              best_p = p;
              best_set = s;
            }
            return false;
          });
      }
      for (auto b : common)
        if (std::find(best_set.begin(), best_set.end(), b) == best_set.end())
          colliders.emplace_back(a, b, c);
    }

  for (auto [a, b, c] : colliders) {
    for (auto x : {a, c}) {
      if (g.is_conflict(x, b)) continue;
      if (g.has_directed(b, x)) g.mark_conflict(x, b);
      else g.orient(x, b);
    }
  }
  // Collider orientations can close cycles when the CI decisions are
  // mutually inconsistent; such edges are treated as conflicts.
  while (has_directed_cycle(g)) {
    bool fixed = false;
    for (auto [u, v] : g.directed_edges())
      if (directed_path_exists(g, v, u)) {
        g.mark_conflict(u, v);
        fixed = true;
        break;
      }
    if (!fixed) break;
  }
  return enforce_constraints(std::move(g), cm);
}

}  // namespace hetcause
