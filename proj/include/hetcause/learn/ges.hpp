#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <vector>

#include "hetcause/learn/common.hpp"

namespace hetcause {

namespace detail {

struct GesOperator {
  double delta = 0.0;
  bool insert = true;
  std::size_t x = 0, y = 0;
  std::vector<std::size_t> set;  // T for inserts, H for deletes
};

inline bool is_clique(const MixedGraph& g, const std::vector<std::size_t>& nodes) {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j)
      if (!g.adjacent(nodes[i], nodes[j])) return false;
  return true;
}

// True if some semi-directed path from `from` to `to` avoids `blocked`.
inline bool semi_directed_path_avoiding(const MixedGraph& g, std::size_t from, std::size_t to,
                                        const std::vector<char>& blocked) {
  std::vector<char> seen(g.size(), 0);
  std::vector<std::size_t> stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    for (std::size_t w = 0; w < g.size(); ++w) {
      if (seen[w] || !(g.has_directed(v, w) || g.has_undirected(v, w))) continue;
      if (w == to) return true;
      if (blocked[w]) continue;
      seen[w] = 1;
      stack.push_back(w);
    }
  }
  return false;
}

inline std::vector<std::size_t> set_union(std::vector<std::size_t> a, const std::vector<std::size_t>& b) {
  for (auto x : b)
    if (std::find(a.begin(), a.end(), x) == a.end()) a.push_back(x);
  return a;
}

inline std::vector<std::size_t> common_neighbors(const MixedGraph& g, std::size_t y, std::size_t x) {
  std::vector<std::size_t> na;
  for (auto v : g.neighbors(y))
    if (g.adjacent(v, x)) na.push_back(v);
  return na;
}

// Grows T one node at a time while NA u T stays a clique.
template <class F>
void for_each_clique_extension(const MixedGraph& g, const std::vector<std::size_t>& base,
                               const std::vector<std::size_t>& pool, F&& f) {
  std::vector<std::size_t> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    f(cur);
    for (std::size_t i = start; i < pool.size(); ++i) {
      bool ok = true;
      for (auto b : base)
        if (!g.adjacent(b, pool[i])) ok = false;
      for (auto c : cur)
        if (!g.adjacent(c, pool[i])) ok = false;
      if (!ok) continue;
      cur.push_back(pool[i]);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
}

inline std::optional<MixedGraph> apply_ges_operator(const MixedGraph& g, const GesOperator& op,
                                                    const ConstraintMatrix& cm) {
  MixedGraph h = g;
  if (op.insert) {
    h.add_directed(op.x, op.y);
    for (auto t : op.set) h.orient(t, op.y);
  } else {
    h.remove_edge(op.x, op.y);
    for (auto v : op.set) {
      h.orient(op.y, v);
      if (h.has_undirected(op.x, v)) h.orient(op.x, v);
    }
  }
  auto dag = pdag_extension(h);
  if (!dag) return std::nullopt;
  MixedGraph cpdag = cpdag_from_dag(*dag);
  for (auto [a, b] : cpdag.directed_edges())
    if (cm.forbidden(a, b)) return std::nullopt;
  return cpdag;
}

}  // namespace detail

// Greedy Equivalence Search over CPDAGs: a forward phase of Insert operators
// followed by a backward phase of Delete operators, each step taking the
// best-scoring valid operator. Operators whose resulting class forces a
// forbidden direction are skipped.
inline MixedGraph ges(const BinaryDataset& d, const StructuralConstraints& constraints,
                      const LearnerParams& params, const ScoreCache* shared_cache = nullptr) {
  params.validate();
  if (d.cols() < 2) throw data_error("ges: need at least two columns");
  const ConstraintMatrix cm(d, constraints);
  std::optional<ScoreCache> local;
  if (!shared_cache) local.emplace(d, params.ges_score_cfg);
  const ScoreCache& sc = shared_cache ? *shared_cache : *local;
  const std::size_t n = d.cols();
  const auto order = name_order(d);
  MixedGraph g = empty_graph(d);

  // Stable: equal deltas keep the (y, x) name-order enumeration.
  auto better = [](const detail::GesOperator& a, const detail::GesOperator& b) {
    return a.delta > b.delta;
  };

  auto step = [&](bool forward) -> bool {
    std::vector<detail::GesOperator> ops;
    for (auto y : order)
      for (auto x : order) {
        if (x == y) continue;
        const auto pa = g.parents(y);
        if (forward) {
          if (g.adjacent(x, y) || cm.forbidden(x, y)) continue;
          const auto na = detail::common_neighbors(g, y, x);
          std::vector<std::size_t> pool;
          for (auto t : g.neighbors(y))
            if (t != x && !g.adjacent(t, x) && !cm.forbidden(t, y)) pool.push_back(t);
          if (!detail::is_clique(g, na)) continue;
          detail::for_each_clique_extension(g, na, pool, [&](const std::vector<std::size_t>& t) {
            std::vector<char> blocked(n, 0);
            for (auto v : na) blocked[v] = 1;
            for (auto v : t) blocked[v] = 1;
            if (detail::semi_directed_path_avoiding(g, y, x, blocked)) return;
            auto s = detail::set_union(detail::set_union(na, t), pa);
            const double before = sc.local(y, s);
            s.push_back(x);
            const double delta = sc.local(y, s) - before;
            if (delta > 1e-9) ops.push_back({delta, true, x, y, t});
          });
        } else {
          if (!(g.has_directed(x, y) || g.has_undirected(x, y)) || cm.required_either(x, y)) continue;
          const auto na = detail::common_neighbors(g, y, x);
          if (na.size() > 12) continue;
          for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << na.size()); ++mask) {
            std::vector<std::size_t> h, rest;
            for (std::size_t i = 0; i < na.size(); ++i)
              ((mask >> i) & 1U ? h : rest).push_back(na[i]);
            if (!detail::is_clique(g, rest)) continue;
            auto s = rest;
            for (auto p : pa)
              if (p != x) s.push_back(p);
            const double without = sc.local(y, s);
            s.push_back(x);
            const double delta = without - sc.local(y, s);
            if (delta > 1e-9) ops.push_back({delta, false, x, y, h});
          }
        }
      }
    std::stable_sort(ops.begin(), ops.end(), better);
    for (const auto& op : ops) {
      if (auto next = detail::apply_ges_operator(g, op, cm)) {
        g = std::move(*next);
        return true;
      }
    }
    return false;
  };

  while (step(true)) {
  }
  while (step(false)) {
  }
  return enforce_constraints(std::move(g), cm);
}

}  // namespace hetcause
