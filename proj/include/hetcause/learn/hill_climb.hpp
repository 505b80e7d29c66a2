#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "hetcause/learn/common.hpp"

namespace hetcause {

namespace detail {

// Reachability over a DAG held as parent lists; reach[i] is a bitset of the
// nodes reachable from i along directed edges.
class Reachability {
 public:
  explicit Reachability(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

  void rebuild(const std::vector<std::vector<std::size_t>>& children) {
    std::fill(bits_.begin(), bits_.end(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < n_; ++s) {
      stack.assign(children[s].begin(), children[s].end());
      while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        if (get(s, v)) continue;
        set(s, v);
        for (auto c : children[v])
          if (!get(s, c)) stack.push_back(c);
      }
    }
  }

  bool get(std::size_t from, std::size_t to) const {
    return (bits_[from * words_ + to / 64] >> (to % 64)) & 1U;
  }

 private:
  void set(std::size_t from, std::size_t to) { bits_[from * words_ + to / 64] |= std::uint64_t{1} << (to % 64); }
  std::size_t n_, words_;
  std::vector<std::uint64_t> bits_;
};

}  // namespace detail

// Greedy hill climbing over single-edge additions, deletions and reversals,
// starting from the empty graph (plus required edges). `allowed`, when given,
// is an n*n mask of pairs that may become adjacent (the MMHC skeleton).
inline MixedGraph hill_climb(const BinaryDataset& d, const StructuralConstraints& constraints,
                             const LearnerParams& params,
                             const std::vector<char>* allowed = nullptr,
                             const ScoreCache* shared_cache = nullptr) {
  params.validate();
  if (d.cols() < 2) throw data_error("hill_climb: need at least two columns");
  const ConstraintMatrix cm(d, constraints);
  std::optional<ScoreCache> local;
  if (!shared_cache) local.emplace(d, params.score_cfg);
  const ScoreCache& sc = shared_cache ? *shared_cache : *local;

  const std::size_t n = d.cols();
  std::vector<std::vector<std::size_t>> pa(n), ch(n);
  std::vector<char> edge(n * n, 0);
  auto add = [&](std::size_t u, std::size_t v) {
    pa[v].push_back(u);
    ch[u].push_back(v);
    edge[u * n + v] = 1;
  };
  auto drop = [&](std::size_t u, std::size_t v) {
    std::erase(pa[v], u);
    std::erase(ch[u], v);
    edge[u * n + v] = 0;
  };
  auto ok_pair = [&](std::size_t u, std::size_t v) {
    return !allowed || (*allowed)[u * n + v] || cm.required_either(u, v);
  };

  detail::Reachability reach(n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (u != v && cm.required(u, v) && !edge[v * n + u]) {
        reach.rebuild(ch);
        if (!reach.get(v, u)) add(u, v);
      }

  auto with = [](std::vector<std::size_t> s, std::size_t x) {
    s.push_back(x);
    return s;
  };
  auto without = [](std::vector<std::size_t> s, std::size_t x) {
    std::erase(s, x);
    return s;
  };

  const auto order = name_order(d);
  enum class Move { add, remove, reverse };
  while (true) {
    reach.rebuild(ch);
    std::vector<double> base(n);
    for (std::size_t v = 0; v < n; ++v) base[v] = sc.local(v, pa[v]);

    double best = 0.0;
    std::optional<std::tuple<Move, std::size_t, std::size_t>> pick;
    auto consider = [&](double delta, Move m, std::size_t u, std::size_t v) {
      if (delta > best + 1e-9 * std::max(1.0, std::abs(best))) {
        best = delta;
        pick = {m, u, v};
      }
    };
    for (auto v : order) {
      for (auto u : order) {
        if (u == v) continue;
        if (edge[u * n + v]) {
          if (cm.required(u, v)) continue;
          const double del = sc.local(v, without(pa[v], u)) - base[v];
          consider(del, Move::remove, u, v);
          if (cm.forbidden(v, u)) continue;
          bool other_path = false;
          for (auto w : ch[u])
            if (w != v && reach.get(w, v)) {
              other_path = true;
              break;
            }
          if (other_path) continue;
          consider(del + sc.local(u, with(pa[u], v)) - base[u], Move::reverse, u, v);
        } else if (!edge[v * n + u] && !cm.forbidden(u, v) && ok_pair(u, v) && !reach.get(v, u)) {
          consider(sc.local(v, with(pa[v], u)) - base[v], Move::add, u, v);
        }
      }
    }
    if (!pick) break;
    auto [m, u, v] = *pick;
    if (m == Move::add) add(u, v);
    else if (m == Move::remove) drop(u, v);
    else {
      drop(u, v);
      add(v, u);
    }
  }

  MixedGraph g = empty_graph(d);
  for (std::size_t u = 0; u < n; ++u)
    for (auto v : ch[u]) g.add_directed(u, v);
  return g;
}

}  // namespace hetcause
