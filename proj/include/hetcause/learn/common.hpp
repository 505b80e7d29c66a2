#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hetcause/dataset.hpp"
#include "hetcause/error.hpp"
#include "hetcause/graph.hpp"
#include "hetcause/rng.hpp"
#include "hetcause/scores.hpp"
#include "hetcause/stat_tests.hpp"

namespace hetcause {

using NamedEdge = std::pair<std::string, std::string>;

// Background knowledge on edge directions.
struct StructuralConstraints {
  std::set<NamedEdge> forbidden_edges;
  std::set<NamedEdge> required_edges;

  void validate() const {
    for (const auto& e : required_edges) {
      if (forbidden_edges.count(e))
        throw config_error("edge " + e.first + " -> " + e.second + " is both forbidden and required");
      if (e.first == e.second) throw config_error("required self-loop on " + e.first);
    }
  }

  // The outcome never has children: every outcome -> X is forbidden.
  static StructuralConstraints outcome_sink(const std::vector<std::string>& columns,
                                            std::string_view outcome = kOutcomeColumn) {
    StructuralConstraints c;
    for (const auto& n : columns)
      if (n != outcome) c.forbidden_edges.emplace(std::string(outcome), n);
    return c;
  }
};

struct LearnerParams {
  double alpha = 0.05;
  std::size_t max_cond_size = 5;
  ScoreConfig score_cfg{ScoreKind::bic, 1.0};       // hill climbing / MMHC
  ScoreConfig ges_score_cfg{ScoreKind::bdeu, 1.0};  // GES needs a score-equivalent score
  CITestKind pc_test = CITestKind::chi_square;
  CITestKind mmpc_test = CITestKind::g_square;
  std::size_t bootstrap_runs = 20;
  std::uint64_t seed = 0;
  double noisy_threshold = 0.1;
  bool parallel = true;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("alpha must lie in (0, 1)");
    if (bootstrap_runs < 1) throw config_error("bootstrap_runs must be >= 1");
    if (!(score_cfg.ess > 0.0) || !(ges_score_cfg.ess > 0.0))
      throw config_error("ess must be positive");
  }
};

// Constraints resolved against a dataset's column indices.
class ConstraintMatrix {
 public:
  ConstraintMatrix(const BinaryDataset& d, const StructuralConstraints& c)
      : n_(d.cols()), forbid_(n_ * n_, 0), require_(n_ * n_, 0) {
    c.validate();
    for (const auto& [a, b] : c.forbidden_edges) {
      auto i = d.find(a), j = d.find(b);
      if (!i || !j) throw config_error("constraint references unknown column " + a + "/" + b);
      forbid_[*i * n_ + *j] = 1;
    }
    for (const auto& [a, b] : c.required_edges) {
      auto i = d.find(a), j = d.find(b);
      if (!i || !j) throw config_error("constraint references unknown column " + a + "/" + b);
      require_[*i * n_ + *j] = 1;
    }
  }

  bool forbidden(std::size_t i, std::size_t j) const { return forbid_[i * n_ + j] != 0; }
  bool required(std::size_t i, std::size_t j) const { return require_[i * n_ + j] != 0; }
  bool required_either(std::size_t i, std::size_t j) const { return required(i, j) || required(j, i); }

  // A node none of whose outgoing edges is allowed.
  bool is_sink(std::size_t i) const {
    if (n_ < 2) return false;
    for (std::size_t j = 0; j < n_; ++j)
      if (j != i && !forbidden(i, j)) return false;
    return true;
  }

 private:
  std::size_t n_;
  std::vector<char> forbid_, require_;
};

// Applies knowledge to a PDAG: forbidden directions are reversed (or the
// edge dropped when both directions are forbidden), required edges are added
// and oriented, then the result is closed under Meek's rules. Orientations
// that would close a directed cycle are left undirected.
inline MixedGraph enforce_constraints(MixedGraph g, const ConstraintMatrix& cm) {
  const std::size_t n = g.size();
  auto try_orient = [&](std::size_t a, std::size_t b) {
    g.unorient(a, b);
    if (!directed_path_exists(g, b, a)) g.orient(a, b);
  };
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b || !cm.required(a, b)) continue;
      if (!g.adjacent(a, b)) g.add_undirected(a, b);
      try_orient(a, b);
    }
  // Two sweeps: a reversal late in the first sweep can unblock an earlier one.
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        if (!g.adjacent(a, b)) continue;
        const bool fab = cm.forbidden(a, b), fba = cm.forbidden(b, a);
        if (fab && fba) g.remove_edge(a, b);
        else if (fab && !g.has_directed(b, a)) try_orient(b, a);
        else if (fba && !g.has_directed(a, b)) try_orient(a, b);
      }
  }
  return apply_meek_rules(std::move(g));
}

inline MixedGraph empty_graph(const BinaryDataset& d) { return MixedGraph(d.names()); }

// Column indices sorted by name; the tie-break order used by the learners.
inline std::vector<std::size_t> name_order(const BinaryDataset& d) {
  std::vector<std::size_t> o(d.cols());
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = i;
  std::sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return d.name(a) < d.name(b); });
  return o;
}

// Calls f(subset) for every subset of `items` of exactly size k.
template <class F>
void for_each_subset(const std::vector<std::size_t>& items, std::size_t k, F&& f) {
  if (k > items.size()) return;
  std::vector<std::size_t> idx(k), cur(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    for (std::size_t i = 0; i < k; ++i) cur[i] = items[idx[i]];
    if (f(std::as_const(cur))) return;  // returning true stops the enumeration
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == items.size() - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}


}  // namespace hetcause
