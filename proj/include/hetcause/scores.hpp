#pragma once

#include <algorithm>
#include <cmath>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hetcause/dataset.hpp"
#include "hetcause/error.hpp"
#include "hetcause/graph.hpp"

namespace hetcause {

enum class ScoreKind { bic, bdeu };

struct ScoreConfig {
  ScoreKind kind = ScoreKind::bdeu;
  double ess = 1.0;  // BDeu equivalent sample size
};

// Decomposable local score of `child` given `parents`; larger is better.
// BIC is the maximised log-likelihood minus (q (r - 1) / 2) ln N, with q
// counting all parent assignments. BDeu uses a uniform Dirichlet prior with
// per-cell pseudocount ess / (r q).
inline double local_score(const BinaryDataset& d, std::size_t child,
                          std::span<const std::size_t> parents, const ScoreConfig& cfg) {
  if (d.rows() == 0) throw data_error("local_score: empty data");
  std::vector<std::size_t> vars(parents.begin(), parents.end());
  std::sort(vars.begin(), vars.end());
  if (std::adjacent_find(vars.begin(), vars.end()) != vars.end())
    throw config_error("local_score: duplicate parent");
  for (auto p : vars)
    if (p == child) throw config_error("local_score: child listed among its parents");
  if (child >= d.cols()) throw data_error("local_score: column out of range");
  const std::size_t k = vars.size();
  vars.push_back(child);
  const auto counts = d.joint_counts(vars);
  const std::size_t q = std::size_t{1} << k;
  const double r = 2.0;
  double score = 0.0;
  if (cfg.kind == ScoreKind::bic) {
    for (std::size_t j = 0; j < q; ++j) {
      const double n0 = counts[j], n1 = counts[j | q], nj = n0 + n1;
      if (n0 > 0) score += n0 * std::log(n0 / nj);
      if (n1 > 0) score += n1 * std::log(n1 / nj);
    }
    score -= 0.5 * static_cast<double>(q) * (r - 1.0) * std::log(static_cast<double>(d.rows()));
  } else {
    if (!(cfg.ess > 0)) throw config_error("BDeu equivalent sample size must be positive");
    const double a_j = cfg.ess / static_cast<double>(q);
    const double a_jk = a_j / r;
    const double lg_aj = std::lgamma(a_j), lg_ajk = std::lgamma(a_jk);
    for (std::size_t j = 0; j < q; ++j) {
      const double n0 = counts[j], n1 = counts[j | q];
      if (n0 + n1 == 0) continue;
      score += lg_aj - std::lgamma(a_j + n0 + n1);
      score += std::lgamma(a_jk + n0) - lg_ajk;
      score += std::lgamma(a_jk + n1) - lg_ajk;
    }
  }
  return score;
}

inline double local_score(const BinaryDataset& d, std::string_view child,
                          const std::vector<std::string>& parents, const ScoreConfig& cfg) {
  std::vector<std::size_t> p;
  for (const auto& n : parents) p.push_back(d.index(n));
  return local_score(d, d.index(child), p, cfg);
}

// Local-score memo for one (dataset, config). Thread-safe; concurrent fills
// of the same key store identical values.
class ScoreCache {
 public:
  ScoreCache(const BinaryDataset& data, ScoreConfig cfg) : data_(data), cfg_(cfg) {}

  const BinaryDataset& data() const { return data_; }
  const ScoreConfig& config() const { return cfg_; }

  double local(std::size_t child, std::span<const std::size_t> parents) const {
    Key k{child, {parents.begin(), parents.end()}};
    std::sort(k.parents.begin(), k.parents.end());
    {
      std::shared_lock lock(mu_);
      auto it = memo_.find(k);
      if (it != memo_.end()) return it->second;
    }
    const double s = local_score(data_, child, k.parents, cfg_);
    std::unique_lock lock(mu_);
    memo_.emplace(std::move(k), s);
    return s;
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return memo_.size();
  }

 private:
  struct Key {
    std::size_t child;
    std::vector<std::size_t> parents;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = (k.child + 1) * 0x9E3779B97F4A7C15ULL;
      for (auto p : k.parents) h = (h ^ (p + 1)) * 0x100000001B3ULL + (h >> 31);
      return h;
    }
  };

  const BinaryDataset& data_;
  ScoreConfig cfg_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<Key, double, KeyHash> memo_;
};

namespace detail {

// Graph nodes mapped to dataset columns by name.
inline std::vector<std::size_t> column_map(const BinaryDataset& d, const MixedGraph& g) {
  std::vector<std::size_t> m(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) m[i] = d.index(g.name(i));
  return m;
}

}  // namespace detail

inline double graph_score(const BinaryDataset& d, const MixedGraph& g, const ScoreConfig& cfg,
                          const ScoreCache* cache = nullptr) {
  if (g.has_undirected_edges()) throw data_error("graph_score: graph has undirected edges");
  if (has_directed_cycle(g)) throw data_error("graph_score: graph has a directed cycle");
  const auto col = detail::column_map(d, g);
  double total = 0.0;
  for (std::size_t v = 0; v < g.size(); ++v) {
    std::vector<std::size_t> pa;
    for (auto p : g.parents(v)) pa.push_back(col[p]);
    total += cache ? cache->local(col[v], pa) : local_score(d, col[v], pa, cfg);
  }
  return total;
}

}  // namespace hetcause
