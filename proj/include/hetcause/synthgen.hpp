#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hetcause/dataset.hpp"
#include "hetcause/error.hpp"
#include "hetcause/graph.hpp"
#include "hetcause/rng.hpp"

namespace hetcause {

enum class Topology { er, ba };
enum class GenMode { logistic, logistic_interaction, bernoulli_linear, cpt };

inline Topology parse_topology(std::string_view s) {
  if (s == "er") return Topology::er;
  if (s == "ba") return Topology::ba;
  throw config_error("unknown topology '" + std::string(s) + "' (expected er or ba)");
}

inline std::string to_string(Topology t) { return t == Topology::er ? "er" : "ba"; }

inline GenMode parse_gen_mode(std::string_view s) {
  if (s == "L" || s == "logistic") return GenMode::logistic;
  if (s == "LL" || s == "logistic_interaction") return GenMode::logistic_interaction;
  if (s == "BL" || s == "bernoulli_linear") return GenMode::bernoulli_linear;
  throw config_error("unknown generation mode '" + std::string(s) + "'");
}

inline std::string to_string(GenMode m) {
  switch (m) {
    case GenMode::logistic: return "L";
    case GenMode::logistic_interaction: return "LL";
    case GenMode::bernoulli_linear: return "BL";
    case GenMode::cpt: return "CPT";
  }
  return "?";
}

struct DagGenConfig {
  Topology topology = Topology::er;
  std::size_t n = 10;     // nodes besides the outcome
  double sparsity = 1.0;  // sp_er (average degree) or sp_ba (attachment count)
  std::uint64_t seed = 0;

  // Edge probability of the undirected ER graph.
  double er_probability() const { return 2.0 * double(n) * sparsity / (double(n) * double(n - 1)); }

  void validate() const {
    if (n < 2) throw config_error("random_dag: need at least two nodes");
    if (!(sparsity > 0)) throw config_error("random_dag: sparsity must be positive");
    if (topology == Topology::er && er_probability() > 1.0)
      throw config_error("random_dag: ER edge probability exceeds 1");
    if (topology == Topology::ba) {
      if (sparsity != std::floor(sparsity)) throw config_error("random_dag: BA sparsity must be an integer");
      if (sparsity >= double(n)) throw config_error("random_dag: BA sparsity must be below n");
    }
  }
};

// Node names X1..Xn, zero padded so that lexicographic order is numeric order.
inline std::vector<std::string> synthetic_node_names(std::size_t n) {
  const auto width = std::to_string(n).size();
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= n; ++i) {
    auto s = std::to_string(i);
    names.push_back("X" + std::string(width - s.size(), '0') + s);
  }
  return names;
}

namespace detail {

using UndirectedEdges = std::vector<std::pair<std::size_t, std::size_t>>;

inline UndirectedEdges erdos_renyi(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  UndirectedEdges e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng)) e.emplace_back(i, j);
  return e;
}

// Star seed over m + 1 nodes, then each new node attaches to m distinct
// targets drawn with probability proportional to degree.
inline UndirectedEdges barabasi_albert(std::size_t n, std::size_t m, std::mt19937_64& rng) {
  UndirectedEdges e;
  std::vector<std::size_t> repeated;
  for (std::size_t i = 1; i <= m; ++i) {
    e.emplace_back(0, i);
    repeated.push_back(0);
    repeated.push_back(i);
  }
  for (std::size_t src = m + 1; src < n; ++src) {
    std::set<std::size_t> targets;
    while (targets.size() < m) {
      std::uniform_int_distribution<std::size_t> pick(0, repeated.size() - 1);
      targets.insert(repeated[pick(rng)]);
    }
    for (auto t : targets) {
      e.emplace_back(t, src);
      repeated.push_back(t);
      repeated.push_back(src);
    }
  }
  return e;
}

}  // namespace detail

// Random DAG over X1..Xn plus a sink outcome Y. The undirected ER or BA
// graph is oriented along a random permutation; Y then receives parents.
inline MixedGraph random_dag(const DagGenConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const std::size_t n = cfg.n;
  const auto und = cfg.topology == Topology::er
                       ? detail::erdos_renyi(n, cfg.er_probability(), rng)
                       : detail::barabasi_albert(n, static_cast<std::size_t>(cfg.sparsity), rng);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[perm[i]] = i;

  auto names = synthetic_node_names(n);
  names.emplace_back(kOutcomeColumn);
  MixedGraph g(names);
  for (auto [a, b] : und) {
    if (rank[a] < rank[b]) g.add_directed(a, b);
    else g.add_directed(b, a);
  }

  std::vector<std::size_t> y_parents;
  if (cfg.topology == Topology::er) {
    const auto k = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(cfg.sparsity)));
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::shuffle(pool.begin(), pool.end(), rng);
    y_parents.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(std::max<std::size_t>(k, 1)));
  } else {
    const double p = double(und.size()) / (double(n) * double(n - 1) / 2.0);
    std::bernoulli_distribution coin(std::min(1.0, p));
    for (std::size_t i = 0; i < n; ++i)
      if (coin(rng)) y_parents.push_back(i);
    if (y_parents.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      y_parents.push_back(pick(rng));
    }
  }
  for (auto p : y_parents) g.add_directed(p, n);
  return g;
}

// Per-node mechanism. Parent order is the ascending node index order of
// MixedGraph::parents; CPT entry i holds P(node = 1) for the assignment whose
// bit j is the value of parent j.
struct NodeMechanism {
  GenMode mode = GenMode::cpt;
  std::vector<std::size_t> parents;
  double bias = 0.0;
  std::vector<double> weights;
  std::vector<double> interactions;  // pairs (i < j) in lexicographic order
  std::vector<double> cpt;

  double prob_one(std::uint64_t assignment) const {
    if (mode == GenMode::cpt) return cpt.at(assignment);
    double s = bias;
    for (std::size_t i = 0; i < parents.size(); ++i)
      if ((assignment >> i) & 1U) s += weights[i];
    if (mode == GenMode::bernoulli_linear) return s;
    if (mode == GenMode::logistic_interaction) {
      std::size_t idx = 0;
      for (std::size_t i = 0; i < parents.size(); ++i)
        for (std::size_t j = i + 1; j < parents.size(); ++j, ++idx)
          if (((assignment >> i) & 1U) && ((assignment >> j) & 1U)) s += interactions[idx];
    }
    return 1.0 / (1.0 + std::exp(-s));
  }

  // Table of prob_one over every parent assignment.
  std::vector<double> table() const {
    if (parents.size() > 24) throw config_error("mechanism table: too many parents");
    std::vector<double> t(std::size_t{1} << parents.size());
    for (std::size_t a = 0; a < t.size(); ++a) t[a] = prob_one(a);
    return t;
  }
};

struct DiscreteSCM {
  MixedGraph dag;
  std::vector<NodeMechanism> nodes;  // indexed like dag
};

namespace detail {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double signed_magnitude(std::mt19937_64& rng, double lo, double hi) {
  const double m = uniform(rng, lo, hi);
  return std::bernoulli_distribution(0.5)(rng) ? m : -m;
}

inline BinaryDataset ancestral_sample(const DiscreteSCM& scm, std::size_t n_samples,
                                      std::uint64_t seed) {
  const auto& g = scm.dag;
  const auto order = topological_order(g);
  std::vector<std::vector<double>> tables(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) tables[v] = scm.nodes[v].table();
  std::vector<std::vector<std::uint8_t>> cols(g.size(), std::vector<std::uint8_t>(n_samples));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (std::size_t r = 0; r < n_samples; ++r)
    for (auto v : order) {
      const auto& pa = scm.nodes[v].parents;
      std::uint64_t a = 0;
      for (std::size_t i = 0; i < pa.size(); ++i)
        if (cols[pa[i]][r]) a |= std::uint64_t{1} << i;
      cols[v][r] = u01(rng) < tables[v][a] ? 1 : 0;
    }
  std::vector<std::string> names;
  for (std::size_t v = 0; v < g.size(); ++v) names.push_back(g.name(v));
  return BinaryDataset(names, std::move(cols));
}

}  // namespace detail

struct ParametricSample {
  BinaryDataset data;
  DiscreteSCM scm;
};

// Draws mechanism weights for every node and samples n_samples rows.
// Logistic modes: b ~ U[-1, 1], |W| ~ U[0.5, 2], |I| ~ U[0.3, 1] with random
// signs. Bernoulli-linear: b ~ U(0, 1), W ~ U(-1, 1), redrawn until every
// parent assignment yields a probability in [0, 1].
inline ParametricSample sample_parametric(const MixedGraph& dag, GenMode mode, std::size_t n_samples,
                                          std::uint64_t seed) {
  if (mode == GenMode::cpt) throw config_error("sample_parametric: use sample_from_cpts for CPT mode");
  if (!is_dag(dag)) throw data_error("sample_parametric: graph is not a DAG");
  std::mt19937_64 rng(seed);
  DiscreteSCM scm{dag, std::vector<NodeMechanism>(dag.size())};
  for (std::size_t v = 0; v < dag.size(); ++v) {
    auto& m = scm.nodes[v];
    m.mode = mode;
    m.parents = dag.parents(v);
    const std::size_t k = m.parents.size();
    if (mode == GenMode::bernoulli_linear) {
      bool ok = false;
      for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
        m.bias = detail::uniform(rng, 0.0, 1.0);
        m.weights.assign(k, 0.0);
        double lo = m.bias, hi = m.bias;
        for (auto& w : m.weights) {
          w = detail::uniform(rng, -1.0, 1.0);
          (w < 0 ? lo : hi) += w;
        }
        ok = lo >= 0.0 && hi <= 1.0;
      }
      if (!ok)
        throw data_error("sample_parametric: bounded linear weights not found for node " + dag.name(v));
      continue;
    }
    m.bias = detail::uniform(rng, -1.0, 1.0);
    for (std::size_t i = 0; i < k; ++i) m.weights.push_back(detail::signed_magnitude(rng, 0.5, 2.0));
    if (mode == GenMode::logistic_interaction)
      for (std::size_t i = 0; k > 1 && i < k * (k - 1) / 2; ++i)
        m.interactions.push_back(detail::signed_magnitude(rng, 0.3, 1.0));
  }
  auto data = detail::ancestral_sample(scm, n_samples, splitmix64(seed));
  return {std::move(data), std::move(scm)};
}

// P(v = 1 | pa) = (count(v = 1, pa) + s) / (count(pa) + 2 s); an unseen
// parent assignment gets 0.5.
inline DiscreteSCM fit_cpts(const BinaryDataset& d, const MixedGraph& dag, double smoothing = 1.0) {
  if (smoothing < 0) throw config_error("fit_cpts: smoothing must be non-negative");
  DiscreteSCM scm{dag, std::vector<NodeMechanism>(dag.size())};
  for (std::size_t v = 0; v < dag.size(); ++v) {
    auto& m = scm.nodes[v];
    m.mode = GenMode::cpt;
    m.parents = dag.parents(v);
    if (m.parents.size() > 24) throw config_error("fit_cpts: too many parents for " + dag.name(v));
    std::vector<std::size_t> vars;
    for (auto p : m.parents) vars.push_back(d.index(dag.name(p)));
    vars.push_back(d.index(dag.name(v)));
    const auto counts = d.joint_counts(vars);
    const std::size_t rows = std::size_t{1} << m.parents.size();
    m.cpt.resize(rows);
    for (std::size_t a = 0; a < rows; ++a) {
      const double c0 = counts[a], c1 = counts[a | rows], tot = c0 + c1 + 2 * smoothing;
      m.cpt[a] = tot > 0 ? (c1 + smoothing) / tot : 0.5;
    }
  }
  return scm;
}

inline BinaryDataset sample_from_cpts(const DiscreteSCM& scm, std::size_t n_samples, std::uint64_t seed) {
  if (!is_dag(scm.dag)) throw data_error("sample_from_cpts: graph is not a DAG");
  if (scm.nodes.size() != scm.dag.size()) throw data_error("sample_from_cpts: mechanism count mismatch");
  return detail::ancestral_sample(scm, n_samples, seed);
}

}  // namespace hetcause
