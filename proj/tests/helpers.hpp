#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hetcause/dataset.hpp"
#include "hetcause/graph.hpp"

namespace testutil {

// Dataset from row-major 0/1 rows.
inline hetcause::BinaryDataset from_rows(const std::vector<std::string>& names,
                                         const std::vector<std::vector<int>>& rows) {
  std::vector<std::vector<std::uint8_t>> cols(names.size(), std::vector<std::uint8_t>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < names.size(); ++c) cols[c][r] = static_cast<std::uint8_t>(rows[r][c]);
  return hetcause::BinaryDataset(names, cols);
}

inline hetcause::BinaryDataset random_binary(std::size_t n_cols, std::size_t n_rows, std::uint64_t seed,
                                             double p = 0.5) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<std::string> names;
  std::vector<std::vector<std::uint8_t>> cols(n_cols, std::vector<std::uint8_t>(n_rows));
  for (std::size_t c = 0; c < n_cols; ++c) {
    names.push_back("V" + std::to_string(c));
    for (auto& v : cols[c]) v = coin(rng);
  }
  return hetcause::BinaryDataset(names, cols);
}

// Logistic sampler written independently of the library's generators:
// P(v = 1) = sigmoid(bias[v] + sum weight(p, v) * p), nodes given in a
// topological order.
struct LogisticNet {
  std::vector<std::string> names;
  std::vector<double> bias;
  std::vector<std::vector<std::pair<std::size_t, double>>> parents;  // (parent index, weight)

  hetcause::BinaryDataset sample(std::size_t n, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<std::uint8_t>> cols(names.size(), std::vector<std::uint8_t>(n));
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t v = 0; v < names.size(); ++v) {
        double s = bias[v];
        for (auto [p, w] : parents[v]) s += w * cols[p][r];
        cols[v][r] = u(rng) < 1.0 / (1.0 + std::exp(-s));
      }
    return hetcause::BinaryDataset(names, cols);
  }

  hetcause::MixedGraph dag() const {
    hetcause::MixedGraph g(names);
    for (std::size_t v = 0; v < names.size(); ++v)
      for (auto [p, w] : parents[v]) g.add_directed(p, v);
    return g;
  }
};

// X ~ B(.6), Z ~ B(.5), Y ~ B(.4 + .2X + .24Z - .4XZ): X and Y are marginally
// independent yet dependent given Z.
inline hetcause::BinaryDataset unfaithful_collider(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<std::uint8_t>> cols(3, std::vector<std::uint8_t>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const int x = u(rng) < 0.6, z = u(rng) < 0.5;
    const double py = 0.4 + 0.2 * x + 0.24 * z - 0.4 * x * z;
    cols[0][r] = x;
    cols[1][r] = z;
    cols[2][r] = u(rng) < py;
  }
  return hetcause::BinaryDataset({"X", "Z", "Y"}, cols);
}

// Every DAG on the given node names (feasible for up to 4 nodes).
inline std::vector<hetcause::MixedGraph> all_dags(const std::vector<std::string>& names) {
  const std::size_t n = names.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<hetcause::MixedGraph> out;
  std::size_t total = 1;
  for (std::size_t k = 0; k < pairs.size(); ++k) total *= 3;
  for (std::size_t code = 0; code < total; ++code) {
    hetcause::MixedGraph g(names);
    std::size_t c = code;
    for (auto [i, j] : pairs) {
      const auto s = c % 3;
      c /= 3;
      if (s == 1) g.add_directed(i, j);
      else if (s == 2) g.add_directed(j, i);
    }
    if (hetcause::is_dag(g)) out.push_back(std::move(g));
  }
  return out;
}

// Reachability by repeated relaxation over the adjacency matrix.
inline std::vector<std::vector<bool>> transitive_closure(const hetcause::MixedGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) reach[i][j] = g.has_directed(i, j);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
  return reach;
}

}  // namespace testutil
