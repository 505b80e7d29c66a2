#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hetcause/error.hpp"

namespace hetcause {

using Edge = std::pair<std::size_t, std::size_t>;

// Graph over named nodes where each adjacent pair carries exactly one edge,
// either directed or undirected. DAGs and CPDAGs are states of this type.
// Undirected edges may carry a conflict mark (two colliders disagreed on
// the orientation); marked edges are never oriented by the closure rules.
class MixedGraph {
 public:
  MixedGraph() = default;

  explicit MixedGraph(std::vector<std::string> nodes) {
    for (auto& n : nodes) add_node(std::move(n));
  }

  std::size_t size() const { return nodes_.size(); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::string& name(std::size_t i) const { return nodes_.at(i); }

  std::optional<std::size_t> find(std::string_view n) const {
    auto it = index_.find(std::string(n));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index(std::string_view n) const {
    auto i = find(n);
    if (!i) throw data_error("graph: unknown node '" + std::string(n) + "'");
    return *i;
  }

  std::size_t add_node(std::string n) {
    if (auto i = find(n)) return *i;
    const std::size_t old = nodes_.size(), nn = old + 1;
    std::vector<std::uint8_t> e(nn * nn, kNone), c(nn * nn, 0);
    for (std::size_t i = 0; i < old; ++i)
      for (std::size_t j = 0; j < old; ++j) {
        e[i * nn + j] = edges_[i * old + j];
        c[i * nn + j] = conflict_[i * old + j];
      }
    edges_.swap(e);
    conflict_.swap(c);
    index_.emplace(n, old);
    nodes_.push_back(std::move(n));
    return old;
  }

  bool has_directed(std::size_t i, std::size_t j) const { return at(i, j) == kOut; }
  bool has_undirected(std::size_t i, std::size_t j) const { return at(i, j) == kLine; }
  bool adjacent(std::size_t i, std::size_t j) const { return at(i, j) != kNone; }
  bool is_conflict(std::size_t i, std::size_t j) const {
    return conflict_[i * size() + j] != 0;
  }

  void add_directed(std::size_t i, std::size_t j) {
    check_new(i, j);
    set(i, j, kOut);
  }
  void add_undirected(std::size_t i, std::size_t j) {
    check_new(i, j);
    set(i, j, kLine);
  }
  void add_directed(std::string_view a, std::string_view b) { add_directed(index(a), index(b)); }
  void add_undirected(std::string_view a, std::string_view b) { add_undirected(index(a), index(b)); }

  void remove_edge(std::size_t i, std::size_t j) { set(i, j, kNone); }

  // Turns an existing edge into i -> j.
  void orient(std::size_t i, std::size_t j) {
    if (!adjacent(i, j)) throw error("graph: orient on non-adjacent pair");
    set(i, j, kOut);
  }
  void unorient(std::size_t i, std::size_t j) {
    if (!adjacent(i, j)) throw error("graph: unorient on non-adjacent pair");
    set(i, j, kLine);
  }
  void mark_conflict(std::size_t i, std::size_t j) {
    if (!adjacent(i, j)) throw error("graph: conflict on non-adjacent pair");
    set(i, j, kLine);
    conflict_[i * size() + j] = conflict_[j * size() + i] = 1;
  }

  std::vector<std::size_t> parents(std::size_t i) const { return collect(i, kIn); }
  std::vector<std::size_t> children(std::size_t i) const { return collect(i, kOut); }
  std::vector<std::size_t> neighbors(std::size_t i) const { return collect(i, kLine); }
  std::vector<std::size_t> adjacents(std::size_t i) const {
    std::vector<std::size_t> v;
    for (std::size_t j = 0; j < size(); ++j)
      if (adjacent(i, j)) v.push_back(j);
    return v;
  }

  std::vector<Edge> directed_edges() const {
    std::vector<Edge> v;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j)
        if (has_directed(i, j)) v.emplace_back(i, j);
    return v;
  }
  std::vector<Edge> undirected_edges() const {
    std::vector<Edge> v;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j)
        if (has_undirected(i, j)) v.emplace_back(i, j);
    return v;
  }
  std::size_t edge_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j) n += adjacent(i, j);
    return n;
  }
  bool has_undirected_edges() const { return !undirected_edges().empty(); }

  friend bool operator==(const MixedGraph& a, const MixedGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_ && a.conflict_ == b.conflict_;
  }

 private:
  // Encoding of edges_[i * n + j] from i's point of view.
  static constexpr std::uint8_t kNone = 0, kOut = 1, kIn = 2, kLine = 3;

  std::uint8_t at(std::size_t i, std::size_t j) const { return edges_[i * size() + j]; }

  void set(std::size_t i, std::size_t j, std::uint8_t s) {
    const std::size_t n = size();
    if (i >= n || j >= n) throw error("graph: node index out of range");
    edges_[i * n + j] = s;
    edges_[j * n + i] = s == kOut ? kIn : s == kIn ? kOut : s;
    if (s != kLine) conflict_[i * n + j] = conflict_[j * n + i] = 0;
  }

  void check_new(std::size_t i, std::size_t j) const {
    if (i == j) throw error("graph: self-loop on '" + name(i) + "'");
    if (adjacent(i, j))
      throw error("graph: duplicate edge " + name(i) + " / " + name(j));
  }

  std::vector<std::size_t> collect(std::size_t i, std::uint8_t s) const {
    std::vector<std::size_t> v;
    for (std::size_t j = 0; j < size(); ++j)
      if (at(i, j) == s) v.push_back(j);
    return v;
  }

  std::vector<std::string> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::uint8_t> edges_;
  std::vector<std::uint8_t> conflict_;
};

enum class RelativeKind { parents, ancestors, descendants };

// Nodes reachable from `start` along directed edges only (excluding start).
// `forward` follows edges tail -> head (descendants), otherwise head -> tail.
inline std::vector<char> directed_reach(const MixedGraph& g, std::size_t start, bool forward) {
  std::vector<char> seen(g.size(), 0);
  std::vector<std::size_t> stack{start};
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    for (std::size_t w = 0; w < g.size(); ++w) {
      if (seen[w]) continue;
      if (forward ? g.has_directed(v, w) : g.has_directed(w, v)) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  seen[start] = 0;
  return seen;
}

inline std::vector<char> ancestor_mask(const MixedGraph& g, std::size_t v) {
  return directed_reach(g, v, false);
}
inline std::vector<char> descendant_mask(const MixedGraph& g, std::size_t v) {
  return directed_reach(g, v, true);
}

inline std::set<std::string> relatives(const MixedGraph& g, std::string_view node,
                                       RelativeKind kind) {
  const auto v = g.index(node);
  std::set<std::string> out;
  if (kind == RelativeKind::parents) {
    for (auto p : g.parents(v)) out.insert(g.name(p));
    return out;
  }
  auto mask = directed_reach(g, v, kind == RelativeKind::descendants);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (mask[i]) out.insert(g.name(i));
  return out;
}

inline bool directed_path_exists(const MixedGraph& g, std::size_t from, std::size_t to) {
  if (from == to) return true;
  return directed_reach(g, from, true)[to] != 0;
}

inline bool has_directed_cycle(const MixedGraph& g) {
  // Kahn's algorithm on the directed part.
  std::vector<std::size_t> indeg(g.size(), 0);
  for (auto [a, b] : g.directed_edges()) ++indeg[b];
  std::deque<std::size_t> q;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!indeg[i]) q.push_back(i);
  std::size_t seen = 0;
  while (!q.empty()) {
    auto v = q.front();
    q.pop_front();
    ++seen;
    for (auto c : g.children(v))
      if (--indeg[c] == 0) q.push_back(c);
  }
  return seen != g.size();
}

inline bool is_dag(const MixedGraph& g) {
  return !g.has_undirected_edges() && !has_directed_cycle(g);
}

// Deterministic topological order of the directed part (smallest index first).
inline std::vector<std::size_t> topological_order(const MixedGraph& g) {
  std::vector<std::size_t> indeg(g.size(), 0), order;
  for (auto [a, b] : g.directed_edges()) ++indeg[b];
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!indeg[i]) ready.insert(i);
  while (!ready.empty()) {
    auto v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (auto c : g.children(v))
      if (--indeg[c] == 0) ready.insert(c);
  }
  if (order.size() != g.size()) throw data_error("graph has a directed cycle");
  return order;
}

struct EdgeCheck {
  bool creates_cycle = false;
  bool creates_new_unshielded_collider = false;
};

// Consequences of adding (or orienting) from -> to.
inline EdgeCheck validate_edge_addition(const MixedGraph& g, std::size_t from, std::size_t to) {
  EdgeCheck r;
  r.creates_cycle = from == to || directed_path_exists(g, to, from);
  for (auto p : g.parents(to))
    if (p != from && !g.adjacent(p, from)) r.creates_new_unshielded_collider = true;
  return r;
}

inline EdgeCheck validate_edge_addition(const MixedGraph& g, std::string_view from,
                                        std::string_view to) {
  return validate_edge_addition(g, g.index(from), g.index(to));
}

namespace detail {

// Whether one of Meek's rules R1-R4 forces a - b into a -> b.
inline bool meek_forces(const MixedGraph& g, std::size_t a, std::size_t b) {
  const std::size_t n = g.size();
  for (std::size_t c = 0; c < n; ++c) {
    if (c == a || c == b) continue;
    // R1: c -> a - b, c and b nonadjacent.
    if (g.has_directed(c, a) && !g.adjacent(c, b)) return true;
    // R2: a -> c -> b.
    if (g.has_directed(a, c) && g.has_directed(c, b)) return true;
  }
  // R3: a - c -> b and a - d -> b with c, d nonadjacent.
  for (std::size_t c = 0; c < n; ++c) {
    if (!g.has_undirected(a, c) || !g.has_directed(c, b)) continue;
    for (std::size_t d = c + 1; d < n; ++d)
      if (g.has_undirected(a, d) && g.has_directed(d, b) && !g.adjacent(c, d)) return true;
  }
  // R4: c -> d -> b with a adjacent to c and d, c and b nonadjacent.
  for (std::size_t d = 0; d < n; ++d) {
    if (d == a || !g.has_directed(d, b) || !g.adjacent(a, d)) continue;
    for (std::size_t c = 0; c < n; ++c)
      if (c != a && c != b && g.has_directed(c, d) && g.adjacent(a, c) && !g.adjacent(c, b))
        return true;
  }
  return false;
}

}  // namespace detail

// Closure under Meek's rules R1-R4. Conflict-marked edges stay undirected.
inline MixedGraph apply_meek_rules(MixedGraph g) {
  if (has_directed_cycle(g)) throw data_error("apply_meek_rules: input has a directed cycle");
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto [a, b] : g.undirected_edges()) {
      if (g.is_conflict(a, b)) continue;
      for (auto [x, y] : {Edge{a, b}, Edge{b, a}}) {
        if (!g.has_undirected(x, y)) break;
        if (detail::meek_forces(g, x, y) && !directed_path_exists(g, y, x)) {
          g.orient(x, y);
          changed = true;
        }
      }
    }
  }
  return g;
}

inline MixedGraph ancestral_subgraph(const MixedGraph& g, std::string_view y) {
  const auto yi = g.index(y);
  auto keep = ancestor_mask(g, yi);
  keep[yi] = 1;
  std::vector<std::size_t> old;
  MixedGraph out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (keep[i]) {
      old.push_back(i);
      out.add_node(g.name(i));
    }
  for (std::size_t a = 0; a < old.size(); ++a)
    for (std::size_t b = 0; b < old.size(); ++b) {
      if (g.has_directed(old[a], old[b])) out.add_directed(a, b);
      else if (a < b && g.has_undirected(old[a], old[b])) {
        out.add_undirected(a, b);
        if (g.is_conflict(old[a], old[b])) out.mark_conflict(a, b);
      }
    }
  return out;
}

// Unshielded colliders (a, b, c) with a < c, a -> b <- c and a, c nonadjacent.
inline std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> v_structures(
    const MixedGraph& g) {
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> out;
  for (std::size_t b = 0; b < g.size(); ++b) {
    auto pa = g.parents(b);
    for (std::size_t i = 0; i < pa.size(); ++i)
      for (std::size_t j = i + 1; j < pa.size(); ++j)
        if (!g.adjacent(pa[i], pa[j])) out.emplace_back(pa[i], b, pa[j]);
  }
  return out;
}

// Every orientation of g's undirected edges that is acyclic and creates no
// unshielded collider beyond those already directed in g.
inline std::vector<MixedGraph> enumerate_consistent_extensions(const MixedGraph& g,
                                                               std::size_t max_undirected = 12) {
  const auto und = g.undirected_edges();
  if (und.size() > max_undirected)
    throw config_error("exceeds enumeration budget: " + std::to_string(und.size()) +
                       " undirected edges");
  std::vector<MixedGraph> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << und.size()); ++mask) {
    MixedGraph h = g;
    for (std::size_t e = 0; e < und.size(); ++e) {
      auto [a, b] = und[e];
      if ((mask >> e) & 1U) h.orient(b, a);
      else h.orient(a, b);
    }
    if (has_directed_cycle(h)) continue;
    bool ok = true;
    for (auto [a, b, c] : v_structures(h))
      if (!g.has_directed(a, b) || !g.has_directed(c, b)) {
        ok = false;
        break;
      }
    if (ok) out.push_back(std::move(h));
  }
  return out;
}

// Completed PDAG of the Markov equivalence class of a DAG.
inline MixedGraph cpdag_from_dag(const MixedGraph& dag) {
  if (!is_dag(dag)) throw data_error("cpdag_from_dag: input is not a DAG");
  MixedGraph g = dag;
  std::set<Edge> keep;
  for (auto [a, b, c] : v_structures(dag)) {
    keep.emplace(a, b);
    keep.emplace(c, b);
  }
  for (auto [a, b] : dag.directed_edges())
    if (!keep.count({a, b})) g.unorient(a, b);
  return apply_meek_rules(std::move(g));
}

// Some consistent DAG extension of a PDAG (Dor & Tarsi), if one exists.
inline std::optional<MixedGraph> pdag_extension(const MixedGraph& pdag) {
  MixedGraph work = pdag, out = pdag;
  std::vector<char> alive(pdag.size(), 1);
  std::size_t remaining = pdag.size();
  while (remaining) {
    bool found = false;
    for (std::size_t x = 0; x < work.size() && !found; ++x) {
      if (!alive[x] || !work.children(x).empty()) continue;
      auto adj = work.adjacents(x);
      bool ok = true;
      for (auto y : work.neighbors(x)) {
        for (auto z : adj)
          if (z != y && !work.adjacent(y, z)) {
            ok = false;
            break;
          }
        if (!ok) break;
      }
      if (!ok) continue;
      for (auto y : work.neighbors(x)) out.orient(y, x);
      for (auto z : adj) work.remove_edge(x, z);
      alive[x] = 0;
      --remaining;
      found = true;
    }
    if (!found) return std::nullopt;
  }
  return out;
}

inline bool markov_equivalent(const MixedGraph& a, const MixedGraph& b) {
  return cpdag_from_dag(a) == cpdag_from_dag(b);
}

// Edge-list text: `a -> b`, `a -- b`, `node x`, `#` comments. Writers emit
// every node first so node order survives a round trip.
inline MixedGraph read_edge_list(std::istream& in) {
  MixedGraph g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool conflict = false;
    if (auto h = line.find('#'); h != std::string::npos) {
      conflict = line.find("conflict", h) != std::string::npos;
      line.erase(h);
    }
    std::istringstream ss(line);
    std::string a, op, b, extra;
    if (!(ss >> a)) continue;
    if (a == "node") {
      if (!(ss >> b) || (ss >> extra))
        throw data_error("edge list: bad node line " + std::to_string(lineno));
      g.add_node(b);
      continue;
    }
    if (!(ss >> op >> b) || (ss >> extra) || (op != "->" && op != "--"))
      throw data_error("edge list: cannot parse line " + std::to_string(lineno));
    auto i = g.add_node(a), j = g.add_node(b);
    if (op == "->") g.add_directed(i, j);
    else {
      g.add_undirected(i, j);
      if (conflict) g.mark_conflict(i, j);
    }
  }
  return g;
}

inline MixedGraph read_edge_list(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw data_error("cannot open " + path);
  return read_edge_list(f);
}

inline void write_edge_list(std::ostream& out, const MixedGraph& g) {
  for (const auto& n : g.nodes()) out << "node " << n << '\n';
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (g.has_directed(i, j)) out << g.name(i) << " -> " << g.name(j) << '\n';
      else if (i < j && g.has_undirected(i, j))
        out << g.name(i) << " -- " << g.name(j) << (g.is_conflict(i, j) ? " # conflict" : "")
            << '\n';
    }
}

inline std::string to_edge_list(const MixedGraph& g) {
  std::ostringstream ss;
  write_edge_list(ss, g);
  return ss.str();
}

}  // namespace hetcause
