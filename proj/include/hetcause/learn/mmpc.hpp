#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hetcause/learn/common.hpp"
#include "hetcause/learn/hill_climb.hpp"

namespace hetcause {

namespace detail {

// Association strength of a CI result: 1 - p, with the statistic breaking
// ties once p underflows to zero.
struct Association {
  double p = 1.0;
  double stat = 0.0;

  bool stronger_than(const Association& o) const {
    if (p != o.p) return p < o.p;
    return stat > o.stat;
  }
};

inline Association weaker(const Association& a, const Association& b) {
  return a.stronger_than(b) ? b : a;
}

// Candidate parents/children of `target` (before symmetry correction).
inline std::vector<std::size_t> mmpc_single(const CITestCache& ci, std::size_t target,
                                            std::size_t n, const LearnerParams& params,
                                            const std::vector<std::size_t>& order) {
  std::vector<std::size_t> cpc;
  std::vector<char> alive(n, 1);
  alive[target] = 0;
  std::vector<Association> min_assoc(n, Association{0.0, std::numeric_limits<double>::infinity()});

  auto test = [&](std::size_t x, const std::vector<std::size_t>& s) {
    auto r = ci.test(target, x, s);
    return Association{r.p_value, r.statistic};
  };

  std::optional<std::size_t> newest;
  while (true) {
    // Refresh min-association over the subsets that involve the newest member.
    for (auto x : order) {
      if (!alive[x]) continue;
      if (!newest) {
        min_assoc[x] = test(x, {});
      } else {
        std::vector<std::size_t> rest;
        for (auto c : cpc)
          if (c != *newest) rest.push_back(c);
        const std::size_t cap = params.max_cond_size;
        for (std::size_t k = 0; k + 1 <= cap && k <= rest.size(); ++k) {
          bool stop = false;
          for_each_subset(rest, k, [&](const std::vector<std::size_t>& s) {
            auto with_new = s;
            with_new.push_back(*newest);
            min_assoc[x] = weaker(min_assoc[x], test(x, with_new));
            stop = min_assoc[x].p >= params.alpha;
            return stop;
          });
          if (stop) break;
        }
      }
      if (min_assoc[x].p >= params.alpha) alive[x] = 0;
    }
    std::optional<std::size_t> best;
    for (auto x : order)
      if (alive[x] && (!best || min_assoc[x].stronger_than(min_assoc[*best]))) best = x;
    if (!best) break;
    cpc.push_back(*best);
    alive[*best] = 0;
    newest = best;
  }

  // Backward phase: drop members separated from the target by a subset of
  // the remaining members.
  for (std::size_t i = 0; i < cpc.size();) {
    const auto x = cpc[i];
    std::vector<std::size_t> rest;
    for (auto c : cpc)
      if (c != x) rest.push_back(c);
    bool separated = false;
    for (std::size_t k = 0; k <= std::min(params.max_cond_size, rest.size()) && !separated; ++k)
      for_each_subset(rest, k, [&](const std::vector<std::size_t>& s) {
        separated = ci.test(target, x, s).independent;
        return separated;
      });
    if (separated) cpc.erase(cpc.begin() + static_cast<std::ptrdiff_t>(i));
    else ++i;
  }
  std::sort(cpc.begin(), cpc.end());
  return cpc;
}

}  // namespace detail

// Max-Min Parents and Children for every column, symmetrised by requiring
// x in PC(y) and y in PC(x). Result is indexed by column.
inline std::vector<std::vector<std::size_t>> mmpc(const BinaryDataset& d,
                                                  const LearnerParams& params,
                                                  const CITestCache* shared_cache = nullptr) {
  params.validate();
  std::optional<CITestCache> local;
  if (!shared_cache) local.emplace(d, params.mmpc_test, params.alpha);
  const CITestCache& ci = shared_cache ? *shared_cache : *local;
  const std::size_t n = d.cols();
  const auto order = name_order(d);
  std::vector<std::vector<std::size_t>> raw(n);
  for (std::size_t t = 0; t < n; ++t) raw[t] = detail::mmpc_single(ci, t, n, params, order);
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t t = 0; t < n; ++t)
    for (auto x : raw[t])
      if (std::binary_search(raw[x].begin(), raw[x].end(), t)) out[t].push_back(x);
  return out;
}

inline std::map<std::string, std::set<std::string>> mmpc_named(const BinaryDataset& d,
                                                               const LearnerParams& params) {
  auto pc = mmpc(d, params);
  std::map<std::string, std::set<std::string>> out;
  for (std::size_t t = 0; t < d.cols(); ++t) {
    auto& s = out[d.name(t)];
    for (auto x : pc[t]) s.insert(d.name(x));
  }
  return out;
}

// Hill climbing restricted to the MMPC skeleton.
inline MixedGraph mmhc(const BinaryDataset& d, const StructuralConstraints& constraints,
                       const LearnerParams& params) {
  if (d.cols() < 2) throw data_error("mmhc: need at least two columns");
  const auto pc = mmpc(d, params);
  const std::size_t n = d.cols();
  std::vector<char> allowed(n * n, 0);
  for (std::size_t t = 0; t < n; ++t)
    for (auto x : pc[t]) allowed[t * n + x] = allowed[x * n + t] = 1;
  return hill_climb(d, constraints, params, &allowed);
}

}  // namespace hetcause
