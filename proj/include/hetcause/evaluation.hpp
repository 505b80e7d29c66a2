#pragma once

#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "hetcause/effects.hpp"
#include "hetcause/ensemble.hpp"
#include "hetcause/graph.hpp"

namespace hetcause {

struct SupportMetrics {
  double tp_support = 0.0;
  double fp_support = 0.0;
  std::optional<double> tp_sig_support;
  std::optional<double> fp_sig_support;
  std::size_t true_causes = 0;
  std::size_t non_causes = 0;
};

// Mean cause support over the true ancestors of Y (TP) and over the other
// non-outcome variables (FP). With effect records, the significance variant
// counts a graph only when the variable is an ancestor there and its effect
// has p < sig_level.
inline SupportMetrics support_metrics(const EnsembleResult& r, const MixedGraph& truth,
                                      const std::vector<CauseRecord>* effects = nullptr,
                                      double sig_level = 0.05) {
  if (!truth.find(r.outcome)) throw data_error("support_metrics: truth graph lacks outcome " + r.outcome);
  const auto anc = relatives(truth, r.outcome, RelativeKind::ancestors);
  const auto sc = cause_support(r);
  for (const auto& v : anc)
    if (!sc.count(v)) throw data_error("support_metrics: variable " + v + " missing from the ensemble");

  std::map<std::string, double> sig;
  if (effects) {
    for (const auto& rec : *effects) {
      double hits = 0;
      for (const auto& e : rec.effects)
        if (e.present && e.identifiable && e.p_value < sig_level) hits += 1;
      sig[rec.variable] = r.size() ? hits / double(r.size()) : 0.0;
    }
  }

  SupportMetrics m;
  double tp = 0, fp = 0, tps = 0, fps = 0;
  for (const auto& [v, s] : sc) {
    const double sv = sig.count(v) ? sig.at(v) : 0.0;
    if (anc.count(v)) {
      ++m.true_causes;
      tp += s;
      tps += sv;
    } else {
      ++m.non_causes;
      fp += s;
      fps += sv;
    }
  }
  if (m.true_causes) m.tp_support = tp / double(m.true_causes);
  if (m.non_causes) m.fp_support = fp / double(m.non_causes);
  if (effects) {
    m.tp_sig_support = m.true_causes ? tps / double(m.true_causes) : 0.0;
    m.fp_sig_support = m.non_causes ? fps / double(m.non_causes) : 0.0;
  }
  return m;
}

struct PRF1 {
  double precision = 1.0, recall = 1.0, f1 = 1.0;
};

// Precision is 1 for an empty prediction and recall is 1 for an empty truth.
inline PRF1 cause_prf1(const std::set<std::string>& predicted, const std::set<std::string>& truth) {
  std::size_t hit = 0;
  for (const auto& p : predicted) hit += truth.count(p);
  PRF1 s;
  s.precision = predicted.empty() ? 1.0 : double(hit) / double(predicted.size());
  s.recall = truth.empty() ? 1.0 : double(hit) / double(truth.size());
  const double denom = s.precision + s.recall;
  s.f1 = denom > 0 ? 2.0 * s.precision * s.recall / denom : 0.0;
  return s;
}

// Variables that are ancestors of Y in more than `threshold` of the graphs
// (a strict majority by default).
inline std::set<std::string> majority_vote(const EnsembleResult& r, double threshold = 0.5) {
  std::set<std::string> out;
  for (const auto& [v, s] : cause_support(r))
    if (s > threshold) out.insert(v);
  return out;
}

inline std::set<std::string> graph_causes(const EnsembleResult& r, std::size_t k) {
  return relatives(r.graphs.at(k), r.outcome, RelativeKind::ancestors);
}

// Running mean and sample standard deviation.
struct MetricStats {
  std::size_t count = 0;
  double sum = 0.0, sum_sq = 0.0;

  void add(double x) {
    ++count;
    sum += x;
    sum_sq += x * x;
  }
  double mean() const { return count ? sum / double(count) : 0.0; }
  double stddev() const {
    if (count < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, (sum_sq - double(count) * m * m) / double(count - 1)));
  }
};

struct ResultKey {
  std::string topology;
  std::size_t n = 0;
  double sparsity = 0;
  std::string generator;
  std::string algorithm;
  std::string metric;

  auto tie() const { return std::tie(topology, n, sparsity, generator, algorithm, metric); }
  bool operator<(const ResultKey& o) const { return tie() < o.tie(); }
};

using ResultTable = std::map<ResultKey, MetricStats>;

inline void write_results_csv(std::ostream& out, const ResultTable& t) {
  out << "topology,n,sparsity,generator,algorithm,metric,mean,std,count\n";
  for (const auto& [k, s] : t) {
    std::ostringstream sp;
    sp << k.sparsity;
    out << k.topology << ',' << k.n << ',' << sp.str() << ',' << k.generator << ',' << k.algorithm
        << ',' << k.metric << ',' << std::fixed << std::setprecision(6) << s.mean() << ','
        << s.stddev() << ',' << s.count << '\n';
    out.unsetf(std::ios::floatfield);
  }
}

}  // namespace hetcause
