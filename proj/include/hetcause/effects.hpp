#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hetcause/dataset.hpp"
#include "hetcause/ensemble.hpp"
#include "hetcause/graph.hpp"

namespace hetcause {

enum class EffectMethod { plugin, regression };

struct EffectEstimate {
  std::string treatment;
  std::optional<std::pair<std::string, int>> conditioning;  // (modifier, level)
  double effect = 0.0;
  double std_err = 0.0;
  std::optional<double> p_value;  // absent for the plug-in estimator
  std::set<std::string> adjustment_set;
  std::vector<std::string> dropped_columns;  // collinear regressors removed before fitting
  EffectMethod method = EffectMethod::regression;
};

struct ModifierCandidates {
  std::set<std::string> names;
  bool treatment_is_ancestor = true;
};

// Variables outside des(x) that parent some descendant of x: direct
// modifiers share a child with x, mediator modifiers parent a mediator.
inline ModifierCandidates candidate_effect_modifiers(const MixedGraph& g_anc, std::string_view x,
                                                     std::string_view y) {
  const auto xi = g_anc.index(x), yi = g_anc.index(y);
  auto des = descendant_mask(g_anc, xi);
  ModifierCandidates out;
  if (!des[yi]) {
    out.treatment_is_ancestor = false;
    return out;
  }
  for (std::size_t v = 0; v < g_anc.size(); ++v) {
    if (!des[v]) continue;
    for (auto z : g_anc.parents(v))
      if (z != xi && z != yi && !des[z]) out.names.insert(g_anc.name(z));
  }
  return out;
}

// Nonparametric backdoor plug-in: sum over strata w of
// [E(Y | x=1, w, z) - E(Y | x=0, w, z)] * P(w | z).
inline EffectEstimate ate_backdoor_plugin(const BinaryDataset& d, std::string_view x,
                                          std::string_view y, const std::set<std::string>& w,
                                          std::optional<std::pair<std::string, int>> z = {}) {
  if (w.count(std::string(x)) || w.count(std::string(y)))
    throw config_error("ate_backdoor_plugin: adjustment set must exclude treatment and outcome");
  if (w.size() > 20) throw config_error("ate_backdoor_plugin: adjustment set too large for strata");
  const BinaryDataset* src = &d;
  BinaryDataset sub;
  if (z) {
    const auto zi = d.index(z->first);
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < d.rows(); ++r)
      if (int(d.at(r, zi)) == z->second) keep.push_back(r);
    sub = d.select_rows(keep);
    src = &sub;
  }
  if (src->rows() == 0) throw data_error("ate_backdoor_plugin: no rows in the conditioning stratum");

  // Variable order: x, y, then w; cell index bit 0 = x, bit 1 = y.
  std::vector<std::size_t> vars{src->index(x), src->index(y)};
  std::vector<std::string> wn(w.begin(), w.end());
  for (const auto& n : wn) vars.push_back(src->index(n));
  const auto counts = src->joint_counts(vars);
  const double total = double(src->rows());

  EffectEstimate e;
  e.treatment = std::string(x);
  e.conditioning = z;
  e.adjustment_set = w;
  e.method = EffectMethod::plugin;
  double var = 0.0;
  for (std::size_t s = 0; s < (std::size_t{1} << wn.size()); ++s) {
    const std::size_t base = s << 2;
    const double n0y0 = counts[base | 0], n1y0 = counts[base | 1];
    const double n0y1 = counts[base | 2], n1y1 = counts[base | 3];
    const double n1 = n1y0 + n1y1, n0 = n0y0 + n0y1, ns = n0 + n1;
    if (ns == 0) continue;
    if (n1 == 0 || n0 == 0) {
      std::string cell;
      for (std::size_t i = 0; i < wn.size(); ++i)
        cell += (i ? "," : "") + wn[i] + "=" + std::to_string((s >> i) & 1U);
      throw data_error("positivity violated: no rows with " + std::string(x) + "=" +
                       (n1 == 0 ? "1" : "0") + " in stratum {" + cell + "}");
    }
    const double pw = ns / total, p1 = n1y1 / n1, p0 = n0y1 / n0;
    e.effect += (p1 - p0) * pw;
    var += pw * pw * (p1 * (1 - p1) / n1 + p0 * (1 - p0) / n0);
  }
  e.std_err = std::sqrt(var);
  return e;
}

struct OlsFit {
  std::vector<std::string> names;  // kept regressors, intercept first
  std::vector<std::string> dropped;
  Eigen::VectorXd coef, std_err, p_value;
  std::size_t rows = 0;

  std::optional<std::size_t> find(std::string_view n) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return i;
    return std::nullopt;
  }
};

namespace detail {

// Least squares with an intercept. Columns that are (numerically) linear
// combinations of earlier kept columns are dropped in order.
inline OlsFit ols(const std::vector<std::string>& names, const std::vector<Eigen::VectorXd>& cols,
                  const Eigen::VectorXd& y) {
  const auto n = y.size();
  std::vector<Eigen::VectorXd> all{Eigen::VectorXd::Ones(n)};
  std::vector<std::string> all_names{"(intercept)"};
  for (std::size_t i = 0; i < cols.size(); ++i) {
    all.push_back(cols[i]);
    all_names.push_back(names[i]);
  }
  OlsFit fit;
  fit.rows = static_cast<std::size_t>(n);
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < all.size(); ++j) {
    const double self = all[j].squaredNorm();
    bool independent = self > 0.0;
    if (independent && !keep.empty()) {
      Eigen::MatrixXd k(n, static_cast<Eigen::Index>(keep.size()));
      for (std::size_t i = 0; i < keep.size(); ++i) k.col(static_cast<Eigen::Index>(i)) = all[keep[i]];
      Eigen::VectorXd b = k.colPivHouseholderQr().solve(all[j]);
      independent = (all[j] - k * b).squaredNorm() > 1e-9 * self;
    }
    if (independent) keep.push_back(j);
    else fit.dropped.push_back(all_names[j]);
  }
  const auto p = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    X.col(i) = all[keep[static_cast<std::size_t>(i)]];
    fit.names.push_back(all_names[keep[static_cast<std::size_t>(i)]]);
  }
  if (n <= p) throw data_error("ols: not enough rows for the number of regressors");
  const Eigen::MatrixXd xtx = X.transpose() * X;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  fit.coef = ldlt.solve(X.transpose() * y);
  const Eigen::VectorXd resid = y - X * fit.coef;
  const double df = double(n - p);
  const double sigma2 = resid.squaredNorm() / df;
  const Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
  fit.std_err.resize(p);
  fit.p_value.resize(p);
  const boost::math::students_t dist(df);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double se = std::sqrt(std::max(0.0, sigma2 * inv(i, i)));
    fit.std_err(i) = se;
    if (se == 0.0) {
      fit.p_value(i) = std::abs(fit.coef(i)) > 0.0 ? 0.0 : 1.0;
    } else {
      const double t = std::abs(fit.coef(i)) / se;
      fit.p_value(i) = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
    }
  }
  return fit;
}

inline Eigen::VectorXd as_vector(const BinaryDataset& d, std::size_t c) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d.rows()));
  for (std::size_t r = 0; r < d.rows(); ++r) v(static_cast<Eigen::Index>(r)) = d.at(r, c) ? 1.0 : 0.0;
  return v;
}

inline void require_varies(const BinaryDataset& d, std::string_view col, const char* what) {
  if (d.rows() == 0) throw data_error(std::string(what) + ": empty data");
  if (d.is_constant(d.index(col)))
    throw data_error(std::string(what) + ": column '" + std::string(col) + "' is constant");
}

}  // namespace detail

// Linear probability model: Y on {x} u w with intercept; the effect is the
// coefficient of x.
inline EffectEstimate ate_regression(const BinaryDataset& d, std::string_view x, std::string_view y,
                                     const std::set<std::string>& w) {
  detail::require_varies(d, x, "ate_regression");
  std::vector<std::string> names{std::string(x)};
  std::vector<Eigen::VectorXd> cols{detail::as_vector(d, d.index(x))};
  for (const auto& v : w) {
    if (v == x || v == y) throw config_error("ate_regression: adjustment set must exclude x and y");
    names.push_back(v);
    cols.push_back(detail::as_vector(d, d.index(v)));
  }
  const auto fit = detail::ols(names, cols, detail::as_vector(d, d.index(y)));
  const auto xi = fit.find(x);
  if (!xi) throw data_error("ate_regression: treatment is collinear with the intercept");
  EffectEstimate e;
  e.treatment = std::string(x);
  e.adjustment_set = w;
  e.effect = fit.coef(static_cast<Eigen::Index>(*xi));
  e.std_err = fit.std_err(static_cast<Eigen::Index>(*xi));
  e.p_value = fit.p_value(static_cast<Eigen::Index>(*xi));
  e.dropped_columns = fit.dropped;
  return e;
}

struct HteEstimate {
  std::string modifier;
  double cate1 = 0.0;  // effect of x when z = 1
  double cate0 = 0.0;  // effect of x when z = 0
  double delta = 0.0;  // interaction coefficient, cate1 - cate0
  double p_value = 1.0;
  std::vector<std::string> dropped_columns;
};

// Y on {X, Z, Z*X} u W u {W*Z}: CATE(z=0) is the X coefficient and the
// interaction coefficient is the change in effect when z = 1.
inline HteEstimate hte_regression(const BinaryDataset& d, std::string_view x, std::string_view y,
                                  std::string_view z, const std::set<std::string>& w) {
  detail::require_varies(d, x, "hte_regression");
  detail::require_varies(d, z, "hte_regression");
  const auto xv = detail::as_vector(d, d.index(x)), zv = detail::as_vector(d, d.index(z));
  const std::string inter = std::string(z) + "*" + std::string(x);
  std::vector<std::string> names{std::string(x), std::string(z), inter};
  std::vector<Eigen::VectorXd> cols{xv, zv, xv.cwiseProduct(zv)};
  for (const auto& v : w) {
    if (v == x || v == y || v == z) continue;
    const auto wv = detail::as_vector(d, d.index(v));
    names.push_back(v);
    cols.push_back(wv);
    names.push_back(v + "*" + std::string(z));
    cols.push_back(wv.cwiseProduct(zv));
  }
  const auto fit = detail::ols(names, cols, detail::as_vector(d, d.index(y)));
  const auto xi = fit.find(x), ii = fit.find(inter);
  if (!xi || !ii) throw data_error("hte_regression: treatment or interaction term is collinear");
  HteEstimate h;
  h.modifier = std::string(z);
  h.cate0 = fit.coef(static_cast<Eigen::Index>(*xi));
  h.delta = fit.coef(static_cast<Eigen::Index>(*ii));
  h.cate1 = h.cate0 + h.delta;
  h.p_value = fit.p_value(static_cast<Eigen::Index>(*ii));
  h.dropped_columns = fit.dropped;
  return h;
}

struct GraphEffect {
  bool present = false;        // (X, G_k) in R
  bool identifiable = true;    // estimation succeeded
  double ate = 0.0;            // 0 when absent or not identifiable
  double p_value = 1.0;
  bool significant = false;
  std::set<std::string> adjustment_set;
  std::string note;
};

struct ModifierRecord {
  std::size_t graph = 0;
  HteEstimate estimate;
  bool significant = false;
};

struct CauseRecord {
  std::string variable;
  double support = 0.0;
  std::vector<GraphEffect> effects;  // one per ensemble graph
  std::vector<ModifierRecord> modifiers;

  std::vector<double> effect_values() const {
    std::vector<double> v;
    for (const auto& e : effects) v.push_back(e.ate);
    return v;
  }
  // Max / min over the multi-set, ignoring zero entries unless all are zero.
  double max_effect() const { return extreme(true); }
  double min_effect() const { return extreme(false); }

 private:
  double extreme(bool want_max) const {
    std::optional<double> best;
    for (const auto& e : effects)
      if (e.ate != 0.0 && (!best || (want_max ? e.ate > *best : e.ate < *best))) best = e.ate;
    return best.value_or(0.0);
  }
};

// Effects of every variable across the ensemble. The adjustment set in graph
// k is the parent set of the variable there; modifiers come from the
// ancestral subgraph of Y and are adjusted for W without the modifier.
inline std::vector<CauseRecord> analyze_causes(const BinaryDataset& d, const EnsembleResult& r,
                                               double alpha = 0.05, bool with_modifiers = true) {
  const auto support = cause_support(r);
  std::vector<CauseRecord> out;
  for (const auto& v : r.variables) {
    CauseRecord rec;
    rec.variable = v;
    rec.support = support.at(v);
    rec.effects.resize(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
      auto& ge = rec.effects[k];
      if (!r.contains(v, k)) continue;
      ge.present = true;
      const auto& g = r.graphs[k];
      ge.adjustment_set = relatives(g, v, RelativeKind::parents);
      try {
        const auto est = ate_regression(d, v, r.outcome, ge.adjustment_set);
        ge.ate = est.effect;
        ge.p_value = est.p_value.value_or(1.0);
        ge.significant = ge.p_value < alpha;
        if (!est.dropped_columns.empty()) ge.note = "collinear regressors dropped";
      } catch (const error& e) {
        ge.identifiable = false;
        ge.note = e.what();
        continue;
      }
      if (!with_modifiers) continue;
      const auto g_anc = ancestral_subgraph(g, r.outcome);
      for (const auto& z : candidate_effect_modifiers(g_anc, v, r.outcome).names) {
        auto w = ge.adjustment_set;
        w.erase(z);
        try {
          ModifierRecord m{k, hte_regression(d, v, r.outcome, z, w), false};
          m.significant = m.estimate.p_value < alpha;
          rec.modifiers.push_back(std::move(m));
        } catch (const error&) {
          // a degenerate modifier contributes no estimate
        }
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

enum class RankMode { risk, preventive };

inline RankMode parse_rank_mode(std::string_view s) {
  if (s == "risk") return RankMode::risk;
  if (s == "preventive") return RankMode::preventive;
  throw config_error("unknown ranking mode '" + std::string(s) + "'");
}

// Support descending, then max effect descending (risk) or min effect
// ascending (preventive), then name. Keeps the first top_n.
inline std::vector<CauseRecord> rank_causes(std::vector<CauseRecord> recs, RankMode mode,
                                            std::size_t top_n = std::numeric_limits<std::size_t>::max()) {
  std::sort(recs.begin(), recs.end(), [mode](const CauseRecord& a, const CauseRecord& b) {
    if (a.support != b.support) return a.support > b.support;
    if (mode == RankMode::risk) {
      if (a.max_effect() != b.max_effect()) return a.max_effect() > b.max_effect();
    } else if (a.min_effect() != b.min_effect()) {
      return a.min_effect() < b.min_effect();
    }
    return a.variable < b.variable;
  });
  if (recs.size() > top_n) recs.resize(top_n);
  return recs;
}

// Order used for plotting the selected causes: by effect alone.
inline std::vector<CauseRecord> display_order(std::vector<CauseRecord> ranked, RankMode mode) {
  std::stable_sort(ranked.begin(), ranked.end(), [mode](const CauseRecord& a, const CauseRecord& b) {
    return mode == RankMode::risk ? a.max_effect() > b.max_effect() : a.min_effect() < b.min_effect();
  });
  return ranked;
}

}  // namespace hetcause
