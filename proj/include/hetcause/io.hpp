#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hetcause/effects.hpp"
#include "hetcause/ensemble.hpp"
#include "hetcause/synthgen.hpp"

namespace hetcause {

using json = nlohmann::ordered_json;

inline json scm_to_json(const DiscreteSCM& scm) {
  const auto& g = scm.dag;
  json j;
  j["nodes"] = json::array();
  for (std::size_t v = 0; v < g.size(); ++v) j["nodes"].push_back(g.name(v));
  j["edges"] = json::array();
  for (auto [a, b] : g.directed_edges()) j["edges"].push_back({g.name(a), g.name(b)});
  j["mechanisms"] = json::object();
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto& m = scm.nodes[v];
    json e;
    e["mode"] = to_string(m.mode);
    e["parents"] = json::array();
    for (auto p : m.parents) e["parents"].push_back(g.name(p));
    if (m.mode == GenMode::cpt) {
      e["cpt"] = m.cpt;
    } else {
      e["bias"] = m.bias;
      e["weights"] = m.weights;
      if (m.mode == GenMode::logistic_interaction) e["interactions"] = m.interactions;
    }
    j["mechanisms"][g.name(v)] = std::move(e);
  }
  return j;
}

inline DiscreteSCM scm_from_json(const json& j) {
  try {
    MixedGraph g(j.at("nodes").get<std::vector<std::string>>());
    for (const auto& e : j.at("edges")) g.add_directed(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    DiscreteSCM scm{g, std::vector<NodeMechanism>(g.size())};
    for (std::size_t v = 0; v < g.size(); ++v) {
      const auto& e = j.at("mechanisms").at(g.name(v));
      auto& m = scm.nodes[v];
      const auto mode = e.at("mode").get<std::string>();
      m.mode = mode == "CPT" ? GenMode::cpt : parse_gen_mode(mode);
      for (const auto& p : e.at("parents")) m.parents.push_back(g.index(p.get<std::string>()));
      if (m.parents != g.parents(v)) throw data_error("scm json: parent list of " + g.name(v) + " disagrees with edges");
      if (m.mode == GenMode::cpt) {
        m.cpt = e.at("cpt").get<std::vector<double>>();
        if (m.cpt.size() != (std::size_t{1} << m.parents.size()))
          throw data_error("scm json: CPT size mismatch for " + g.name(v));
      } else {
        m.bias = e.at("bias").get<double>();
        m.weights = e.at("weights").get<std::vector<double>>();
        if (e.contains("interactions")) m.interactions = e.at("interactions").get<std::vector<double>>();
      }
    }
    return scm;
  } catch (const json::exception& ex) {
    throw data_error(std::string("scm json: ") + ex.what());
  }
}

inline json ensemble_to_json(const EnsembleResult& r) {
  json j;
  j["outcome"] = r.outcome;
  j["algorithms"] = r.algorithm_names;
  const auto sc = cause_support(r);
  json vars = json::object();
  for (const auto& v : r.variables) {
    json e;
    e["cause_support"] = sc.at(v);
    std::vector<bool> presence;
    for (std::size_t k = 0; k < r.size(); ++k) presence.push_back(r.contains(v, k));
    e["per_graph_presence"] = presence;
    vars[v] = std::move(e);
  }
  j["variables"] = std::move(vars);
  return j;
}

inline json effects_to_json(const std::vector<CauseRecord>& recs) {
  json out = json::array();
  for (const auto& rec : recs) {
    json c;
    c["variable"] = rec.variable;
    c["support"] = rec.support;
    c["effects"] = json::array();
    for (std::size_t k = 0; k < rec.effects.size(); ++k) {
      const auto& e = rec.effects[k];
      json x;
      x["graph"] = k;
      x["present"] = e.present;
      x["identifiable"] = e.identifiable;
      x["ate"] = e.ate;
      x["p"] = e.p_value;
      x["significant"] = e.significant;
      x["adjustment_set"] = e.adjustment_set;
      if (!e.note.empty()) x["note"] = e.note;
      c["effects"].push_back(std::move(x));
    }
    c["modifiers"] = json::array();
    for (const auto& m : rec.modifiers) {
      json x;
      x["graph"] = m.graph;
      x["name"] = m.estimate.modifier;
      x["cate1"] = m.estimate.cate1;
      x["cate0"] = m.estimate.cate0;
      x["delta"] = m.estimate.delta;
      x["p"] = m.estimate.p_value;
      x["significant"] = m.significant;
      c["modifiers"].push_back(std::move(x));
    }
    out.push_back(std::move(c));
  }
  return out;
}

inline std::vector<CauseRecord> effects_from_json(const json& j) {
  std::vector<CauseRecord> out;
  try {
    for (const auto& c : j) {
      CauseRecord rec;
      rec.variable = c.at("variable").get<std::string>();
      rec.support = c.at("support").get<double>();
      for (const auto& x : c.at("effects")) {
        GraphEffect e;
        e.present = x.at("present").get<bool>();
        e.identifiable = x.at("identifiable").get<bool>();
        e.ate = x.at("ate").get<double>();
        e.p_value = x.at("p").get<double>();
        e.significant = x.at("significant").get<bool>();
        e.adjustment_set = x.at("adjustment_set").get<std::set<std::string>>();
        if (x.contains("note")) e.note = x.at("note").get<std::string>();
        rec.effects.push_back(std::move(e));
      }
      for (const auto& x : c.at("modifiers")) {
        ModifierRecord m;
        m.graph = x.at("graph").get<std::size_t>();
        m.estimate.modifier = x.at("name").get<std::string>();
        m.estimate.cate1 = x.at("cate1").get<double>();
        m.estimate.cate0 = x.at("cate0").get<double>();
        m.estimate.delta = x.at("delta").get<double>();
        m.estimate.p_value = x.at("p").get<double>();
        m.significant = x.at("significant").get<bool>();
        rec.modifiers.push_back(std::move(m));
      }
      out.push_back(std::move(rec));
    }
  } catch (const json::exception& ex) {
    throw data_error(std::string("effects json: ") + ex.what());
  }
  return out;
}

inline json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw data_error("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& ex) {
    throw data_error("invalid JSON in " + path + ": " + ex.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw error("cannot write " + path);
  f << j.dump(2) << '\n';
}

}  // namespace hetcause
