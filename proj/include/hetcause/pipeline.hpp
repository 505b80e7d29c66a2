#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hetcause/effects.hpp"
#include "hetcause/ensemble.hpp"
#include "hetcause/evaluation.hpp"
#include "hetcause/event_model.hpp"
#include "hetcause/io.hpp"
#include "hetcause/report.hpp"
#include "hetcause/synthgen.hpp"

namespace hetcause {

inline constexpr const char* kVersion = "0.1.0";

struct PipelineConfig {
  std::string command;
  std::string out = "out";
  std::optional<std::uint64_t> seed;

  // inputs
  std::optional<std::string> data, log, graphs_dir, effects, sim_dir;
  std::string outcome_event = "Y";
  int tau = 30;
  double keep_fraction = 1.0;

  // discovery
  std::vector<LearnerKind> learners{LearnerKind::pc, LearnerKind::hc, LearnerKind::mmhc,
                                    LearnerKind::ges, LearnerKind::noisy};
  LearnerParams params;
  double vote_threshold = 0.5;

  // simulation grid
  std::vector<std::string> topologies{"er"};
  std::vector<std::size_t> nodes{10};
  std::vector<double> sparsities{0.8};
  std::vector<std::string> modes{"L"};
  std::size_t seeds = 5;
  std::size_t samples_per_node = 1000;
  std::optional<std::size_t> samples;

  // effects / report
  std::string rank_mode = "both";
  std::size_t top_n = 10;
};

namespace detail {

template <class T>
std::vector<T> split_list(const std::string& s, T (*conv)(const std::string&)) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(conv(tok));
  if (out.empty()) throw config_error("empty list '" + s + "'");
  return out;
}

inline std::size_t to_size(const std::string& s) {
  try {
    std::size_t pos = 0;
    auto v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw config_error("expected a non-negative integer, got '" + s + "'");
  }
}

inline double to_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    auto v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error("expected a number, got '" + s + "'");
  }
}

inline std::string identity(const std::string& s) { return s; }

// Stable 64-bit FNV-1a; std::hash is not portable across library versions.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

inline std::string sparsity_tag(double sp) {
  std::ostringstream ss;
  ss << sp;
  return ss.str();
}

}  // namespace detail

// JSON keys are the flag names without the leading dashes.
inline void apply_config_json(PipelineConfig& c, const json& j) {
  if (!j.is_object()) throw config_error("config file must hold a JSON object");
  auto str = [&](const char* k) { return j.at(k).is_string() ? j.at(k).get<std::string>() : j.at(k).dump(); };
  // List settings may be a comma string or a JSON array.
  auto list = [&](const char* k) {
    const auto& v = j.at(k);
    if (!v.is_array()) return str(k);
    std::string joined;
    for (const auto& e : v) joined += (joined.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
    return joined;
  };
  try {
    for (const auto& [key, val] : j.items()) {
      const auto k = key.c_str();
      if (key == "out") c.out = str(k);
      else if (key == "seed") c.seed = val.get<std::uint64_t>();
      else if (key == "data") c.data = str(k);
      else if (key == "log") c.log = str(k);
      else if (key == "graphs-dir") c.graphs_dir = str(k);
      else if (key == "effects") c.effects = str(k);
      else if (key == "sim-dir") c.sim_dir = str(k);
      else if (key == "outcome-event") c.outcome_event = str(k);
      else if (key == "tau") c.tau = val.get<int>();
      else if (key == "keep-fraction") c.keep_fraction = val.get<double>();
      else if (key == "learners") c.learners = parse_learner_list(list(k));
      else if (key == "alpha") c.params.alpha = val.get<double>();
      else if (key == "max-cond") c.params.max_cond_size = val.get<std::size_t>();
      else if (key == "bootstrap-runs") c.params.bootstrap_runs = val.get<std::size_t>();
      else if (key == "ess") c.params.ges_score_cfg.ess = val.get<double>();
      else if (key == "vote-threshold") c.vote_threshold = val.get<double>();
      else if (key == "topology") c.topologies = detail::split_list<std::string>(list(k), detail::identity);
      else if (key == "nodes") c.nodes = detail::split_list<std::size_t>(list(k), detail::to_size);
      else if (key == "sparsity") c.sparsities = detail::split_list<double>(list(k), detail::to_double);
      else if (key == "mode") c.modes = detail::split_list<std::string>(list(k), detail::identity);
      else if (key == "seeds") c.seeds = val.get<std::size_t>();
      else if (key == "samples-per-node") c.samples_per_node = val.get<std::size_t>();
      else if (key == "samples") c.samples = val.get<std::size_t>();
      else if (key == "rank-mode") c.rank_mode = str(k);
      else if (key == "top") c.top_n = val.get<std::size_t>();
      else throw config_error("unknown config key '" + key + "'");
    }
  } catch (const json::exception& ex) {
    throw config_error(std::string("config file: ") + ex.what());
  }
}

inline json config_to_json(const PipelineConfig& c) {
  json j;
  j["command"] = c.command;
  j["out"] = c.out;
  if (c.seed) j["seed"] = *c.seed;
  if (c.data) j["data"] = *c.data;
  if (c.log) j["log"] = *c.log;
  if (c.graphs_dir) j["graphs-dir"] = *c.graphs_dir;
  if (c.effects) j["effects"] = *c.effects;
  if (c.sim_dir) j["sim-dir"] = *c.sim_dir;
  j["outcome-event"] = c.outcome_event;
  j["tau"] = c.tau;
  j["keep-fraction"] = c.keep_fraction;
  std::vector<std::string> l;
  for (auto k : c.learners) l.push_back(to_string(k));
  j["learners"] = l;
  j["alpha"] = c.params.alpha;
  j["max-cond"] = c.params.max_cond_size;
  j["bootstrap-runs"] = c.params.bootstrap_runs;
  j["ess"] = c.params.ges_score_cfg.ess;
  j["vote-threshold"] = c.vote_threshold;
  j["topology"] = c.topologies;
  j["nodes"] = c.nodes;
  j["sparsity"] = c.sparsities;
  j["mode"] = c.modes;
  j["seeds"] = c.seeds;
  j["samples-per-node"] = c.samples_per_node;
  if (c.samples) j["samples"] = *c.samples;
  j["rank-mode"] = c.rank_mode;
  j["top"] = c.top_n;
  return j;
}

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg, std::ostream& log = std::cerr) : cfg_(std::move(cfg)), log_(log) {}

  void run() {
    cfg_.params.validate();
    if (!(cfg_.vote_threshold >= 0.0 && cfg_.vote_threshold < 1.0))
      throw config_error("vote threshold must lie in [0, 1)");
    std::filesystem::create_directories(cfg_.out);
    if (cfg_.command == "simulate") simulate();
    else if (cfg_.command == "discover") discover();
    else if (cfg_.command == "effects") effects();
    else if (cfg_.command == "evaluate") evaluate();
    else if (cfg_.command == "report") report();
    else throw config_error("unknown command '" + cfg_.command + "'");
    write_manifest();
  }

 private:
  std::filesystem::path out_path(const std::string& rel) {
    outputs_.push_back(rel);
    auto p = std::filesystem::path(cfg_.out) / rel;
    std::filesystem::create_directories(p.parent_path());
    return p;
  }

  std::ofstream open(const std::string& rel) {
    std::ofstream f(out_path(rel));
    if (!f) throw error("cannot write " + rel);
    return f;
  }

  std::uint64_t seed() const { return cfg_.seed.value_or(0); }

  LearnerParams params() const {
    auto p = cfg_.params;
    p.seed = seed();
    return p;
  }

  // Data from --data, or aggregated from --log; the event log is returned
  // too so orientation support can be used.
  std::pair<BinaryDataset, std::optional<EventLog>> load_data() {
    if (cfg_.log) {
      auto log = read_event_log_csv(*cfg_.log, cfg_.outcome_event);
      auto d = aggregate_bag_of_events(log, cfg_.tau);
      if (cfg_.keep_fraction < 1.0) {
        std::set<std::string> protect;
        const std::set<std::string> vocab(log.event_vocabulary.begin(), log.event_vocabulary.end());
        for (const auto& n : d.names())
          if (!vocab.count(n)) protect.insert(n);
        d = apply_frequency_vocabulary(d, cfg_.keep_fraction, protect);
      }
      auto f = open("data.csv");
      write_dataset_csv(f, d);
      return {std::move(d), std::move(log)};
    }
    if (!cfg_.data) throw config_error(cfg_.command + ": --data or --log is required");
    return {read_dataset_csv(*cfg_.data), std::nullopt};
  }

  EnsembleResult discover_on(const BinaryDataset& d, const EventLog* log) {
    d.require_outcome();
    EnsembleOptions opt{cfg_.learners, params()};
    return run_ensemble(d, log, StructuralConstraints::outcome_sink(d.names()), opt);
  }

  void write_ensemble(const EnsembleResult& r, const std::string& prefix = "") {
    for (std::size_t k = 0; k < r.size(); ++k) {
      auto f = open(prefix + "graph_" + std::to_string(k) + "_" + r.algorithm_names[k] + ".edges");
      write_edge_list(f, r.graphs[k]);
    }
    auto j = ensemble_to_json(r);
    j["majority_vote"] = majority_vote(r, cfg_.vote_threshold);
    write_json_file(out_path(prefix + "ensemble.json").string(), j);
    auto f = open(prefix + "cause_support.csv");
    f << "variable,cause_support\n";
    for (const auto& [v, s] : cause_support(r)) f << v << ',' << detail::fmt(s) << '\n';
  }

  void simulate() {
    if (!cfg_.seed) throw config_error("simulate: --seed is required");
    auto idx = open("simulations.csv");
    idx << "dir,topology,n,sparsity,mode,replicate,dag_seed,data_seed,samples\n";
    for (const auto& topo_s : cfg_.topologies)
      for (auto n : cfg_.nodes)
        for (auto sp : cfg_.sparsities)
          for (std::size_t i = 0; i < cfg_.seeds; ++i) {
            const auto topo = parse_topology(topo_s);
            const auto cell = topo_s + "/" + std::to_string(n) + "/" + detail::sparsity_tag(sp);
            const auto dag_seed = splitmix64(*cfg_.seed ^ splitmix64(detail::fnv1a(cell) + i));
            const auto dag = random_dag({topo, n, sp, dag_seed});
            for (const auto& mode_s : cfg_.modes) {
              const auto mode = parse_gen_mode(mode_s);
              const auto data_seed = splitmix64(dag_seed + detail::fnv1a(to_string(mode)));
              const auto rows = cfg_.samples.value_or(n * cfg_.samples_per_node);
              const auto s = sample_parametric(dag, mode, rows, data_seed);
              const auto dir = "sim_" + topo_s + "_n" + std::to_string(n) + "_sp" + detail::sparsity_tag(sp) +
                               "_" + to_string(mode) + "_s" + std::to_string(i) + "/";
              {
                auto f = open(dir + "dag.edges");
                write_edge_list(f, dag);
              }
              {
                auto f = open(dir + "data.csv");
                write_dataset_csv(f, s.data);
              }
              write_json_file(out_path(dir + "scm.json").string(), scm_to_json(s.scm));
              json meta{{"topology", topo_s}, {"n", n}, {"sparsity", sp}, {"mode", to_string(mode)},
                        {"replicate", i}, {"dag_seed", dag_seed}, {"data_seed", data_seed},
                        {"samples", rows}, {"er_probability", topo == Topology::er
                                                                  ? json(DagGenConfig{topo, n, sp, 0}.er_probability())
                                                                  : json(nullptr)}};
              write_json_file(out_path(dir + "meta.json").string(), meta);
              idx << dir.substr(0, dir.size() - 1) << ',' << topo_s << ',' << n << ','
                  << detail::sparsity_tag(sp) << ',' << to_string(mode) << ',' << i << ',' << dag_seed
                  << ',' << data_seed << ',' << rows << '\n';
            }
          }
  }

  void discover() {
    auto [d, log] = load_data();
    const auto r = discover_on(d, log ? &*log : nullptr);
    write_ensemble(r);
  }

  EnsembleResult load_ensemble(const BinaryDataset& d, const std::string& dir) {
    d.require_outcome();
    const auto j = read_json_file((std::filesystem::path(dir) / "ensemble.json").string());
    EnsembleResult r;
    for (const auto& n : d.names())
      if (n != kOutcomeColumn) r.variables.push_back(n);
    try {
      r.algorithm_names = j.at("algorithms").get<std::vector<std::string>>();
    } catch (const json::exception& ex) {
      throw data_error(std::string("ensemble.json: ") + ex.what());
    }
    for (std::size_t k = 0; k < r.algorithm_names.size(); ++k) {
      const auto p = std::filesystem::path(dir) / ("graph_" + std::to_string(k) + "_" + r.algorithm_names[k] + ".edges");
      auto g = read_edge_list(p.string());
      for (const auto& n : d.names())
        if (!g.find(n)) throw data_error("graph " + p.string() + " lacks column " + n);
      r.graphs.push_back(std::move(g));
    }
    rebuild_cause_tuples(r);
    return r;
  }

  void effects() {
    auto [d, log] = load_data();
    const auto r = cfg_.graphs_dir ? load_ensemble(d, *cfg_.graphs_dir) : discover_on(d, log ? &*log : nullptr);
    if (!cfg_.graphs_dir) write_ensemble(r);
    const auto recs = analyze_causes(d, r, cfg_.params.alpha);
    write_json_file(out_path("effects.json").string(), effects_to_json(recs));
    emit(recs);
  }

  void emit(const std::vector<CauseRecord>& recs) {
    std::vector<RankMode> modes;
    if (cfg_.rank_mode == "both") modes = {RankMode::risk, RankMode::preventive};
    else modes = {parse_rank_mode(cfg_.rank_mode)};
    for (auto m : modes) {
      auto files = emit_report(recs, m, cfg_.top_n, cfg_.out);
      for (const auto& p : files.paths)
        outputs_.push_back(std::filesystem::relative(p, cfg_.out).generic_string());
      if (files.empty) log_ << "warning: no cause records; report files are empty\n";
    }
  }

  void report() {
    if (!cfg_.effects) throw config_error("report: --effects is required");
    emit(effects_from_json(read_json_file(*cfg_.effects)));
  }

  void evaluate() {
    if (!cfg_.sim_dir) throw config_error("evaluate: --sim-dir is required");
    std::vector<std::filesystem::path> cells;
    for (const auto& e : std::filesystem::directory_iterator(*cfg_.sim_dir))
      if (e.is_directory() && std::filesystem::exists(e.path() / "meta.json")) cells.push_back(e.path());
    std::sort(cells.begin(), cells.end());
    if (cells.empty()) throw data_error("evaluate: no simulation cells under " + *cfg_.sim_dir);

    ResultTable table;
    auto runs = open("per_run.csv");
    runs << "cell,algorithm,precision,recall,f1,tp_support,fp_support,tp_sig_support,fp_sig_support\n";
    for (const auto& cell : cells) {
      const auto meta = read_json_file((cell / "meta.json").string());
      const auto d = read_dataset_csv((cell / "data.csv").string());
      const auto truth_graph = read_edge_list((cell / "dag.edges").string());
      const auto r = discover_on(d, nullptr);
      const auto recs = analyze_causes(d, r, 0.05, false);
      const auto sm = support_metrics(r, truth_graph, &recs);
      const auto truth = relatives(truth_graph, kOutcomeColumn, RelativeKind::ancestors);
      ResultKey key;
      try {
        key = {meta.at("topology").get<std::string>(), meta.at("n").get<std::size_t>(),
               meta.at("sparsity").get<double>(), meta.at("mode").get<std::string>(), "", ""};
      } catch (const json::exception& ex) {
        throw data_error((cell / "meta.json").string() + ": " + ex.what());
      }
      auto record = [&](const std::string& alg, const PRF1& m) {
        const std::pair<const char*, double> metrics[] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
        for (auto [name, v] : metrics) {
          key.algorithm = alg;
          key.metric = name;
          table[key].add(v);
        }
        runs << cell.filename().string() << ',' << alg << ',' << detail::fmt(m.precision) << ','
             << detail::fmt(m.recall) << ',' << detail::fmt(m.f1);
      };
      for (std::size_t k = 0; k < r.size(); ++k) {
        record(r.algorithm_names[k], cause_prf1(graph_causes(r, k), truth));
        runs << ",,,,\n";
      }
      record("ensemble", cause_prf1(majority_vote(r, cfg_.vote_threshold), truth));
      runs << ',' << detail::fmt(sm.tp_support) << ',' << detail::fmt(sm.fp_support) << ','
           << detail::fmt(*sm.tp_sig_support) << ',' << detail::fmt(*sm.fp_sig_support) << '\n';
      key.algorithm = "ensemble";
      const std::pair<const char*, double> support[] = {{"tp_support", sm.tp_support},
                                                        {"fp_support", sm.fp_support},
                                                        {"tp_sig_support", *sm.tp_sig_support},
                                                        {"fp_sig_support", *sm.fp_sig_support}};
      for (auto [name, v] : support) {
        key.metric = name;
        table[key].add(v);
      }
    }
    auto f = open("results.csv");
    write_results_csv(f, table);
  }

  void write_manifest() {
    std::sort(outputs_.begin(), outputs_.end());
    outputs_.erase(std::unique(outputs_.begin(), outputs_.end()), outputs_.end());
    json m;
    m["tool"] = "hetcause";
    m["version"] = kVersion;
    m["config"] = config_to_json(cfg_);
    m["outputs"] = outputs_;
    write_json_file((std::filesystem::path(cfg_.out) / "manifest.json").string(), m);
  }

  PipelineConfig cfg_;
  std::ostream& log_;
  std::vector<std::string> outputs_;
};

// Runs one command and maps failures to exit codes: 2 configuration,
// 3 data, 4 anything else.
inline int run_pipeline(const PipelineConfig& cfg, std::ostream& err = std::cerr) {
  try {
    Pipeline(cfg, err).run();
    return 0;
  } catch (const config_error& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const data_error& e) {
    err << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 4;
  }
}

}  // namespace hetcause
