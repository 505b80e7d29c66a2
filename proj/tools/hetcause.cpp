#include <CLI11.hpp>
#include <iostream>

#include "hetcause/pipeline.hpp"

namespace {

struct Flags {
  std::optional<std::string> config, out, data, log, graphs_dir, effects, sim_dir, outcome_event;
  std::optional<std::uint64_t> seed;
  std::optional<int> tau;
  std::optional<double> keep_fraction, alpha, ess, vote_threshold;
  std::optional<std::size_t> max_cond, bootstrap_runs, seeds, samples_per_node, samples, top;
  std::optional<std::string> learners, topology, nodes, sparsity, mode, rank_mode;
};

void add_shared(CLI::App* c, Flags& f) {
  c->add_option("--config", f.config, "JSON file whose keys mirror the flags (flags win)");
  c->add_option("--seed", f.seed, "Base random seed");
  c->add_option("--out", f.out, "Output directory");
}

void add_inputs(CLI::App* c, Flags& f) {
  c->add_option("--data", f.data, "Binary dataset CSV (must contain column Y)");
  c->add_option("--log", f.log, "Event log CSV with header unit_id,time,event");
  c->add_option("--outcome-event", f.outcome_event, "Outcome event name in the log (default Y)");
  c->add_option("--tau", f.tau, "Repeat-outcome window in time steps (default 30)");
  c->add_option("--keep-fraction", f.keep_fraction, "Fraction of most frequent events kept (default 1)");
}

void add_discovery(CLI::App* c, Flags& f) {
  c->add_option("--learners", f.learners, "Comma list of pc,hc,mmhc,ges,noisy (default all)");
  c->add_option("--alpha", f.alpha, "CI test significance level (default 0.05)");
  c->add_option("--max-cond", f.max_cond, "Largest conditioning set (default 5)");
  c->add_option("--bootstrap-runs", f.bootstrap_runs, "Bootstrap replicates for hc and mmhc (default 20)");
  c->add_option("--ess", f.ess, "BDeu equivalent sample size (default 1.0)");
  c->add_option("--vote-threshold", f.vote_threshold, "Cause support needed for the vote set (default 0.5)");
}

template <class T>
void set_if(const std::optional<T>& v, T& target) {
  if (v) target = *v;
}

hetcause::PipelineConfig build_config(const std::string& command, const Flags& f) {
  using namespace hetcause;
  PipelineConfig c;
  if (f.config) {
    json j;
    try {
      j = read_json_file(*f.config);
    } catch (const data_error& e) {
      throw config_error(e.what());
    }
    apply_config_json(c, j);
  }
  c.command = command;
  set_if(f.out, c.out);
  if (f.seed) c.seed = f.seed;
  if (f.data) c.data = f.data;
  if (f.log) c.log = f.log;
  if (f.graphs_dir) c.graphs_dir = f.graphs_dir;
  if (f.effects) c.effects = f.effects;
  if (f.sim_dir) c.sim_dir = f.sim_dir;
  set_if(f.outcome_event, c.outcome_event);
  set_if(f.tau, c.tau);
  set_if(f.keep_fraction, c.keep_fraction);
  if (f.learners) c.learners = parse_learner_list(*f.learners);
  set_if(f.alpha, c.params.alpha);
  set_if(f.max_cond, c.params.max_cond_size);
  set_if(f.bootstrap_runs, c.params.bootstrap_runs);
  if (f.ess) c.params.ges_score_cfg.ess = *f.ess;
  set_if(f.vote_threshold, c.vote_threshold);
  if (f.topology) c.topologies = detail::split_list<std::string>(*f.topology, detail::identity);
  if (f.nodes) c.nodes = detail::split_list<std::size_t>(*f.nodes, detail::to_size);
  if (f.sparsity) c.sparsities = detail::split_list<double>(*f.sparsity, detail::to_double);
  if (f.mode) c.modes = detail::split_list<std::string>(*f.mode, detail::identity);
  set_if(f.seeds, c.seeds);
  set_if(f.samples_per_node, c.samples_per_node);
  if (f.samples) c.samples = f.samples;
  set_if(f.rank_mode, c.rank_mode);
  set_if(f.top, c.top_n);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble causal discovery and heterogeneous effect analysis for binary data"};
  app.require_subcommand(1);
  Flags f;

  auto* sim = app.add_subcommand("simulate", "Generate random DAGs and synthetic datasets");
  add_shared(sim, f);
  sim->add_option("--topology", f.topology, "Comma list of er,ba");
  sim->add_option("--nodes", f.nodes, "Comma list of node counts (outcome excluded)");
  sim->add_option("--sparsity", f.sparsity, "Comma list of sparsity values");
  sim->add_option("--mode", f.mode, "Comma list of L,LL,BL (logistic, with interactions, bounded linear)");
  sim->add_option("--seeds", f.seeds, "Replicates per grid cell (default 5)");
  sim->add_option("--samples-per-node", f.samples_per_node, "Rows per node (default 1000)");
  sim->add_option("--samples", f.samples, "Fixed number of rows (overrides --samples-per-node)");

  auto* disc = app.add_subcommand("discover", "Run the learner ensemble and compute cause support");
  add_shared(disc, f);
  add_inputs(disc, f);
  add_discovery(disc, f);

  auto* eff = app.add_subcommand("effects", "Estimate total and heterogeneous effects, rank causes");
  add_shared(eff, f);
  add_inputs(eff, f);
  add_discovery(eff, f);
  eff->add_option("--graphs-dir", f.graphs_dir, "Reuse graphs written by discover");
  eff->add_option("--rank-mode", f.rank_mode, "risk, preventive or both (default both)");
  eff->add_option("--top", f.top, "Number of ranked causes to report (default 10)");

  auto* eval = app.add_subcommand("evaluate", "Score the ensemble on simulated cells");
  add_shared(eval, f);
  add_discovery(eval, f);
  eval->add_option("--sim-dir", f.sim_dir, "Output directory of simulate");

  auto* rep = app.add_subcommand("report", "Render ranked-cause and modifier tables and SVG charts");
  add_shared(rep, f);
  rep->add_option("--effects", f.effects, "effects.json written by the effects command");
  rep->add_option("--rank-mode", f.rank_mode, "risk, preventive or both (default both)");
  rep->add_option("--top", f.top, "Number of ranked causes to report (default 10)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const auto command = app.get_subcommands().front()->get_name();
  hetcause::PipelineConfig cfg;
  try {
    cfg = build_config(command, f);
  } catch (const hetcause::config_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  }
  return hetcause::run_pipeline(cfg);
}
