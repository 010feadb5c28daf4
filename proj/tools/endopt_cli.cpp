// Command-line front end: design synthesis, single runs and seed sweeps.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "endopt/endopt.hpp"

namespace fs = std::filesystem;
using namespace endopt;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool paper_scale = false;
  std::string out = "out";
};

ExperimentConfig resolve_config(const CommonOptions& o) {
  ExperimentConfig c = o.paper_scale ? regression_paper_scale_preset() : regression_preset();
  if (!o.config.empty()) c = load_config(o.config, c);
  if (o.paper_scale) {
    c.scenario.agents = 100;
    c.scenario.sources = 20;
  }
  if (o.seed) c.scenario.seed = *o.seed;
  return c;
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "key = value experiment file");
  cmd->add_option("--seed", o.seed, "scenario seed");
  cmd->add_flag("--paper-scale", o.paper_scale, "N = 100, P = 20");
  cmd->add_option("--out", o.out, "output directory");
}

std::string trace_name(const RunTrace& t, ExperimentMode mode) {
  return to_string(t.algorithm) + "_" + to_string(mode) + "_seed" + std::to_string(t.scenario_seed) + ".csv";
}

int run_design(const CommonOptions& o, const std::string& layout_path, const std::string& mode,
               const std::string& policy) {
  DesignSpec spec{parse_design_mode(mode), parse_edge_policy(policy)};
  std::optional<LayoutStructure> st;
  if (!layout_path.empty()) {
    st = load_structure(layout_path);
  } else {
    const auto sc = generate_scenario(resolve_config(o).scenario);
    st = LayoutStructure{sc.partition, sc.comm, sc.interference};
  }
  const auto layout = synthesize(st->comm, st->interference, st->partition, spec);
  const auto report = validate(layout);
  const auto cost = cost_report(layout);
  fs::create_directories(o.out);
  save_layout((fs::path(o.out) / "layout.txt").string(), layout);
  std::ofstream txt(fs::path(o.out) / "cost.txt");
  txt << "mode " << to_string(spec.mode) << "\nedge_policy " << to_string(spec.edge_policy) << "\n";
  for (const auto& [p, n] : cost.copies_per_component) txt << "copies " << p + 1 << ' ' << n << '\n';
  txt << "total_memory " << cost.total_memory << "\nbroadcast_cost " << cost.per_iteration_broadcast_cost << '\n';
  txt << report.describe();
  std::ofstream csv(fs::path(o.out) / "cost.csv");
  csv << "mode,total_memory,broadcast_cost\n"
      << to_string(spec.mode) << ',' << cost.total_memory << ',' << cost.per_iteration_broadcast_cost << '\n';
  std::cout << "mode " << to_string(spec.mode) << ", memory " << cost.total_memory << ", broadcast cost "
            << cost.per_iteration_broadcast_cost << "\n"
            << report.describe();
  return report.consistent() ? 0 : 1;
}

void apply_run_overrides(ExperimentConfig& c, const std::string& algorithm, const std::string& mode,
                         std::optional<std::size_t> max_iters, std::optional<double> threshold, bool symmetrize) {
  if (!algorithm.empty()) c.run.algorithm = parse_algorithm(algorithm);
  if (!mode.empty()) c.run.mode = parse_experiment_mode(mode);
  if (max_iters) c.run.max_iters = *max_iters;
  if (threshold) c.run.merit_threshold = *threshold;
  if (symmetrize) c.run.symmetrize = true;
}

void print_trace_summary(const RunTrace& t, ExperimentMode mode) {
  std::cout << to_string(t.algorithm) << ' ' << to_string(mode) << ": " << to_string(t.status) << ", iterations "
            << t.iterations << ", to threshold " << t.iterations_to_threshold << ", total cost " << t.total_cost
            << ", memory " << t.memory << '\n';
  if (!t.diagnostic.empty()) std::cout << "  " << t.diagnostic << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimate network design for sparsity-aware distributed optimization"};
  app.require_subcommand(1);

  CommonOptions design_opts, run_opts, sweep_opts;
  std::string layout_path, design_mode = "steiner_undirected", edge_policy = "all_available";
  auto* design = app.add_subcommand("design", "synthesize estimate and design graphs");
  add_common(design, design_opts);
  design->add_option("--layout", layout_path, "layout file with PARTITION, COMM and INTERF sections");
  design->add_option("--design-mode", design_mode, "standard | steiner_undirected | steiner_directed");
  design->add_option("--edge-policy", edge_policy, "all_available | tree_only");

  std::string algorithm, mode;
  std::optional<std::size_t> max_iters;
  std::optional<double> threshold;
  bool symmetrize = false;
  auto* run = app.add_subcommand("run", "run one algorithm on one scenario");
  add_common(run, run_opts);
  run->add_option("--algorithm", algorithm, "push_sum | augdgm | admm");
  run->add_option("--design-mode", mode, "standard | customized");
  run->add_option("--max-iters", max_iters, "iteration cap");
  run->add_option("--merit-threshold", threshold, "stop when the merit drops below this value");
  run->add_flag("--symmetrize", symmetrize, "keep only mutual links for ADMM/AugDGM");

  std::optional<std::size_t> seeds;
  auto* sw = app.add_subcommand("sweep", "both design modes over several seeds");
  add_common(sw, sweep_opts);
  sw->add_option("--algorithm", algorithm, "push_sum | augdgm | admm");
  sw->add_option("--max-iters", max_iters, "iteration cap");
  sw->add_option("--merit-threshold", threshold, "stop when the merit drops below this value");
  sw->add_option("--seeds", seeds, "number of scenarios");
  sw->add_flag("--symmetrize", symmetrize, "keep only mutual links for ADMM/AugDGM");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*design) return run_design(design_opts, layout_path, design_mode, edge_policy);
    if (*run) {
      auto c = resolve_config(run_opts);
      apply_run_overrides(c, algorithm, mode, max_iters, threshold, symmetrize);
      const auto sc = generate_scenario(c.scenario);
      const auto t = run_experiment(sc, c.run);
      fs::create_directories(run_opts.out);
      emit_csv(t, (fs::path(run_opts.out) / trace_name(t, c.run.mode)).string());
      print_trace_summary(t, c.run.mode);
      return 0;
    }
    if (*sw) {
      auto c = resolve_config(sweep_opts);
      apply_run_overrides(c, algorithm, "", max_iters, threshold, symmetrize);
      const auto cells = sweep(c.scenario, c.run, seeds.value_or(c.seeds));
      fs::create_directories(sweep_opts.out);
      for (const auto& cell : cells) {
        emit_csv(cell.trace, (fs::path(sweep_opts.out) / trace_name(cell.trace, cell.mode)).string());
        print_trace_summary(cell.trace, cell.mode);
      }
      std::ofstream summary(fs::path(sweep_opts.out) / "summary.csv");
      write_summary_csv(summary, cells);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
