#pragma once

// Experiment orchestration: layout synthesis per design mode, a stepper run to
// a merit threshold, broadcast-cost accounting and CSV traces.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "endopt/algorithms/abc.hpp"
#include "endopt/algorithms/admm.hpp"
#include "endopt/algorithms/merit.hpp"
#include "endopt/algorithms/push_sum.hpp"
#include "endopt/design.hpp"
#include "endopt/harness/rng.hpp"
#include "endopt/harness/scenario.hpp"

namespace endopt {

enum class Algorithm { push_sum, augdgm, admm };
enum class ExperimentMode { standard, customized };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::push_sum:
      return "push_sum";
    case Algorithm::augdgm:
      return "augdgm";
    case Algorithm::admm:
      return "admm";
  }
  return "unknown";
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "push_sum" || s == "push-sum") return Algorithm::push_sum;
  if (s == "augdgm") return Algorithm::augdgm;
  if (s == "admm") return Algorithm::admm;
  throw std::invalid_argument("unknown algorithm: " + s);
}

inline std::string to_string(ExperimentMode m) { return m == ExperimentMode::standard ? "standard" : "customized"; }

inline ExperimentMode parse_experiment_mode(const std::string& s) {
  if (s == "standard") return ExperimentMode::standard;
  if (s == "customized" || s == "custom") return ExperimentMode::customized;
  throw std::invalid_argument("unknown design mode: " + s);
}

struct RunSettings {
  Algorithm algorithm = Algorithm::push_sum;
  ExperimentMode mode = ExperimentMode::standard;
  std::size_t max_iters = 20000;
  double merit_threshold = 1e-2;
  bool symmetrize = false;          // intersect G_C with its reverse for ADMM/AugDGM
  double admm_alpha = 0.5;
  double augdgm_gamma_scale = 0.9;  // gamma = scale / L
  double step_exponent = 0.51;      // push-sum gamma^k = k^{-exponent}
  std::size_t record_every = 1;     // trace thinning; first and last rows always kept
  double divergence_bound = 1e6;
  double gradient_clip = 0.0;       // push-sum: cap on each agent's subgradient norm, 0 = off
};

struct TraceRow {
  std::size_t k = 0;
  double merit = 0.0;
  double consensus_residual = 0.0;
  double cum_cost = 0.0;
};

enum class RunStatus { converged, max_iters, diverged };

inline std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::converged:
      return "converged";
    case RunStatus::max_iters:
      return "max_iters";
    case RunStatus::diverged:
      return "diverged";
  }
  return "unknown";
}

struct RunTrace {
  std::vector<TraceRow> rows;
  Algorithm algorithm = Algorithm::push_sum;
  RunStatus status = RunStatus::max_iters;
  long long iterations_to_threshold = -1;  // -1 when never reached
  std::size_t iterations = 0;
  double total_cost = 0.0;
  double per_iteration_cost = 0.0;
  std::size_t memory = 0;
  bool symmetrized = false;
  std::uint64_t scenario_seed = 0;
  std::string diagnostic;
};

// Layout for the requested mode. ADMM and AugDGM need undirected
// communication; with `symmetrize` only mutual links are kept.
inline EndLayout experiment_layout(const Scenario& sc, Algorithm alg, ExperimentMode mode, bool symmetrize) {
  DirectedGraph comm = sc.comm;
  if (alg != Algorithm::push_sum) {
    if (!comm.is_symmetric()) {
      if (!symmetrize) {
        throw std::invalid_argument(to_string(alg) +
                                    " needs an undirected communication graph; enable symmetrization");
      }
      comm = symmetric_part(comm);
    }
    if (!is_connected_undirected(comm)) {
      throw std::invalid_argument("symmetrized communication graph is not connected");
    }
  }
  if (mode == ExperimentMode::standard) return standard_design(comm, sc.interference, sc.partition);
  if (alg == Algorithm::push_sum) return steiner_design_directed(comm, sc.interference, sc.partition);
  return steiner_design_undirected(comm, sc.interference, sc.partition);
}

inline std::size_t rounds_per_iteration(Algorithm a) { return a == Algorithm::augdgm ? 2 : 1; }

// Same cost with every local subgradient rescaled to norm at most `bound`.
inline SeparableCost clip_subgradients(const SeparableCost& cost, double bound) {
  if (!(bound > 0.0)) throw std::invalid_argument("gradient clip bound must be positive");
  return SeparableCost(cost.partition(), cost.interference(),
                       [cost](Vertex i, const Eigen::VectorXd& u) { return cost.value(i, u); },
                       [cost, bound](Vertex i, const Eigen::VectorXd& u) {
                         Eigen::VectorXd g = cost.subgradient(i, u);
                         const double n = g.norm();
                         if (n > bound) g *= bound / n;
                         return g;
                       });
}

inline RunTrace run_experiment(const Scenario& sc, const RunSettings& rs) {
  auto layout = share(experiment_layout(sc, rs.algorithm, rs.mode, rs.symmetrize));
  require_consistent(*layout);
  const auto cost = sc.cost();
  const auto ref = centralized_reference(cost);
  const auto ctx = make_merit_context(layout, cost, ref);
  const auto report = cost_report(*layout, rounds_per_iteration(rs.algorithm));

  RunTrace trace;
  trace.algorithm = rs.algorithm;
  trace.memory = report.total_memory;
  trace.per_iteration_cost = report.per_iteration_broadcast_cost;
  trace.symmetrized = rs.algorithm != Algorithm::push_sum && !sc.comm.is_symmetric();
  trace.scenario_seed = sc.used_seed;

  const std::size_t every = rs.record_every == 0 ? 1 : rs.record_every;
  double cum = 0.0;
  auto finish = [&](std::size_t k, const StackedVector& y, double v, bool stop) {
    if (!std::isfinite(y.values().norm()) || y.values().norm() > rs.divergence_bound) {
      trace.status = RunStatus::diverged;
      trace.diagnostic = "iterate norm exceeded " + detail::format_double(rs.divergence_bound) + " at k = " +
                         std::to_string(k) + "; subgradients may be unbounded along the run";
      return true;
    }
    if (v <= rs.merit_threshold) {
      trace.status = RunStatus::converged;
      trace.iterations_to_threshold = static_cast<long long>(k);
      return true;
    }
    return stop;
  };

  auto drive = [&](auto& state, auto&& current, auto&& step) {
    const double v0 = merit_V(current(state), ctx);
    trace.rows.push_back({0, v0, consensus_residual(current(state)), 0.0});
    if (finish(0, current(state), v0, rs.max_iters == 0)) return;
    for (std::size_t k = 1; k <= rs.max_iters; ++k) {
      step(state, k - 1);
      cum += report.per_iteration_broadcast_cost;
      const auto& y = current(state);
      const bool last = k == rs.max_iters;
      const double vk = merit_V(y, ctx);
      const bool done = finish(k, y, vk, last);
      if (done || k % every == 0) trace.rows.push_back({k, vk, consensus_residual(y), cum});
      if (done) {
        trace.iterations = k;
        return;
      }
    }
  };

  switch (rs.algorithm) {
    case Algorithm::push_sum: {
      std::vector<DirectedGraph> mixing;
      for (const auto& g : layout->designs()) mixing.push_back(g.with_self_loops());
      const auto w = column_stochastic_operator(layout, mixing);
      const auto oracle = rs.gradient_clip > 0.0 ? clip_subgradients(cost, rs.gradient_clip) : cost;
      auto state = push_sum_init(StackedVector(layout));
      drive(
          state, [](const PushSumState& s) -> const StackedVector& { return s.y; },
          [&](PushSumState& s, std::size_t k) {
            push_sum_step(s, w, oracle, diminishing_step(k, rs.step_exponent));
          });
      break;
    }
    case Algorithm::augdgm: {
      const auto l = cost.smoothness();
      if (!l || !(*l > 0.0)) throw std::invalid_argument("AugDGM needs a differentiable cost with a smoothness constant");
      const double gamma = rs.augdgm_gamma_scale / *l;
      if (!(rs.augdgm_gamma_scale > 0.0 && rs.augdgm_gamma_scale < 1.0)) {
        trace.diagnostic = "warning: gamma outside (0, 1/L), convergence guarantee void";
      }
      const auto w = metropolis_operator(layout);
      auto state = augdgm_init(w, cost);
      drive(
          state, [](const AugDgmState& s) -> const StackedVector& { return s.y; },
          [&](AugDgmState& s, std::size_t) { augdgm_step(s, w, cost, gamma); });
      break;
    }
    case Algorithm::admm: {
      auto state = admm_init(layout);
      const AdmmParams params{rs.admm_alpha, 1.0};
      drive(
          state, [](const AdmmState& s) -> const StackedVector& { return s.estimates; },
          [&](AdmmState& s, std::size_t) { admm_step(s, cost, params); });
      break;
    }
  }
  trace.total_cost = cum;
  return trace;
}

// k,merit,consensus_residual,cum_cost rows, then '#' summary lines.
inline void write_csv(std::ostream& out, const RunTrace& t) {
  out << "k,merit,consensus_residual,cum_cost\n";
  for (const auto& r : t.rows) {
    out << r.k << ',' << detail::format_double(r.merit) << ',' << detail::format_double(r.consensus_residual) << ','
        << detail::format_double(r.cum_cost) << '\n';
  }
  if (t.rows.empty()) return;
  out << "# generator " << Rng::kGeneratorId << '\n';
  out << "# scenario_seed " << t.scenario_seed << '\n';
  out << "# algorithm " << to_string(t.algorithm) << '\n';
  out << "# symmetrized " << (t.symmetrized ? 1 : 0) << '\n';
  out << "# status " << to_string(t.status) << '\n';
  out << "# iterations " << t.iterations << '\n';
  out << "# iterations_to_threshold " << t.iterations_to_threshold << '\n';
  out << "# total_cost " << detail::format_double(t.total_cost) << '\n';
  out << "# per_iteration_cost " << detail::format_double(t.per_iteration_cost) << '\n';
  out << "# memory " << t.memory << '\n';
  if (!t.diagnostic.empty()) out << "# diagnostic " << t.diagnostic << '\n';
}

inline void emit_csv(const RunTrace& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace to " + path);
  write_csv(out, t);
  if (!out) throw std::runtime_error("error while writing trace to " + path);
}

struct SweepCell {
  ScenarioConfig scenario;
  std::uint64_t used_seed = 0;
  ExperimentMode mode = ExperimentMode::standard;
  RunTrace trace;
};

// Both design modes for every seed in [first_seed, first_seed + seeds).
inline std::vector<SweepCell> sweep(const ScenarioConfig& base, const RunSettings& rs, std::size_t seeds) {
  std::vector<SweepCell> cells;
  for (std::size_t s = 0; s < seeds; ++s) {
    auto cfg = base;
    cfg.seed = base.seed + s * base.max_draws;  // disjoint draw ranges
    const auto sc = generate_scenario(cfg);
    for (auto mode : {ExperimentMode::standard, ExperimentMode::customized}) {
      auto r = rs;
      r.mode = mode;
      cells.push_back({cfg, sc.used_seed, mode, run_experiment(sc, r)});
    }
  }
  return cells;
}

inline void write_summary_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "N,P,r_s,r_c_min,seed,algorithm,mode,status,iters_to_threshold,total_cost,memory\n";
  for (const auto& c : cells) {
    out << c.scenario.agents << ',' << c.scenario.sources << ',' << detail::format_double(c.scenario.sensing_radius)
        << ',' << detail::format_double(c.scenario.comm_radius_min) << ',' << c.used_seed << ','
        << to_string(c.trace.algorithm) << ',' << to_string(c.mode) << ',' << to_string(c.trace.status) << ','
        << c.trace.iterations_to_threshold << ',' << detail::format_double(c.trace.total_cost) << ','
        << c.trace.memory << '\n';
  }
}

}  // namespace endopt
