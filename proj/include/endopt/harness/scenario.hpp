#pragma once

// Random sensor/source scenarios on the unit square.
//
// Draw order for one attempt with seed s: sensor positions (x, y per agent),
// source positions, communication radii, source values, LASSO active set,
// measurement matrices row by row, noise. A rejected attempt retries with
// seed s + 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "endopt/graph.hpp"
#include "endopt/harness/rng.hpp"
#include "endopt/layout.hpp"
#include "endopt/problems.hpp"

namespace endopt {

enum class ProblemKind { regression, lasso };

inline std::string to_string(ProblemKind k) { return k == ProblemKind::regression ? "regression" : "lasso"; }

inline ProblemKind parse_problem_kind(const std::string& s) {
  if (s == "regression" || s == "ls") return ProblemKind::regression;
  if (s == "lasso") return ProblemKind::lasso;
  throw std::invalid_argument("unknown problem kind: " + s);
}

struct ScenarioConfig {
  ProblemKind problem = ProblemKind::regression;
  std::size_t agents = 20;         // N
  std::size_t sources = 8;         // P
  double sensing_radius = 0.2;     // r_s
  double comm_radius_min = 0.1;    // r_c_min
  double comm_radius_width = 0.1;  // r_c^i ~ U[r_c_min, r_c_min + width]
  std::size_t measurements = 10;   // n_h
  double noise_variance = 0.1;
  double active_fraction = 1.0;    // LASSO: share of nonzero sources
  std::uint64_t seed = 1;
  std::size_t max_draws = 50;
  bool require_agent_sensing = false;  // also reject draws with an agent sensing no source

  void validate() const {
    if (agents == 0 || sources == 0 || measurements == 0) throw std::invalid_argument("N, P and n_h must be positive");
    const double root2 = std::sqrt(2.0);
    auto radius_ok = [root2](double r) { return r > 0.0 && r <= root2; };
    if (!radius_ok(sensing_radius)) throw std::invalid_argument("sensing radius must lie in (0, sqrt 2]");
    if (!radius_ok(comm_radius_min)) throw std::invalid_argument("minimum communication radius must lie in (0, sqrt 2]");
    if (comm_radius_width < 0.0) throw std::invalid_argument("communication radius width must be nonnegative");
    if (!(active_fraction > 0.0 && active_fraction <= 1.0)) throw std::invalid_argument("active fraction must lie in (0,1]");
    if (noise_variance < 0.0) throw std::invalid_argument("noise variance must be nonnegative");
    if (max_draws == 0) throw std::invalid_argument("max_draws must be positive");
  }
};

struct Scenario {
  ScenarioConfig config;
  std::uint64_t used_seed = 0;  // seed of the accepted draw
  std::size_t draws = 0;        // attempts, accepted one included
  std::vector<std::pair<double, double>> sensors;
  std::vector<std::pair<double, double>> source_positions;
  std::vector<double> comm_radii;
  Eigen::VectorXd truth;  // y_bar
  Partition partition;
  DirectedGraph comm;
  BipartiteGraph interference;
  std::optional<LeastSquaresInstance> regression;
  std::optional<LassoInstance> lasso;

  SeparableCost cost() const { return lasso ? lasso->cost() : regression->cost(); }
};

class ScenarioRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double distance(const std::pair<double, double>& a, const std::pair<double, double>& b) {
  return std::hypot(a.first - b.first, a.second - b.second);
}

// Single attempt; empty when the draw violates the acceptance rules.
inline std::optional<Scenario> draw_scenario(const ScenarioConfig& cfg, std::uint64_t seed, std::string& reason) {
  Rng rng(seed);
  const auto n = cfg.agents;
  const auto pc = cfg.sources;
  std::vector<std::pair<double, double>> sensors(n), sources(pc);
  for (auto& s : sensors) {
    s.first = rng.uniform();
    s.second = rng.uniform();
  }
  for (auto& s : sources) {
    s.first = rng.uniform();
    s.second = rng.uniform();
  }
  std::vector<double> radii(n);
  for (auto& r : radii) r = rng.uniform(cfg.comm_radius_min, cfg.comm_radius_min + cfg.comm_radius_width);
  Eigen::VectorXd truth(static_cast<Eigen::Index>(pc));
  for (Eigen::Index p = 0; p < truth.size(); ++p) truth(p) = rng.uniform();
  if (cfg.problem == ProblemKind::lasso) {
    std::vector<std::size_t> order(pc);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t a = pc; a > 1; --a) std::swap(order[a - 1], order[rng.below(a)]);
    const auto active = static_cast<std::size_t>(std::llround(cfg.active_fraction * static_cast<double>(pc)));
    for (std::size_t a = active; a < pc; ++a) truth(static_cast<Eigen::Index>(order[a])) = 0.0;
  }

  std::vector<Edge> comm_edges;
  for (Vertex i = 0; i < n; ++i) {
    for (Vertex j = 0; j < n; ++j) {
      if (i != j && distance(sensors[i], sensors[j]) <= radii[i]) comm_edges.emplace_back(i, j);
    }
  }
  DirectedGraph comm(n, comm_edges);
  if (!is_strongly_connected(comm)) {
    reason = "communication graph is not strongly connected";
    return std::nullopt;
  }
  std::vector<Edge> interf;
  std::vector<std::size_t> sensed_by(pc, 0), senses(n, 0);
  for (std::size_t p = 0; p < pc; ++p) {
    for (Vertex i = 0; i < n; ++i) {
      if (distance(sensors[i], sources[p]) < cfg.sensing_radius) {
        interf.emplace_back(p, i);
        ++sensed_by[p];
        ++senses[i];
      }
    }
  }
  if (std::find(sensed_by.begin(), sensed_by.end(), 0u) != sensed_by.end()) {
    reason = "a source is not sensed by any agent";
    return std::nullopt;
  }
  if (cfg.require_agent_sensing && std::find(senses.begin(), senses.end(), 0u) != senses.end()) {
    reason = "an agent senses no source";
    return std::nullopt;
  }
  BipartiteGraph interference(pc, n, interf);
  Partition partition = Partition::uniform(pc, 1);

  const double sigma = std::sqrt(cfg.noise_variance);
  std::vector<LeastSquaresAgent> agents;
  for (Vertex i = 0; i < n; ++i) {
    const auto& comps = interference.left_neighbors(i);
    const auto cols = static_cast<Eigen::Index>(comps.size());
    LeastSquaresAgent a;
    a.H.resize(static_cast<Eigen::Index>(cfg.measurements), cols);
    for (Eigen::Index r = 0; r < a.H.rows(); ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) a.H(r, c) = rng.uniform();
      const double nr = a.H.row(r).norm();
      if (nr > 0.0) a.H.row(r) /= nr;
    }
    Eigen::VectorXd local(cols);
    for (Eigen::Index c = 0; c < cols; ++c) local(c) = truth(static_cast<Eigen::Index>(comps[static_cast<std::size_t>(c)]));
    a.h = a.H * local;
    for (Eigen::Index r = 0; r < a.h.size(); ++r) a.h(r) += sigma * rng.normal();
    agents.push_back(std::move(a));
  }

  Scenario s{cfg, seed, 0, std::move(sensors), std::move(sources), std::move(radii), truth, partition, comm,
             interference, std::nullopt, std::nullopt};
  LeastSquaresInstance ls(partition, interference, std::move(agents));
  if (cfg.problem == ProblemKind::lasso) {
    s.lasso.emplace(std::move(ls));
  } else {
    s.regression.emplace(std::move(ls));
  }
  return s;
}

}  // namespace detail

inline Scenario generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  std::string reason;
  for (std::size_t d = 0; d < cfg.max_draws; ++d) {
    auto s = detail::draw_scenario(cfg, cfg.seed + d, reason);
    if (s) {
      s->draws = d + 1;
      return std::move(*s);
    }
  }
  throw ScenarioRejected(std::to_string(cfg.max_draws) + " consecutive draws rejected (last: " + reason +
                         "); try a larger minimum communication radius");
}

}  // namespace endopt
