#pragma once

// Experiment configuration files: one "key = value" per line, '#' starts a
// comment. Unknown keys are an error.

#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "endopt/harness/experiment.hpp"
#include "endopt/harness/scenario.hpp"

namespace endopt {

struct ExperimentConfig {
  ScenarioConfig scenario;
  RunSettings run;
  std::size_t seeds = 5;  // sweep width
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <class T>
T parse_value(const std::string& key, const std::string& value) {
  std::istringstream is(value);
  T out{};
  if (!(is >> out) || !(is >> std::ws).eof()) throw std::invalid_argument("bad value for " + key + ": " + value);
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw std::invalid_argument("bad boolean for " + key + ": " + value);
}

}  // namespace detail

inline void apply_config_entry(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_value;
  auto& s = c.scenario;
  auto& r = c.run;
  if (key == "problem") s.problem = parse_problem_kind(value);
  else if (key == "N") s.agents = parse_value<std::size_t>(key, value);
  else if (key == "P") s.sources = parse_value<std::size_t>(key, value);
  else if (key == "r_s") s.sensing_radius = parse_value<double>(key, value);
  else if (key == "r_c_min") s.comm_radius_min = parse_value<double>(key, value);
  else if (key == "r_c_width") s.comm_radius_width = parse_value<double>(key, value);
  else if (key == "n_h") s.measurements = parse_value<std::size_t>(key, value);
  else if (key == "noise_variance") s.noise_variance = parse_value<double>(key, value);
  else if (key == "active_fraction") s.active_fraction = parse_value<double>(key, value);
  else if (key == "seed") s.seed = parse_value<std::uint64_t>(key, value);
  else if (key == "max_draws") s.max_draws = parse_value<std::size_t>(key, value);
  else if (key == "require_agent_sensing") s.require_agent_sensing = detail::parse_bool(key, value);
  else if (key == "algorithm") r.algorithm = parse_algorithm(value);
  else if (key == "design_mode") r.mode = parse_experiment_mode(value);
  else if (key == "max_iters") r.max_iters = parse_value<std::size_t>(key, value);
  else if (key == "merit_threshold") r.merit_threshold = parse_value<double>(key, value);
  else if (key == "symmetrize") r.symmetrize = detail::parse_bool(key, value);
  else if (key == "admm_alpha") r.admm_alpha = parse_value<double>(key, value);
  else if (key == "augdgm_gamma_scale") r.augdgm_gamma_scale = parse_value<double>(key, value);
  else if (key == "step_exponent") r.step_exponent = parse_value<double>(key, value);
  else if (key == "gradient_clip") r.gradient_clip = parse_value<double>(key, value);
  else if (key == "record_every") r.record_every = parse_value<std::size_t>(key, value);
  else if (key == "seeds") c.seeds = parse_value<std::size_t>(key, value);
  else throw std::invalid_argument("unknown configuration key: " + key);
}

inline ExperimentConfig read_config(std::istream& in, ExperimentConfig base = {}) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_config_entry(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return base;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  return read_config(in, std::move(base));
}

// Regression setup at desk scale.
inline ExperimentConfig regression_preset() {
  ExperimentConfig c;
  c.scenario.problem = ProblemKind::regression;
  c.scenario.agents = 20;
  c.scenario.sources = 8;
  c.scenario.sensing_radius = 0.2;
  c.scenario.comm_radius_min = 0.1;
  c.scenario.measurements = 10;
  c.scenario.noise_variance = 0.1;
  return c;
}

inline ExperimentConfig regression_paper_scale_preset() {
  auto c = regression_preset();
  c.scenario.agents = 100;
  c.scenario.sources = 20;
  return c;
}

inline ExperimentConfig lasso_preset() {
  ExperimentConfig c;
  c.scenario.problem = ProblemKind::lasso;
  c.scenario.agents = 10;
  c.scenario.sources = 20;
  c.scenario.sensing_radius = 0.2;
  c.scenario.comm_radius_min = 0.1;
  c.scenario.measurements = 1;
  c.scenario.noise_variance = 0.1;
  c.scenario.active_fraction = 0.3;
  return c;
}

}  // namespace endopt
