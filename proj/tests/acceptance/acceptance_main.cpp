// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. `--paper-scale` adds the N = 100 regression comparison.

#include <chrono>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "baselines.hpp"
#include "fixtures.hpp"

using namespace endopt;
using namespace fixtures;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::string note;  // supplementary information, not part of the verdict
};

std::string sci(double x) {
  std::ostringstream os;
  os << std::setprecision(3) << std::scientific << x;
  return os.str();
}

std::string fixed(double x, int digits = 2) {
  std::ostringstream os;
  os << std::setprecision(digits) << std::fixed << x;
  return os.str();
}

std::vector<DirectedGraph> with_loops(const std::vector<DirectedGraph>& gs) {
  std::vector<DirectedGraph> out;
  for (const auto& g : gs) out.push_back(g.with_self_loops());
  return out;
}

double max_copy_error(const StackedVector& y, const Eigen::VectorXd& ystar) {
  const auto& l = y.layout();
  double err = 0.0;
  for (std::size_t p = 0; p < l.component_count(); ++p) {
    const auto seg = ystar.segment(static_cast<Eigen::Index>(l.partition().offset(p)),
                                   static_cast<Eigen::Index>(l.partition().size(p)));
    for (Vertex i : l.copies(p)) err = std::max(err, (select(y, p, i) - seg).norm());
  }
  return err;
}

// Largest deviation between each agent's stacked blocks and a full vector.
template <class FullOf>
double deviation(const StackedVector& y, const Partition& part, FullOf full) {
  double dev = 0.0;
  for (Vertex i = 0; i < y.layout().agent_count(); ++i) {
    const Eigen::VectorXd x = full(i);
    for (std::size_t p = 0; p < part.count(); ++p) {
      const auto seg =
          x.segment(static_cast<Eigen::Index>(part.offset(p)), static_cast<Eigen::Index>(part.size(p)));
      dev = std::max(dev, max_abs_diff(select(y, p, i), seg));
    }
  }
  return dev;
}

// Rescales H and h so that the cost has smoothness constant `target`.
LeastSquaresInstance normalized(const LeastSquaresInstance& ls, double target) {
  const double c = std::sqrt(target / ls.smoothness());
  auto agents = ls.agents();
  for (auto& a : agents) {
    a.H *= c;
    a.h *= c;
  }
  return LeastSquaresInstance(ls.partition(), ls.interference(), agents);
}

Outcome criterion1() {
  Rng rng(101);
  const auto comm = random_connected(5, 0.3, rng);
  const auto interf = random_interference(3, 5, 0.3, rng);
  const auto ls = random_ls(Partition({1, 2, 1}), interf, 4, rng);
  const auto cost = ls.cost();
  const auto& part = ls.partition();
  auto layout = share(standard_design(comm, interf, part));
  const std::size_t iters = 100;

  auto ps = push_sum_init(StackedVector(layout));
  const auto w_ps = column_stochastic_operator(layout, with_loops(layout->designs()));
  baselines::PushSum ps_base(comm, ls);
  const double ps_scale = 0.5 / ls.smoothness();
  double dev_ps = 0.0;
  for (std::size_t k = 0; k < iters; ++k) {
    push_sum_step(ps, w_ps, cost, ps_scale * diminishing_step(k));
    ps_base.step(ps_scale * (k == 0 ? 1.0 : std::pow(static_cast<double>(k), -0.51)));
    dev_ps = std::max(dev_ps, deviation(ps.y, part, [&](Vertex i) { return ps_base.y(i); }));
  }

  const double gamma = 0.9 / ls.smoothness();
  const auto w_m = metropolis_operator(layout);
  auto ag = augdgm_init(w_m, cost);
  baselines::AugDgm ag_base(comm, ls, gamma);
  double dev_ag = 0.0;
  for (std::size_t k = 0; k < iters; ++k) {
    augdgm_step(ag, w_m, cost, gamma);
    ag_base.step();
    dev_ag = std::max(dev_ag, deviation(ag.y, part, [&](Vertex i) { return ag_base.x(i); }));
  }

  auto ad = admm_init(layout);
  baselines::Admm ad_base(comm, ls, 0.5);
  double dev_ad = 0.0;
  for (std::size_t k = 0; k < iters; ++k) {
    admm_step(ad, cost, {0.5, 1.0});
    ad_base.step();
    dev_ad = std::max(dev_ad, deviation(ad.estimates, part, [&](Vertex i) { return ad_base.x(i); }));
  }
  const double worst = std::max({dev_ps, dev_ag, dev_ad});
  return {worst <= 1e-12, "max deviation push-sum " + sci(dev_ps) + ", AugDGM " + sci(dev_ag) + ", ADMM " +
                              sci(dev_ad) + " (tol 1e-12, 100 iterations)"};
}

Outcome criterion2() {
  Rng rng(202);
  const auto comm = random_geometric(10, 0.45, rng);
  const auto interf = random_interference(4, 10, 0.2, rng);
  const auto ls = random_ls(Partition({1, 2, 1, 1}), interf, 3, rng);
  auto layout = share(steiner_design_undirected(comm, interf, ls.partition()));
  for (std::size_t p = 0; p < 4; ++p) {
    if (!is_connected_undirected(layout->design(p))) return {false, "design graph not connected"};
  }
  const auto ref = ls.solve();
  std::string detail;
  bool pass = true;
  for (double alpha : {0.25, 0.5, 0.9}) {
    auto s = admm_init(layout);
    long long hit = -1;
    for (int k = 1; k <= 5000; ++k) {
      admm_step(s, ls.cost(), {alpha, 1.0});
      if (max_copy_error(s.estimates, ref.y) <= 1e-6) {
        hit = k;
        break;
      }
    }
    pass = pass && hit > 0;
    detail += (detail.empty() ? "" : ", ") + std::string("alpha ") + fixed(alpha) + ": " +
              (hit > 0 ? "k = " + std::to_string(hit) : "not reached");
  }
  return {pass, detail + " (tol 1e-6 within 5000)"};
}

Outcome criterion3() {
  const auto comm = DirectedGraph::undirected(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 4}});
  const BipartiteGraph interf(3, 6, {{0, 0}, {0, 2}, {1, 1}, {1, 3}, {1, 5}, {2, 4}, {2, 5}});
  Rng rng(303);
  const auto ls = random_ls(Partition({1, 2, 1}), interf, 4, rng);
  const auto cost = ls.cost();
  auto layout = share(steiner_design_undirected(comm, interf, ls.partition()));
  const auto w = metropolis_operator(layout);
  const double gamma = 0.9 / ls.smoothness();
  const auto m = augdgm_matrices(w, gamma);
  const auto report = check_abc_conditions(m, *layout, 1e-9);
  if (!report.all_pass()) return {false, "conditions: " + report.describe()};
  const auto ref = ls.solve();
  const auto y_star = lift(layout, ref.y);
  const auto bound = abc_rate_bound(StackedVector(layout), y_star, stacked_gradient(cost, y_star), m, report);
  const auto ctx = make_merit_context(layout, cost, ref);
  auto s = augdgm_init(w, cost);
  double worst_ratio = 0.0;
  std::size_t violations = 0;
  for (std::size_t k = 1; k <= 10000; ++k) {
    augdgm_step(s, w, cost, gamma);
    const double mk = merit_M(s.average(), ctx);
    const double bk = bound(k);
    if (mk > bk + 1e-9) ++violations;
    worst_ratio = std::max(worst_ratio, mk / bk);
  }
  return {violations == 0, "conditions pass, " + std::to_string(violations) +
                               " violations of M(y_avg^k) <= h/(2k) over k <= 1e4, max ratio " + fixed(worst_ratio, 4)};
}

Outcome criterion4() {
  const std::size_t n = 12;
  Rng rng(404);
  std::vector<Edge> es;
  for (Vertex v = 0; v < n; ++v) es.emplace_back(v, (v + 1) % n);
  for (int c = 0; c < 6; ++c) {
    const Vertex u = rng.below(n), v = rng.below(n);
    if (u != v) es.emplace_back(u, v);
  }
  const DirectedGraph comm(n, es);
  const auto interf = random_interference(3, n, 0.2, rng);
  const auto ls = normalized(random_ls(Partition({1, 2, 1}), interf, 3, rng), 1.0);
  const auto cost = ls.cost();
  auto layout = share(steiner_design_directed(comm, interf, ls.partition()));
  std::vector<DirectedGraph> parts(3, DirectedGraph(n));
  const auto edges = comm.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto pe = parts[e % 3].edges();
    pe.push_back(edges[e]);
    parts[e % 3] = DirectedGraph(n, pe);
  }
  const auto seq = time_varying_design(layout->designs(), TimeVaryingGraph::periodic(parts));
  for (bool ok : q_connectivity_report(seq, 3, 30)) {
    if (!ok) return {false, "design sequence is not 3-strongly connected"};
  }
  const auto ref = ls.solve();
  const auto ctx = make_merit_context(layout, cost, ref);
  const std::size_t max_iters = 100000;

  struct Pass {
    // First k after which the quantity stays below its threshold; -1 if it never settles.
    long long hit_residual = -1, hit_merit = -1, hit_both = -1;
    double residual = 0.0, merit = 0.0, min_weight = 1.0, radius = 0.0;
  };
  auto run = [&](PushSumMonitor* mon) {
    Pass out;
    auto s = push_sum_init(StackedVector(layout));
    for (std::size_t k = 0; k < max_iters; ++k) {
      const auto w = column_stochastic_operator(layout, with_loops(seq.at(k)));
      for (std::size_t p = 0; p < 3; ++p) {
        const auto& e = w.matrix(p).entries();
        for (Eigen::Index r = 0; r < e.rows(); ++r)
          for (Eigen::Index c = 0; c < e.cols(); ++c)
            if (e(r, c) > 0.0) out.min_weight = std::min(out.min_weight, e(r, c));
      }
      auto prev = s;
      const double g = diminishing_step(k);
      push_sum_step(s, w, cost, g);
      if (mon) mon->observe(prev, s, g);
      out.radius = std::max(out.radius, block_averages(s.z).norm());
      for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t a = 0; a < layout->copy_count(p); ++a)
          out.radius = std::max(out.radius, s.y.local_block(p, a).norm());
      out.residual = consensus_residual(s.y);
      out.merit = merit_V(s.y, ctx);
      const auto kk = static_cast<long long>(k + 1);
      const bool res_ok = out.residual <= 1e-3, merit_ok = out.merit <= 1e-2;
      if (!res_ok) out.hit_residual = -1; else if (out.hit_residual < 0) out.hit_residual = kk;
      if (!merit_ok) out.hit_merit = -1; else if (out.hit_merit < 0) out.hit_merit = kk;
      if (!(res_ok && merit_ok)) out.hit_both = -1; else if (out.hit_both < 0) out.hit_both = kk;
    }
    return out;
  };
  const auto first = run(nullptr);
  // Local vectors stack at most two blocks of the largest component.
  PushSumMonitor mon(cost, ref.y, ref.value, ls.gradient_bound(std::sqrt(2.0) * first.radius));
  const auto r = run(&mon);
  const auto& rep = mon.report();
  const bool pass = r.hit_both > 0 && rep.descent_violations == 0 && rep.max_averaged_residual <= 1e-12 &&
                    r.min_weight >= 1.0 / static_cast<double>(n);
  auto when = [](long long k) { return k > 0 ? "k = " + std::to_string(k) : std::string("not reached"); };
  return {pass, "settles at residual <= 1e-3: " + when(r.hit_residual) + " (final " + sci(r.residual) + "), V <= 1e-2: " +
                    when(r.hit_merit) + " (final " + sci(r.merit) + "), descent-inequality violations " +
                    std::to_string(rep.descent_violations) + ", max averaged residual " +
                    sci(rep.max_averaged_residual) + ", min weight " + fixed(r.min_weight, 4)};
}

struct TrendResult {
  bool ok = true;
  double standard_cost = 0.0;
  double custom_cost = 0.0;
  std::string failure;
};

TrendResult regression_trend(ScenarioConfig cfg, std::size_t seeds, std::size_t max_iters) {
  TrendResult t;
  RunSettings rs;
  rs.max_iters = max_iters;
  rs.merit_threshold = 1e-2;
  rs.gradient_clip = 5.0;
  for (std::size_t s = 0; s < seeds; ++s) {
    auto c = cfg;
    c.seed = cfg.seed + s * cfg.max_draws;
    std::optional<Scenario> drawn;
    try {
      drawn = generate_scenario(c);
    } catch (const ScenarioRejected& e) {
      t.ok = false;
      t.failure = "seed " + std::to_string(c.seed) + ": " + e.what();
      return t;
    }
    const auto& sc = *drawn;
    for (auto mode : {ExperimentMode::standard, ExperimentMode::customized}) {
      rs.mode = mode;
      const auto trace = run_experiment(sc, rs);
      if (trace.status != RunStatus::converged) {
        t.ok = false;
        t.failure = "seed " + std::to_string(sc.used_seed) + ", " + to_string(mode) + ": " + to_string(trace.status) +
                    (trace.diagnostic.empty() ? "" : " (" + trace.diagnostic + ")");
        return t;
      }
      (mode == ExperimentMode::standard ? t.standard_cost : t.custom_cost) += trace.total_cost / static_cast<double>(seeds);
    }
  }
  return t;
}

ScenarioConfig regression_config(std::size_t agents, std::size_t sources, double r_c_min) {
  ScenarioConfig cfg;
  cfg.agents = agents;
  cfg.sources = sources;
  cfg.sensing_radius = 0.2;
  cfg.comm_radius_min = r_c_min;
  cfg.measurements = 10;
  cfg.noise_variance = 0.1;
  cfg.seed = 1;
  return cfg;
}

std::string trend_summary(const TrendResult& t) {
  return "mean broadcasts to threshold: standard " + fixed(t.standard_cost, 0) + ", customized " +
         fixed(t.custom_cost, 0) + ", ratio " + fixed(t.standard_cost / t.custom_cost);
}

Outcome criterion5() {
  Outcome o;
  const auto t = regression_trend(regression_config(20, 8, 0.1), 5, 300000);
  if (!t.ok) {
    o.detail = t.failure;
  } else {
    o.pass = t.standard_cost / t.custom_cost >= 3.0;
    o.detail = trend_summary(t) + " (need >= 3)";
  }
  const auto supp = regression_trend(regression_config(20, 8, 0.3), 5, 300000);
  o.note = "supplementary, r_c_min = 0.3: " + (supp.ok ? trend_summary(supp) : supp.failure);
  return o;
}

Outcome criterion5_paper_scale() {
  const auto t = regression_trend(regression_config(100, 20, 0.1), 5, 300000);
  if (!t.ok) return {false, t.failure, ""};
  return {t.custom_cost < t.standard_cost, trend_summary(t) + " (need customized < standard)", ""};
}

Outcome criterion6() {
  ScenarioConfig cfg;
  cfg.problem = ProblemKind::lasso;
  cfg.agents = 10;
  cfg.sources = 20;
  cfg.sensing_radius = std::sqrt(2.0);
  cfg.comm_radius_min = 0.5;
  cfg.measurements = 1;
  cfg.noise_variance = 0.1;
  cfg.active_fraction = 0.3;
  cfg.seed = 1;
  const auto sc = generate_scenario(cfg);
  if (sc.interference.edges().size() != 200) return {false, "interference graph is not complete"};
  RunSettings rs;
  rs.max_iters = 2000;
  rs.merit_threshold = 0.0;
  std::ostringstream a, b;
  write_csv(a, run_experiment(sc, rs));
  rs.mode = ExperimentMode::customized;
  write_csv(b, run_experiment(sc, rs));
  return {a.str() == b.str(), std::string("complete interference, 2000 push-sum iterations, traces ") +
                                  (a.str() == b.str() ? "byte-identical" : "differ") + " (" +
                                  std::to_string(a.str().size()) + " bytes)"};
}

// Unit-square points with per-node radii; i -> j when j lies within r_i.
DirectedGraph random_directed_geometric(std::size_t n, Rng& rng) {
  while (true) {
    std::vector<double> x(n), y(n), r(n);
    for (std::size_t v = 0; v < n; ++v) {
      x[v] = rng.uniform();
      y[v] = rng.uniform();
      r[v] = rng.uniform(0.4, 0.7);
    }
    std::vector<Edge> es;
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = 0; v < n; ++v)
        if (u != v && std::hypot(x[u] - x[v], y[u] - y[v]) <= r[u]) es.emplace_back(u, v);
    DirectedGraph g(n, es);
    if (is_strongly_connected(g)) return g;
  }
}

Outcome criterion7() {
  Rng rng(707);
  const auto undirected_ok = [](const DirectedGraph& g) { return is_connected_undirected(g); };
  const auto strong_ok = [](const DirectedGraph& g) { return is_strongly_connected(g); };
  double worst = 0.0;
  std::size_t bad_ratio = 0, bad_predicate = 0, checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng.below(6);
    const auto ucomm = random_geometric(n, 0.5, rng);
    const auto dcomm = random_directed_geometric(n, rng);
    const auto interf = random_interference(3, n, 0.25, rng);
    const auto ul = steiner_design_undirected(ucomm, interf, Partition::uniform(3));
    const auto dl = steiner_design_directed(dcomm, interf, Partition::uniform(3));
    for (std::size_t p = 0; p < 3; ++p) {
      const auto& terms = interf.right_neighbors(p);
      const auto uopt = brute_min_cover(ucomm, terms, undirected_ok);
      const auto dopt = brute_min_cover(dcomm, terms, strong_ok);
      for (auto [got, opt] : {std::pair{ul.copy_count(p), uopt}, std::pair{dl.copy_count(p), dopt}}) {
        ++checked;
        const double ratio = static_cast<double>(got) / static_cast<double>(opt);
        worst = std::max(worst, ratio);
        if (ratio > 2.0) ++bad_ratio;
      }
      if (!is_connected_undirected(ul.design(p))) ++bad_predicate;
      if (!is_strongly_connected(dl.design(p))) ++bad_predicate;
    }
    if (!validate(ul).consistent() || !validate(dl).consistent()) ++bad_predicate;
  }
  return {bad_ratio == 0 && bad_predicate == 0,
          std::to_string(checked) + " copy sets on 50 instances, worst ratio to optimum " + fixed(worst) +
              ", over 2x: " + std::to_string(bad_ratio) + ", predicate failures: " + std::to_string(bad_predicate)};
}

Outcome criterion8() {
  Rng rng(808);
  const auto comm = random_geometric(12, 0.35, rng);
  const auto interf = random_interference(4, 12, 0.15, rng);
  const auto ls = random_ls(Partition::uniform(4), interf, 2, rng);
  const auto cost = ls.cost();
  auto ulayout = share(steiner_design_undirected(comm, interf, ls.partition()));
  auto dlayout = share(steiner_design_directed(comm, interf, ls.partition()));
  std::string detail;
  bool pass = true;
  auto record = [&](const std::string& name, const ReadLog& log) {
    pass = pass && log.violations.empty() && log.reads > 0;
    detail += (detail.empty() ? "" : ", ") + name + " " + std::to_string(log.violations.size()) + "/" +
              std::to_string(log.reads);
  };
  {
    ReadLog log;
    LocalityGuard guard(dlayout->designs(), log);
    const auto w = column_stochastic_operator(dlayout, with_loops(dlayout->designs()));
    auto s = push_sum_init(StackedVector(dlayout));
    for (std::size_t k = 0; k < 1000; ++k) push_sum_step(s, w, cost, 0.1 * diminishing_step(k) / ls.smoothness(), &guard);
    record("push-sum", log);
  }
  {
    ReadLog log;
    LocalityGuard guard(ulayout->designs(), log);
    const auto w = metropolis_operator(ulayout);
    auto s = augdgm_init(w, cost, &guard);
    for (std::size_t k = 0; k < 1000; ++k) augdgm_step(s, w, cost, 0.5 / ls.smoothness(), &guard);
    record("AugDGM", log);
  }
  {
    ReadLog log;
    LocalityGuard guard(ulayout->designs(), log);
    auto s = admm_init(ulayout);
    for (std::size_t k = 0; k < 1000; ++k) admm_step(s, cost, {}, &guard);
    record("ADMM", log);
  }
  return {pass, "non-neighbor reads/total reads over 1000 iterations: " + detail};
}

}  // namespace

int main(int argc, char** argv) {
  bool paper_scale = false;
  for (int a = 1; a < argc; ++a) {
    if (std::strcmp(argv[a], "--paper-scale") == 0) {
      paper_scale = true;
    } else {
      std::cerr << "usage: acceptance [--paper-scale]\n";
      return 2;
    }
  }
  std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"1 standard-design equivalence", criterion1},  {"2 ADMM convergence", criterion2},
      {"3 AugDGM O(1/k) rate", criterion3},           {"4 push-sum time-varying convergence", criterion4},
      {"5 regression cost trend (N=20)", criterion5}, {"6 LASSO complete interference", criterion6},
      {"7 Steiner quality", criterion7},              {"8 locality", criterion8},
  };
  if (paper_scale) checks.emplace_back("5p regression cost trend (N=100)", criterion5_paper_scale);
  int failures = 0;
  for (const auto& [name, fn] : checks) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what(), ""};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail << " [" << fixed(secs) << " s]"
              << std::endl;
    if (!o.note.empty()) std::cout << "       " << o.note << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
