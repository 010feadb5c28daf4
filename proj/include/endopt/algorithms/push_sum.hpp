#pragma once

// Push-sum subgradient method on stacked estimates, for directed and
// time-varying design graphs with column-stochastic weights:
//
//   q+ = W q,  w+ = W z,  y+ = w+ / q+,  g+ in subgrad f(y+),  z+ = w+ - gamma g+
//
// plus the diminishing step schedule and the averaged-process diagnostics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "endopt/layout.hpp"
#include "endopt/problems.hpp"

namespace endopt {

// gamma^k = k^{-0.51}, with gamma^0 = 1.
inline double diminishing_step(std::size_t k, double exponent = 0.51) {
  if (k == 0) return 1.0;
  return std::pow(static_cast<double>(k), -exponent);
}

struct PushSumState {
  CopyScalars q;  // q[p](local copy)
  StackedVector z;
  StackedVector w;
  StackedVector y;
  StackedVector g;
  std::size_t k = 0;
};

// q^0 = 1, w^0 = y^0 = z^0, g^0 = 0.
inline PushSumState push_sum_init(const StackedVector& z0) {
  const auto& layout = z0.layout();
  CopyScalars q;
  for (std::size_t p = 0; p < layout.component_count(); ++p) {
    q.push_back(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(layout.copy_count(p))));
  }
  return PushSumState{std::move(q), z0, z0, z0, StackedVector(z0.layout_ptr()), 0};
}

// One communication round: q and z are pushed together along W_k's edges.
inline void push_sum_step(PushSumState& s, const StackedWeightOperator& w, const SeparableCost& cost, double gamma,
                          const LocalityGuard* guard = nullptr) {
  auto q_next = apply_stacked_weights(w, s.q, guard);
  auto w_next = apply_stacked_weights(w, s.z, nullptr);  // same messages as q, already logged
  StackedVector y_next(s.z.layout_ptr());
  const auto& layout = s.z.layout();
  for (std::size_t p = 0; p < layout.component_count(); ++p) {
    for (std::size_t a = 0; a < layout.copy_count(p); ++a) {
      const double qa = q_next[p](static_cast<Eigen::Index>(a));
      if (!(qa > 0.0) || !std::isfinite(qa)) {
        throw std::runtime_error("push-sum weight became non-positive for component " + std::to_string(p) +
                                 ", copy " + std::to_string(a) + "; mixing is not column stochastic");
      }
      y_next.local_block(p, a) = w_next.local_block(p, a) / qa;
    }
  }
  auto g_next = stacked_subgradient(cost, y_next);
  s.z = StackedVector(s.z.layout_ptr(), w_next.values() - gamma * g_next.values());
  s.q = std::move(q_next);
  s.w = std::move(w_next);
  s.y = std::move(y_next);
  s.g = std::move(g_next);
  ++s.k;
}

// Per-step diagnostics of the push-sum run.
struct PushSumStepDiagnostics {
  std::size_t k = 0;              // index of the step k -> k+1
  double averaged_residual = 0;   // max_p || zbar^{k+1} - zbar^k + gamma^k (1/N_p) sum_i g^{k+1} ||
  double consensus_error = 0;     // max_{i,p} || y^{k+1}_{i,p} - zbar^k_p ||
  double mass_error = 0;          // max_p | sum_i q^{k+1}_{i,p} - N_p |
  double descent_lhs = 0;         // || zbar^{k+1} - y* ||_D^2
  double descent_rhs = 0;
  bool descent_holds = true;
};

struct PushSumReport {
  std::vector<PushSumStepDiagnostics> steps;
  std::size_t descent_violations = 0;
  double max_averaged_residual = 0;
  double max_mass_error = 0;
};

// Streaming form: feed consecutive states and the step used between them.
// `lipschitz` bounds every agent's subgradient norm along the run.
class PushSumMonitor {
 public:
  PushSumMonitor(SeparableCost cost, Eigen::VectorXd y_star, double f_star, double lipschitz,
                 double slack = 1e-9)
      : cost_(std::move(cost)), y_star_(std::move(y_star)), f_star_(f_star), lip_(lipschitz), slack_(slack) {}

  void observe(const PushSumState& prev, const PushSumState& next, double gamma) {
    const auto& layout = prev.z.layout();
    const auto zbar = block_averages(prev.z);
    const auto zbar_next = block_averages(next.z);
    const auto& part = layout.partition();
    PushSumStepDiagnostics d;
    d.k = prev.k;
    double coupling = 0.0;
    for (std::size_t p = 0; p < layout.component_count(); ++p) {
      const auto off = static_cast<Eigen::Index>(part.offset(p));
      const auto np = static_cast<Eigen::Index>(part.size(p));
      const double n_copies = static_cast<double>(layout.copy_count(p));
      Eigen::VectorXd gsum = Eigen::VectorXd::Zero(np);
      double qsum = 0.0;
      for (std::size_t a = 0; a < layout.copy_count(p); ++a) {
        gsum += next.g.local_block(p, a);
        qsum += next.q[p](static_cast<Eigen::Index>(a));
        const double gap = (zbar.segment(off, np) - next.y.local_block(p, a)).norm();
        d.consensus_error = std::max(d.consensus_error, gap);
        coupling += gap;
      }
      const Eigen::VectorXd resid =
          zbar_next.segment(off, np) - zbar.segment(off, np) + gamma * gsum / n_copies;
      d.averaged_residual = std::max(d.averaged_residual, resid.norm());
      d.mass_error = std::max(d.mass_error, std::abs(qsum - n_copies));
      d.descent_lhs += n_copies * (zbar_next.segment(off, np) - y_star_.segment(off, np)).squaredNorm();
      d.descent_rhs += n_copies * (zbar.segment(off, np) - y_star_.segment(off, np)).squaredNorm();
    }
    const double n_agents = static_cast<double>(layout.agent_count());
    d.descent_rhs += -2.0 * gamma * (cost_.centralized_value(zbar) - f_star_) + 4.0 * lip_ * gamma * coupling +
                     gamma * gamma * n_agents * lip_ * lip_;
    d.descent_holds = d.descent_lhs <= d.descent_rhs + slack_ * (1.0 + std::abs(d.descent_rhs));
    if (!d.descent_holds) ++report_.descent_violations;
    report_.max_averaged_residual = std::max(report_.max_averaged_residual, d.averaged_residual);
    report_.max_mass_error = std::max(report_.max_mass_error, d.mass_error);
    report_.steps.push_back(d);
  }

  const PushSumReport& report() const { return report_; }

 private:
  SeparableCost cost_;
  Eigen::VectorXd y_star_;
  double f_star_;
  double lip_;
  double slack_;
  PushSumReport report_;
};

// Batch form over a recorded trace; gammas[t] is the step used from trace[t]
// to trace[t+1].
inline PushSumReport push_sum_diagnostics(const std::vector<PushSumState>& trace, const std::vector<double>& gammas,
                                          const SeparableCost& cost, const Eigen::VectorXd& y_star, double f_star,
                                          double lipschitz) {
  if (trace.size() < 2) return {};
  if (gammas.size() + 1 < trace.size()) throw std::invalid_argument("need one step size per transition");
  PushSumMonitor mon(cost, y_star, f_star, lipschitz);
  for (std::size_t t = 0; t + 1 < trace.size(); ++t) mon.observe(trace[t], trace[t + 1], gammas[t]);
  return mon.report();
}

}  // namespace endopt
