#pragma once

// Optimality measures of a stacked iterate against a centralized minimizer.
//
//   M(y) = max{ ||P_perp y|| ||grad f(y*)||,            |f(y) - f*| }
//   V(y) = max{ ||diag(1/N_p) P_perp y|| ||grad f(y*)||, |f(P_par y) - f*| }
//
// f(y) evaluates each agent at its own copies; f(P_par y) evaluates the
// centralized cost at the per-component averages.

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "endopt/layout.hpp"
#include "endopt/problems.hpp"

namespace endopt {

struct MeritContext {
  LayoutPtr layout;
  SeparableCost cost;
  Eigen::VectorXd y_star;
  double f_star = 0.0;
  double grad_norm = 0.0;  // ||grad f(E y*)||, stacked
};

// Uses the gradient when available, the oracle subgradient otherwise.
inline MeritContext make_merit_context(LayoutPtr layout, SeparableCost cost, const Reference& ref) {
  const auto lifted = lift(layout, ref.y);
  const auto g = cost.differentiable() ? stacked_gradient(cost, lifted) : stacked_subgradient(cost, lifted);
  MeritContext ctx{std::move(layout), std::move(cost), ref.y, ref.value, g.values().norm()};
  return ctx;
}

inline double merit_M(const StackedVector& y, const MeritContext& ctx) {
  const double a = consensus_residual(y) * ctx.grad_norm;
  const double b = std::abs(total_cost(ctx.cost, y) - ctx.f_star);
  return std::max(a, b);
}

inline double merit_V(const StackedVector& y, const MeritContext& ctx) {
  const double a = weighted_consensus_residual(y) * ctx.grad_norm;
  const double b = std::abs(ctx.cost.centralized_value(block_averages(y)) - ctx.f_star);
  return std::max(a, b);
}

}  // namespace endopt
