#pragma once

// ADMM on the END reformulation. Agent i keeps its copies y_{i,p} and one
// auxiliary z_{i,j,p} per design in-neighbor j of each estimated component p:
//
//   y~_i <- argmin f_i(y~_i) + sum_p sum_j ( rho/2 ||y_{i,p}||^2 - <z_{i,j,p}, y_{i,p}> )
//   z_{i,j,p} <- (1 - alpha) z_{i,j,p} - alpha z_{j,i,p} + 2 alpha rho y_{j,p}
//
// With rho = 1 and standard design this is consensus ADMM.

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "endopt/layout.hpp"
#include "endopt/problems.hpp"

namespace endopt {

struct AdmmParams {
  double alpha = 0.5;
  double rho = 1.0;
};

class AdmmState {
 public:
  explicit AdmmState(LayoutPtr layout) : estimates(layout), layout_(std::move(layout)) {
    const auto& l = *layout_;
    z_.resize(l.component_count());
    for (std::size_t p = 0; p < l.component_count(); ++p) {
      const auto& g = l.design(p);
      if (!g.without_self_loops().is_symmetric()) {
        throw std::invalid_argument("ADMM needs undirected design graphs; component " + std::to_string(p) +
                                    " has a one-way edge");
      }
      const auto np = static_cast<Eigen::Index>(l.partition().size(p));
      z_[p].resize(l.copy_count(p));
      for (std::size_t a = 0; a < l.copy_count(p); ++a) {
        z_[p][a].assign(neighbors(p, a).size(), Eigen::VectorXd::Zero(np));
      }
    }
  }

  StackedVector estimates;

  const EndLayout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }

  // Design in-neighbors of copy `local` of component p, self excluded.
  std::vector<Vertex> neighbors(std::size_t p, std::size_t local) const {
    const auto i = layout_->copies(p)[local];
    std::vector<Vertex> out;
    for (Vertex j : layout_->design(p).in_neighbors(i)) {
      if (j != i) out.push_back(j);
    }
    return out;
  }

  Eigen::VectorXd& z(Vertex i, Vertex j, std::size_t p) { return z_[p][layout_->local_index(p, i)][slot(p, i, j)]; }
  const Eigen::VectorXd& z(Vertex i, Vertex j, std::size_t p) const {
    return z_[p][layout_->local_index(p, i)][slot(p, i, j)];
  }

  std::vector<std::vector<std::vector<Eigen::VectorXd>>>& raw() { return z_; }
  const std::vector<std::vector<std::vector<Eigen::VectorXd>>>& raw() const { return z_; }

 private:
  std::size_t slot(std::size_t p, Vertex i, Vertex j) const {
    const auto ns = neighbors(p, layout_->local_index(p, i));
    auto it = std::lower_bound(ns.begin(), ns.end(), j);
    if (it == ns.end() || *it != j) {
      throw std::invalid_argument("agent " + std::to_string(j) + " is not a design neighbor of agent " +
                                  std::to_string(i) + " for component " + std::to_string(p));
    }
    return static_cast<std::size_t>(it - ns.begin());
  }

  LayoutPtr layout_;
  // z_[p][local copy][neighbor slot]
  std::vector<std::vector<std::vector<Eigen::VectorXd>>> z_;
};

inline AdmmState admm_init(LayoutPtr layout) { return AdmmState(std::move(layout)); }

inline void admm_step(AdmmState& state, const SeparableCost& cost, const AdmmParams& params,
                      const LocalityGuard* guard = nullptr) {
  if (!(params.alpha > 0.0 && params.alpha < 1.0)) throw std::invalid_argument("ADMM relaxation alpha must lie in (0,1)");
  if (!(params.rho > 0.0)) throw std::invalid_argument("ADMM penalty rho must be positive");
  if (!cost.has_prox()) throw std::invalid_argument("ADMM needs a local argmin oracle for the cost");
  const auto& l = state.layout();
  auto& y = state.estimates;
  const auto& zs = state.raw();

  // Local minimization, no communication.
  for (Vertex i = 0; i < l.agent_count(); ++i) {
    const auto& comps = cost.components(i);
    Eigen::VectorXd penalty = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cost.local_dim(i)));
    Eigen::VectorXd linear = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cost.local_dim(i)));
    for (std::size_t p : l.estimated_components(i)) {
      const auto a = l.local_index(p, i);
      const auto np = static_cast<Eigen::Index>(l.partition().size(p));
      const double degree = static_cast<double>(zs[p][a].size());
      Eigen::VectorXd zsum = Eigen::VectorXd::Zero(np);
      for (const auto& zz : zs[p][a]) zsum += zz;
      auto it = std::find(comps.begin(), comps.end(), p);
      if (it == comps.end()) {
        // f_i does not depend on y_p: quadratic minimizer.
        if (degree == 0.0) {
          y.block(p, i).setZero();
        } else {
          y.block(p, i) = zsum / (params.rho * degree);
        }
      } else {
        const auto off = static_cast<Eigen::Index>(cost.local_offset(i, static_cast<std::size_t>(it - comps.begin())));
        penalty.segment(off, np).setConstant(params.rho * degree);
        linear.segment(off, np) = zsum;
      }
    }
    if (comps.empty()) continue;
    const auto u = cost.prox(i, penalty, linear);
    for (std::size_t k = 0; k < comps.size(); ++k) {
      const auto p = comps[k];
      y.block(p, i) = u.segment(static_cast<Eigen::Index>(cost.local_offset(i, k)),
                                static_cast<Eigen::Index>(l.partition().size(p)));
    }
  }

  // Auxiliary update, one round of neighbor reads. All z use old values.
  auto next = zs;
  for (std::size_t p = 0; p < l.component_count(); ++p) {
    const auto& cs = l.copies(p);
    for (std::size_t a = 0; a < cs.size(); ++a) {
      const auto i = cs[a];
      const auto ns = state.neighbors(p, a);
      for (std::size_t s = 0; s < ns.size(); ++s) {
        const auto j = ns[s];
        guard_read(guard, p, i, j);
        next[p][a][s] = (1.0 - params.alpha) * zs[p][a][s] - params.alpha * state.z(j, i, p) +
                        2.0 * params.alpha * params.rho * y.block(p, j);
      }
    }
  }
  state.raw() = std::move(next);
}

}  // namespace endopt
