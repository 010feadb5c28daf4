#pragma once

// Partially separable costs f(y) = sum_i f_i((y_p)_{p in N_I(i)}).
//
// Every oracle works on the agent-local vector u_i: the concatenation of the
// blocks y_p for p in N_I(i), ascending p. SeparableCost is the type-erased
// view used by the algorithms; the concrete instances (least squares, LASSO,
// dual of a constraint-coupled problem) build one with cost().

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "endopt/layout.hpp"

namespace endopt {

struct Reference {
  Eigen::VectorXd y;  // a minimizer
  double value = 0.0;
};

class SeparableCost {
 public:
  using ValueFn = std::function<double(Vertex, const Eigen::VectorXd&)>;
  using VectorFn = std::function<Eigen::VectorXd(Vertex, const Eigen::VectorXd&)>;
  // argmin_u f_i(u) + 1/2 sum_e penalty_e u_e^2 - <linear, u>
  using ProxFn = std::function<Eigen::VectorXd(Vertex, const Eigen::VectorXd& penalty, const Eigen::VectorXd& linear)>;
  using ReferenceFn = std::function<Reference()>;

  SeparableCost(Partition partition, BipartiteGraph interference, ValueFn value, VectorFn subgradient)
      : partition_(std::move(partition)),
        interference_(std::move(interference)),
        value_(std::move(value)),
        subgradient_(std::move(subgradient)) {
    if (interference_.left_count() != partition_.count()) {
      throw std::invalid_argument("interference graph and partition disagree on the component count");
    }
    local_offsets_.resize(interference_.right_count());
    local_dims_.resize(interference_.right_count());
    for (Vertex i = 0; i < interference_.right_count(); ++i) {
      std::size_t acc = 0;
      for (std::size_t p : interference_.left_neighbors(i)) {
        local_offsets_[i].push_back(acc);
        acc += partition_.size(p);
      }
      local_dims_[i] = acc;
    }
  }

  SeparableCost& with_gradient(VectorFn gradient, std::optional<double> smoothness) {
    gradient_ = std::move(gradient);
    smoothness_ = smoothness;
    return *this;
  }
  SeparableCost& with_prox(ProxFn prox) {
    prox_ = std::move(prox);
    return *this;
  }
  SeparableCost& with_reference(ReferenceFn ref) {
    reference_ = std::move(ref);
    return *this;
  }

  const Partition& partition() const { return partition_; }
  const BipartiteGraph& interference() const { return interference_; }
  std::size_t agent_count() const { return interference_.right_count(); }
  const std::vector<Vertex>& components(Vertex i) const { return interference_.left_neighbors(i); }
  std::size_t local_dim(Vertex i) const { return local_dims_.at(i); }
  // Offset of component components(i)[k] inside u_i.
  std::size_t local_offset(Vertex i, std::size_t k) const { return local_offsets_.at(i).at(k); }

  bool differentiable() const { return static_cast<bool>(gradient_); }
  bool has_prox() const { return static_cast<bool>(prox_); }
  bool has_reference() const { return static_cast<bool>(reference_); }
  std::optional<double> smoothness() const { return smoothness_; }

  double value(Vertex i, const Eigen::VectorXd& u) const { return value_(i, u); }

  Eigen::VectorXd gradient(Vertex i, const Eigen::VectorXd& u) const {
    if (!gradient_) {
      throw std::logic_error("cost is not differentiable; use the subgradient oracle instead");
    }
    return gradient_(i, u);
  }

  Eigen::VectorXd subgradient(Vertex i, const Eigen::VectorXd& u) const { return subgradient_(i, u); }

  Eigen::VectorXd prox(Vertex i, const Eigen::VectorXd& penalty, const Eigen::VectorXd& linear) const {
    if (!prox_) throw std::logic_error("cost has no local argmin oracle");
    return prox_(i, penalty, linear);
  }

  Reference reference() const {
    if (!reference_) throw std::logic_error("no centralized reference solver for this problem class");
    return reference_();
  }

  // u_i extracted from a full-length y.
  Eigen::VectorXd gather(Vertex i, const Eigen::VectorXd& y) const {
    Eigen::VectorXd u(static_cast<Eigen::Index>(local_dim(i)));
    const auto& comps = components(i);
    for (std::size_t k = 0; k < comps.size(); ++k) {
      const auto p = comps[k];
      u.segment(static_cast<Eigen::Index>(local_offset(i, k)), static_cast<Eigen::Index>(partition_.size(p))) =
          y.segment(static_cast<Eigen::Index>(partition_.offset(p)), static_cast<Eigen::Index>(partition_.size(p)));
    }
    return u;
  }

  double centralized_value(const Eigen::VectorXd& y) const {
    double acc = 0.0;
    for (Vertex i = 0; i < agent_count(); ++i) acc += value(i, gather(i, y));
    return acc;
  }

  // Sum of the agents' (sub)gradients scattered back to length n_y.
  Eigen::VectorXd centralized_gradient(const Eigen::VectorXd& y) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(partition_.total()));
    for (Vertex i = 0; i < agent_count(); ++i) {
      const auto u = gather(i, y);
      const auto gi = differentiable() ? gradient(i, u) : subgradient(i, u);
      const auto& comps = components(i);
      for (std::size_t k = 0; k < comps.size(); ++k) {
        const auto p = comps[k];
        g.segment(static_cast<Eigen::Index>(partition_.offset(p)), static_cast<Eigen::Index>(partition_.size(p))) +=
            gi.segment(static_cast<Eigen::Index>(local_offset(i, k)), static_cast<Eigen::Index>(partition_.size(p)));
      }
    }
    return g;
  }

 private:
  Partition partition_;
  BipartiteGraph interference_;
  ValueFn value_;
  VectorFn subgradient_;
  VectorFn gradient_;
  ProxFn prox_;
  ReferenceFn reference_;
  std::optional<double> smoothness_;
  std::vector<std::vector<std::size_t>> local_offsets_;
  std::vector<std::size_t> local_dims_;
};

namespace detail {

inline double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

inline double soft_threshold(double x, double t) { return sign0(x) * std::max(std::abs(x) - t, 0.0); }

inline double lambda_max_sym(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// argmin_u 1/2 u'Qu - b'u + sum_e c_e |u_e| by accelerated proximal gradient
// with restart. Stops when the iterate moves less than `tol` (sup norm).
inline Eigen::VectorXd l1_quadratic_min(const Eigen::MatrixXd& q, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                        double tol = 1e-10, std::size_t max_iter = 1000000) {
  const auto n = b.size();
  if (n == 0) return Eigen::VectorXd(0);
  const double lip = lambda_max_sym(q);
  if (!(lip > 0.0)) {
    // Q = 0: bounded only when |b_e| <= c_e, minimizer 0.
    for (Eigen::Index e = 0; e < n; ++e) {
      if (std::abs(b(e)) > c(e)) throw std::runtime_error("l1-regularized subproblem is unbounded below");
    }
    return Eigen::VectorXd::Zero(n);
  }
  const double step = 1.0 / lip;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd x_prev = x;
  Eigen::VectorXd v = x;
  double t = 1.0;
  auto objective = [&](const Eigen::VectorXd& u) { return 0.5 * u.dot(q * u) - b.dot(u) + c.dot(u.cwiseAbs()); };
  double f_prev = objective(x);
  for (std::size_t it = 0; it < max_iter; ++it) {
    Eigen::VectorXd grad = q * v - b;
    Eigen::VectorXd next(n);
    for (Eigen::Index e = 0; e < n; ++e) next(e) = soft_threshold(v(e) - step * grad(e), step * c(e));
    const double f_next = objective(next);
    if (f_next > f_prev && t > 1.0) {
      // restart momentum; a plain step from x is accepted as is
      t = 1.0;
      v = x;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    v = next + ((t - 1.0) / t_next) * (next - x);
    x_prev = x;
    x = next;
    t = t_next;
    f_prev = f_next;
    if ((x - x_prev).lpNorm<Eigen::Infinity>() <= tol) {
      // confirm with a plain proximal step from x
      Eigen::VectorXd g = q * x - b;
      double move = 0.0;
      for (Eigen::Index e = 0; e < n; ++e) {
        move = std::max(move, std::abs(soft_threshold(x(e) - step * g(e), step * c(e)) - x(e)));
      }
      if (move <= tol) return x;
    }
  }
  throw std::runtime_error("proximal solver did not reach tolerance");
}

// argmin_{lower <= x <= upper} 1/2 x'Qx + d'x for Q symmetric positive definite.
// Cyclic coordinate minimization until the projected-gradient residual drops
// below tol.
inline Eigen::VectorXd box_qp(const Eigen::MatrixXd& q, const Eigen::VectorXd& d, const Eigen::VectorXd& lower,
                              const Eigen::VectorXd& upper, double tol = 1e-12, std::size_t max_sweeps = 200000) {
  const auto n = d.size();
  // Start from the unconstrained minimizer, clamped.
  Eigen::VectorXd x = q.ldlt().solve(-d);
  x = x.cwiseMax(lower).cwiseMin(upper);
  auto residual = [&]() {
    Eigen::VectorXd g = q * x + d;
    double r = 0.0;
    for (Eigen::Index e = 0; e < n; ++e) {
      const double proj = std::clamp(x(e) - g(e), lower(e), upper(e));
      r = std::max(r, std::abs(proj - x(e)));
    }
    return r;
  };
  const double scale = 1.0 + d.lpNorm<Eigen::Infinity>();
  double r = residual();
  for (std::size_t sweep = 0; sweep < max_sweeps && r > tol * scale; ++sweep) {
    for (Eigen::Index e = 0; e < n; ++e) {
      const double rest = q.row(e).dot(x) - q(e, e) * x(e);
      x(e) = std::clamp(-(d(e) + rest) / q(e, e), lower(e), upper(e));
    }
    r = residual();
  }
  if (r > tol * scale) {
    throw std::runtime_error("box-constrained inner solve failed, projected-gradient residual " + std::to_string(r));
  }
  return x;
}

}  // namespace detail

struct LeastSquaresAgent {
  Eigen::MatrixXd H;  // rows: measurements, columns: blocks of N_I(i), ascending p
  Eigen::VectorXd h;
};

// f_i(u) = ||h_i - H_i u||^2.
class LeastSquaresInstance {
 public:
  LeastSquaresInstance(Partition partition, BipartiteGraph interference, std::vector<LeastSquaresAgent> agents)
      : partition_(std::move(partition)), interference_(std::move(interference)), agents_(std::move(agents)) {
    if (agents_.size() != interference_.right_count()) {
      throw std::invalid_argument("need one measurement block per agent");
    }
    if (interference_.left_count() != partition_.count()) {
      throw std::invalid_argument("interference graph and partition disagree on the component count");
    }
    for (Vertex i = 0; i < agents_.size(); ++i) {
      std::size_t cols = 0;
      for (std::size_t p : interference_.left_neighbors(i)) cols += partition_.size(p);
      const auto& a = agents_[i];
      if (static_cast<std::size_t>(a.H.cols()) != cols || a.H.rows() != a.h.size()) {
        throw std::invalid_argument("agent " + std::to_string(i) + ": H/h dimensions do not match its components");
      }
    }
  }

  const Partition& partition() const { return partition_; }
  const BipartiteGraph& interference() const { return interference_; }
  const std::vector<LeastSquaresAgent>& agents() const { return agents_; }
  std::size_t agent_count() const { return agents_.size(); }

  double local_value(Vertex i, const Eigen::VectorXd& u) const {
    const auto& a = agents_[i];
    return (a.h - a.H * u).squaredNorm();
  }

  Eigen::VectorXd local_gradient(Vertex i, const Eigen::VectorXd& u) const {
    const auto& a = agents_[i];
    return 2.0 * a.H.transpose() * (a.H * u - a.h);
  }

  // (2 H'H + diag(penalty)) u = 2 H'h + linear, minimum-norm if singular.
  Eigen::VectorXd local_prox(Vertex i, const Eigen::VectorXd& penalty, const Eigen::VectorXd& linear) const {
    const auto& a = agents_[i];
    Eigen::MatrixXd m = 2.0 * a.H.transpose() * a.H;
    m.diagonal() += penalty;
    Eigen::VectorXd rhs = 2.0 * a.H.transpose() * a.h + linear;
    return m.completeOrthogonalDecomposition().solve(rhs);
  }

  // 2 max_i lambda_max(H_i'H_i)
  double smoothness() const {
    double l = 0.0;
    for (const auto& a : agents_) l = std::max(l, 2.0 * detail::lambda_max_sym(a.H.transpose() * a.H));
    return l;
  }

  // Bound on ||grad f_i(u)|| over ||u|| <= radius, max over agents.
  double gradient_bound(double radius) const {
    double b = 0.0;
    for (const auto& a : agents_) {
      const double lam = detail::lambda_max_sym(a.H.transpose() * a.H);
      b = std::max(b, 2.0 * lam * radius + 2.0 * (a.H.transpose() * a.h).norm());
    }
    return b;
  }

  // Normal matrix and right-hand side of the centralized problem.
  std::pair<Eigen::MatrixXd, Eigen::VectorXd> normal_equations() const {
    const auto n = static_cast<Eigen::Index>(partition_.total());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (Vertex i = 0; i < agents_.size(); ++i) {
      const auto idx = global_indices(i);
      const auto& a = agents_[i];
      Eigen::MatrixXd hth = 2.0 * a.H.transpose() * a.H;
      Eigen::VectorXd hty = 2.0 * a.H.transpose() * a.h;
      for (std::size_t r = 0; r < idx.size(); ++r) {
        rhs(idx[r]) += hty(static_cast<Eigen::Index>(r));
        for (std::size_t c = 0; c < idx.size(); ++c) {
          m(idx[r], idx[c]) += hth(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
      }
    }
    return {std::move(m), std::move(rhs)};
  }

  // Minimum-norm solution of the normal equations.
  Reference solve() const {
    auto [m, rhs] = normal_equations();
    Reference ref;
    ref.y = m.completeOrthogonalDecomposition().solve(rhs);
    ref.value = cost().centralized_value(ref.y);
    return ref;
  }

  // Position in y of each entry of u_i.
  std::vector<Eigen::Index> global_indices(Vertex i) const {
    std::vector<Eigen::Index> idx;
    for (std::size_t p : interference_.left_neighbors(i)) {
      for (std::size_t e = 0; e < partition_.size(p); ++e) {
        idx.push_back(static_cast<Eigen::Index>(partition_.offset(p) + e));
      }
    }
    return idx;
  }

  SeparableCost cost() const {
    auto self = std::make_shared<const LeastSquaresInstance>(*this);
    SeparableCost c(
        partition_, interference_, [self](Vertex i, const Eigen::VectorXd& u) { return self->local_value(i, u); },
        [self](Vertex i, const Eigen::VectorXd& u) { return self->local_gradient(i, u); });
    c.with_gradient([self](Vertex i, const Eigen::VectorXd& u) { return self->local_gradient(i, u); }, smoothness())
        .with_prox([self](Vertex i, const Eigen::VectorXd& pen, const Eigen::VectorXd& lin) {
          return self->local_prox(i, pen, lin);
        })
        .with_reference([self]() { return self->solve(); });
    return c;
  }

 private:
  Partition partition_;
  BipartiteGraph interference_;
  std::vector<LeastSquaresAgent> agents_;
};

// Least squares plus ||y||_1, split across agents with weight
// 1/|N_I^out(p)| on |y_p| for each agent touching p.
class LassoInstance {
 public:
  explicit LassoInstance(LeastSquaresInstance ls) : ls_(std::move(ls)) {
    const auto& gi = ls_.interference();
    for (std::size_t p = 0; p < gi.left_count(); ++p) {
      weights_.push_back(1.0 / static_cast<double>(gi.right_neighbors(p).size()));
    }
  }

  const LeastSquaresInstance& least_squares() const { return ls_; }
  const Partition& partition() const { return ls_.partition(); }
  const BipartiteGraph& interference() const { return ls_.interference(); }
  double l1_weight(std::size_t p) const { return weights_.at(p); }

  // Per-entry l1 weights of u_i.
  Eigen::VectorXd local_weights(Vertex i) const {
    Eigen::VectorXd w(static_cast<Eigen::Index>(local_size(i)));
    Eigen::Index k = 0;
    for (std::size_t p : interference().left_neighbors(i)) {
      for (std::size_t e = 0; e < partition().size(p); ++e) w(k++) = weights_[p];
    }
    return w;
  }

  double local_value(Vertex i, const Eigen::VectorXd& u) const {
    return ls_.local_value(i, u) + local_weights(i).dot(u.cwiseAbs());
  }

  // Quadratic gradient plus weight * sign(u), sign(0) = 0.
  Eigen::VectorXd local_subgradient(Vertex i, const Eigen::VectorXd& u) const {
    Eigen::VectorXd g = ls_.local_gradient(i, u);
    const auto w = local_weights(i);
    for (Eigen::Index e = 0; e < u.size(); ++e) g(e) += w(e) * detail::sign0(u(e));
    return g;
  }

  Eigen::VectorXd local_prox(Vertex i, const Eigen::VectorXd& penalty, const Eigen::VectorXd& linear) const {
    const auto& a = ls_.agents()[i];
    Eigen::MatrixXd q = 2.0 * a.H.transpose() * a.H;
    q.diagonal() += penalty;
    Eigen::VectorXd b = 2.0 * a.H.transpose() * a.h + linear;
    return detail::l1_quadratic_min(q, b, local_weights(i));
  }

  // Proximal gradient on the centralized problem, tolerance 1e-10.
  Reference solve() const {
    auto [q, b] = ls_.normal_equations();
    Reference ref;
    ref.y = detail::l1_quadratic_min(q, b, Eigen::VectorXd::Ones(b.size()), 1e-10);
    ref.value = cost().centralized_value(ref.y);
    return ref;
  }

  SeparableCost cost() const {
    auto self = std::make_shared<const LassoInstance>(*this);
    SeparableCost c(
        partition(), interference(), [self](Vertex i, const Eigen::VectorXd& u) { return self->local_value(i, u); },
        [self](Vertex i, const Eigen::VectorXd& u) { return self->local_subgradient(i, u); });
    c.with_prox([self](Vertex i, const Eigen::VectorXd& pen, const Eigen::VectorXd& lin) {
       return self->local_prox(i, pen, lin);
     }).with_reference([self]() { return self->solve(); });
    return c;
  }

 private:
  std::size_t local_size(Vertex i) const {
    std::size_t n = 0;
    for (std::size_t p : interference().left_neighbors(i)) n += partition().size(p);
    return n;
  }

  LeastSquaresInstance ls_;
  std::vector<double> weights_;
};

struct CoupledAgent {
  // f_i(x) = 1/2 x'Qx + c'x on the box [lower, upper]
  Eigen::MatrixXd Q;
  Eigen::VectorXd c;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  // p -> (A_{p,i}, a_{p,i}) for every p in N_I(i)
  std::map<std::size_t, std::pair<Eigen::MatrixXd, Eigen::VectorXd>> constraints;
};

struct CoupledReference {
  Eigen::VectorXd dual;                  // optimal multipliers, length n_y
  std::vector<Eigen::VectorXd> primal;   // x_i
  double value = 0.0;                    // primal optimum = dual optimum
};

// min sum_i f_i(x_i) s.t. sum_{i in N_I^out(p)} (A_{p,i} x_i - a_{p,i}) = 0
// for every p. The variable of interest is the dual y = col(y_p).
class ConstraintCoupledInstance {
 public:
  ConstraintCoupledInstance(Partition partition, BipartiteGraph interference, std::vector<CoupledAgent> agents)
      : partition_(std::move(partition)), interference_(std::move(interference)), agents_(std::move(agents)) {
    if (agents_.size() != interference_.right_count()) throw std::invalid_argument("need one block per agent");
    for (Vertex i = 0; i < agents_.size(); ++i) {
      const auto& a = agents_[i];
      const auto nx = a.c.size();
      if (a.Q.rows() != nx || a.Q.cols() != nx || a.lower.size() != nx || a.upper.size() != nx) {
        throw std::invalid_argument("agent " + std::to_string(i) + ": local cost dimensions disagree");
      }
      const auto& comps = interference_.left_neighbors(i);
      if (a.constraints.size() != comps.size()) {
        throw std::invalid_argument("agent " + std::to_string(i) + ": constraint blocks do not match N_I(i)");
      }
      for (std::size_t p : comps) {
        auto it = a.constraints.find(p);
        if (it == a.constraints.end()) {
          throw std::invalid_argument("agent " + std::to_string(i) + ": missing constraint block " + std::to_string(p));
        }
        const auto& [am, av] = it->second;
        if (static_cast<std::size_t>(am.rows()) != partition_.size(p) || am.cols() != nx ||
            static_cast<std::size_t>(av.size()) != partition_.size(p)) {
          throw std::invalid_argument("agent " + std::to_string(i) + ": A/a block for component " +
                                      std::to_string(p) + " has the wrong shape");
        }
      }
    }
  }

  const Partition& partition() const { return partition_; }
  const BipartiteGraph& interference() const { return interference_; }
  const std::vector<CoupledAgent>& agents() const { return agents_; }

  // x_i minimizing f_i(x) + sum_p <y_p, A_{p,i} x - a_{p,i}> over the box.
  Eigen::VectorXd local_primal(Vertex i, const std::map<std::size_t, Eigen::VectorXd>& dual_view) const {
    const auto& a = agents_.at(i);
    Eigen::VectorXd d = a.c;
    for (const auto& [p, blk] : a.constraints) {
      auto it = dual_view.find(p);
      if (it == dual_view.end()) throw std::invalid_argument("dual view is missing component " + std::to_string(p));
      d += blk.first.transpose() * it->second;
    }
    return detail::box_qp(a.Q, d, a.lower, a.upper);
  }

  // g_{i,p} = A_{p,i} x_i* - a_{p,i}, a supergradient of the concave phi_i.
  std::map<std::size_t, Eigen::VectorXd> dual_subgradient(Vertex i,
                                                          const std::map<std::size_t, Eigen::VectorXd>& dual_view) const {
    const auto x = local_primal(i, dual_view);
    std::map<std::size_t, Eigen::VectorXd> g;
    for (const auto& [p, blk] : agents_[i].constraints) g.emplace(p, blk.first * x - blk.second);
    return g;
  }

  double local_dual_value(Vertex i, const std::map<std::size_t, Eigen::VectorXd>& dual_view) const {
    const auto& a = agents_[i];
    const auto x = local_primal(i, dual_view);
    double v = 0.5 * x.dot(a.Q * x) + a.c.dot(x);
    for (const auto& [p, blk] : a.constraints) v += dual_view.at(p).dot(blk.first * x - blk.second);
    return v;
  }

  // Dual of the problem, posed as the minimization of -sum_i phi_i.
  SeparableCost dual_cost() const {
    auto self = std::make_shared<const ConstraintCoupledInstance>(*this);
    auto view_of = [self](Vertex i, const Eigen::VectorXd& u) {
      std::map<std::size_t, Eigen::VectorXd> view;
      Eigen::Index off = 0;
      for (std::size_t p : self->interference_.left_neighbors(i)) {
        const auto n = static_cast<Eigen::Index>(self->partition_.size(p));
        view.emplace(p, u.segment(off, n));
        off += n;
      }
      return view;
    };
    auto neg_grad = [self, view_of](Vertex i, const Eigen::VectorXd& u) {
      auto g = self->dual_subgradient(i, view_of(i, u));
      Eigen::VectorXd out(u.size());
      Eigen::Index off = 0;
      for (const auto& [p, v] : g) {
        out.segment(off, v.size()) = -v;
        off += v.size();
      }
      return out;
    };
    SeparableCost c(
        partition_, interference_,
        [self, view_of](Vertex i, const Eigen::VectorXd& u) { return -self->local_dual_value(i, view_of(i, u)); },
        neg_grad);
    double lip = 0.0;
    for (Vertex i = 0; i < agents_.size(); ++i) lip = std::max(lip, dual_smoothness(i));
    c.with_gradient(neg_grad, lip).with_reference([self]() {
      auto r = self->solve();
      return Reference{r.dual, -r.value};
    });
    return c;
  }

  // KKT solve with the box ignored; rejects solutions that leave the box.
  CoupledReference solve() const {
    std::vector<Eigen::Index> xoff(agents_.size());
    Eigen::Index nx = 0;
    for (Vertex i = 0; i < agents_.size(); ++i) {
      xoff[i] = nx;
      nx += agents_[i].c.size();
    }
    const auto ny = static_cast<Eigen::Index>(partition_.total());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nx + ny, nx + ny);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nx + ny);
    for (Vertex i = 0; i < agents_.size(); ++i) {
      const auto& a = agents_[i];
      const auto n = a.c.size();
      kkt.block(xoff[i], xoff[i], n, n) = a.Q;
      rhs.segment(xoff[i], n) = -a.c;
      for (const auto& [p, blk] : a.constraints) {
        const auto row = nx + static_cast<Eigen::Index>(partition_.offset(p));
        const auto m = blk.first.rows();
        kkt.block(row, xoff[i], m, n) = blk.first;
        kkt.block(xoff[i], row, n, m) = blk.first.transpose();
        rhs.segment(row, m) += blk.second;
      }
    }
    Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    if ((kkt * sol - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) {
      throw std::runtime_error("KKT system of the constraint-coupled problem is inconsistent");
    }
    CoupledReference ref;
    ref.dual = sol.tail(ny);
    ref.value = 0.0;
    for (Vertex i = 0; i < agents_.size(); ++i) {
      const auto& a = agents_[i];
      Eigen::VectorXd x = sol.segment(xoff[i], a.c.size());
      for (Eigen::Index e = 0; e < x.size(); ++e) {
        if (x(e) < a.lower(e) - 1e-12 || x(e) > a.upper(e) + 1e-12) {
          throw std::runtime_error("box constraints are active at the KKT point; unsupported by the reference solver");
        }
      }
      ref.value += 0.5 * x.dot(a.Q * x) + a.c.dot(x);
      ref.primal.push_back(std::move(x));
    }
    return ref;
  }

 private:
  // lambda_max(A_i Q_i^{-1} A_i'), the curvature of -phi_i without active bounds.
  double dual_smoothness(Vertex i) const {
    const auto& a = agents_[i];
    Eigen::Index rows = 0;
    for (const auto& [p, blk] : a.constraints) rows += blk.first.rows();
    Eigen::MatrixXd am(rows, a.c.size());
    Eigen::Index r = 0;
    for (const auto& [p, blk] : a.constraints) {
      am.middleRows(r, blk.first.rows()) = blk.first;
      r += blk.first.rows();
    }
    Eigen::MatrixXd m = am * a.Q.ldlt().solve(am.transpose());
    return detail::lambda_max_sym(0.5 * (m + m.transpose()));
  }

  Partition partition_;
  BipartiteGraph interference_;
  std::vector<CoupledAgent> agents_;
};

inline std::map<std::size_t, Eigen::VectorXd> dual_subgradient(const ConstraintCoupledInstance& problem,
                                                               const std::map<std::size_t, Eigen::VectorXd>& dual_view,
                                                               Vertex i) {
  return problem.dual_subgradient(i, dual_view);
}

inline Reference centralized_reference(const SeparableCost& cost) { return cost.reference(); }
inline Reference centralized_reference(const LeastSquaresInstance& problem) { return problem.solve(); }
inline Reference centralized_reference(const LassoInstance& problem) { return problem.solve(); }
inline CoupledReference centralized_reference(const ConstraintCoupledInstance& problem) { return problem.solve(); }

// u_i assembled from agent i's own copies.
inline Eigen::VectorXd gather_local(const SeparableCost& cost, const StackedVector& y, Vertex i) {
  const auto& layout = y.layout();
  Eigen::VectorXd u(static_cast<Eigen::Index>(cost.local_dim(i)));
  const auto& comps = cost.components(i);
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const auto p = comps[k];
    if (!layout.estimates(i, p)) {
      throw std::invalid_argument("agent " + std::to_string(i) + " has no estimate of component " + std::to_string(p) +
                                  " it depends on");
    }
    u.segment(static_cast<Eigen::Index>(cost.local_offset(i, k)), static_cast<Eigen::Index>(cost.partition().size(p))) =
        y.block(p, i);
  }
  return u;
}

// sum_i f_i(y~_i), each agent evaluated at its own copies.
inline double total_cost(const SeparableCost& cost, const StackedVector& y) {
  double acc = 0.0;
  for (Vertex i = 0; i < cost.agent_count(); ++i) acc += cost.value(i, gather_local(cost, y, i));
  return acc;
}

namespace detail {

template <class Oracle>
StackedVector stacked_oracle(const SeparableCost& cost, const StackedVector& y, Oracle&& oracle) {
  StackedVector out(y.layout_ptr());
  for (Vertex i = 0; i < cost.agent_count(); ++i) {
    const auto& comps = cost.components(i);
    if (comps.empty()) continue;
    const auto g = oracle(i, gather_local(cost, y, i));
    for (std::size_t k = 0; k < comps.size(); ++k) {
      const auto p = comps[k];
      out.block(p, i) = g.segment(static_cast<Eigen::Index>(cost.local_offset(i, k)),
                                  static_cast<Eigen::Index>(cost.partition().size(p)));
    }
  }
  return out;
}

}  // namespace detail

// Block (i,p) is grad_{y_p} f_i(y~_i); zero when p is estimated but not needed.
inline StackedVector stacked_gradient(const SeparableCost& cost, const StackedVector& y) {
  if (!cost.differentiable()) {
    throw std::logic_error("stacked_gradient needs a differentiable cost; use stacked_subgradient");
  }
  return detail::stacked_oracle(cost, y, [&](Vertex i, const Eigen::VectorXd& u) { return cost.gradient(i, u); });
}

inline StackedVector stacked_subgradient(const SeparableCost& cost, const StackedVector& y) {
  return detail::stacked_oracle(cost, y, [&](Vertex i, const Eigen::VectorXd& u) { return cost.subgradient(i, u); });
}

inline Eigen::VectorXd lasso_subgradient(const LassoInstance& problem, const StackedVector& y, std::size_t p, Vertex i) {
  const auto& comps = problem.interference().left_neighbors(i);
  auto it = std::find(comps.begin(), comps.end(), p);
  if (it == comps.end()) {
    throw std::invalid_argument("component " + std::to_string(p) + " does not enter the cost of agent " +
                                std::to_string(i));
  }
  const auto cost = problem.cost();
  const auto g = problem.local_subgradient(i, gather_local(cost, y, i));
  const auto k = static_cast<std::size_t>(it - comps.begin());
  return g.segment(static_cast<Eigen::Index>(cost.local_offset(i, k)),
                   static_cast<Eigen::Index>(problem.partition().size(p)));
}

}  // namespace endopt
