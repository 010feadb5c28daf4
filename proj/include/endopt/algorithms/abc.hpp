#pragma once

// ABC iteration on stacked estimates, with per-component matrices acting on
// the copies of each component (Kronecker lift with I_{n_p}):
//
//   y+ = A y - gamma B grad f(y) - z
//   z+ = z + C y+
//
// plus the convergence-condition checker, the AugDGM preset and its
// two-variable form, and the O(1/k) bound for the running average.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "endopt/layout.hpp"
#include "endopt/problems.hpp"

namespace endopt {

struct AbcBlock {
  Eigen::MatrixXd A, B, C, D;
};

struct AbcMatrices {
  std::vector<AbcBlock> blocks;  // one per component, N_p x N_p
  double gamma = 0.0;
};

namespace detail {

// (M kron I_{n_p}) applied to component p. Off-diagonal nonzeros count as
// reads by the row's copy of the column's copy.
inline void apply_block(const Eigen::MatrixXd& m, const StackedVector& in, StackedVector& out, std::size_t p,
                        const LocalityGuard* guard) {
  const auto& layout = in.layout();
  const auto& cs = layout.copies(p);
  const auto np = static_cast<Eigen::Index>(layout.partition().size(p));
  const auto n = static_cast<Eigen::Index>(cs.size());
  Eigen::Map<const Eigen::MatrixXd> src(in.component(p).data(), np, n);
  Eigen::Map<Eigen::MatrixXd> dst(out.component(p).data(), np, n);
  if (guard != nullptr) {
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) {
        if (m(a, b) != 0.0) guard->check(p, cs[static_cast<std::size_t>(a)], cs[static_cast<std::size_t>(b)]);
      }
    }
  }
  dst = src * m.transpose();
}

}  // namespace detail

enum class AbcMatrix { A, B, C, D };

inline StackedVector apply_abc(const AbcMatrices& m, AbcMatrix which, const StackedVector& y,
                               const LocalityGuard* guard = nullptr) {
  const auto& layout = y.layout();
  if (m.blocks.size() != layout.component_count()) throw std::invalid_argument("need one ABC block per component");
  StackedVector out(y.layout_ptr());
  for (std::size_t p = 0; p < layout.component_count(); ++p) {
    const auto& b = m.blocks[p];
    const auto& mat = which == AbcMatrix::A ? b.A : which == AbcMatrix::B ? b.B : which == AbcMatrix::C ? b.C : b.D;
    const auto n = static_cast<Eigen::Index>(layout.copy_count(p));
    if (mat.rows() != n || mat.cols() != n) {
      throw std::invalid_argument("ABC block of component " + std::to_string(p) + " does not match its copy count");
    }
    detail::apply_block(mat, y, out, p, guard);
  }
  return out;
}

struct AbcState {
  StackedVector y;
  StackedVector z;
  StackedVector running_sum;  // sum_{t=1..k} y^t
  std::size_t k = 0;

  StackedVector average() const {
    if (k == 0) return y;
    return StackedVector(y.layout_ptr(), running_sum.values() / static_cast<double>(k));
  }
};

// z^0 = 0.
inline AbcState abc_init(const StackedVector& y0) {
  return AbcState{y0, StackedVector(y0.layout_ptr()), StackedVector(y0.layout_ptr()), 0};
}

inline void abc_step(AbcState& s, const AbcMatrices& m, const SeparableCost& cost,
                     const LocalityGuard* guard = nullptr) {
  const auto g = stacked_gradient(cost, s.y);
  const auto ay = apply_abc(m, AbcMatrix::A, s.y, guard);
  const auto bg = apply_abc(m, AbcMatrix::B, g, guard);
  StackedVector next(s.y.layout_ptr(), ay.values() - m.gamma * bg.values() - s.z.values());
  const auto cy = apply_abc(m, AbcMatrix::C, next, guard);
  s.z.values() += cy.values();
  s.y = std::move(next);
  s.running_sum.values() += s.y.values();
  ++s.k;
}

struct AbcConditionReport {
  bool c1 = true, c2 = true, c3 = true, c4 = true, c5 = true;
  double lambda_low = std::numeric_limits<double>::infinity();  // min_p lambda_2(C_p) over N_p > 1
  double lambda_min_d = std::numeric_limits<double>::infinity();
  double b_minus_parallel_norm = 0.0;  // ||B - P_par||
  std::vector<std::string> failures;

  bool all_pass() const { return c1 && c2 && c3 && c4 && c5; }
  std::string describe() const {
    std::ostringstream os;
    os << "C1 " << (c1 ? "ok" : "FAIL") << ", C2 " << (c2 ? "ok" : "FAIL") << ", C3 " << (c3 ? "ok" : "FAIL")
       << ", C4 " << (c4 ? "ok" : "FAIL") << ", C5 " << (c5 ? "ok" : "FAIL");
    for (const auto& f : failures) os << "\n  " << f;
    return os.str();
  }
};

namespace detail {

inline bool is_symmetric(const Eigen::MatrixXd& m, double tol) { return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol; }

inline Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

inline AbcConditionReport check_abc_conditions(const AbcMatrices& m, const EndLayout& layout, double tol = 1e-9) {
  AbcConditionReport r;
  if (m.blocks.size() != layout.component_count()) throw std::invalid_argument("need one ABC block per component");
  auto fail = [&](bool& flag, std::size_t p, const std::string& what) {
    flag = false;
    r.failures.push_back("component " + std::to_string(p + 1) + ": " + what);
  };
  for (std::size_t p = 0; p < m.blocks.size(); ++p) {
    const auto& b = m.blocks[p];
    const auto n = static_cast<Eigen::Index>(layout.copy_count(p));
    for (const auto* mat : {&b.A, &b.B, &b.C, &b.D}) {
      if (mat->rows() != n || mat->cols() != n) {
        throw std::invalid_argument("ABC block of component " + std::to_string(p) + " does not match its copy count");
      }
    }
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);

    // C1
    if ((b.A - b.B * b.D).cwiseAbs().maxCoeff() > tol) fail(r.c1, p, "A != BD");
    if (!detail::is_symmetric(b.B, tol) || detail::sym_eigenvalues(b.B).minCoeff() < -tol) {
      fail(r.c1, p, "B is not symmetric positive semidefinite");
    }
    if (!detail::is_symmetric(b.D, tol)) {
      fail(r.c1, p, "D is not symmetric");
    } else {
      const double dmin = detail::sym_eigenvalues(b.D).minCoeff();
      r.lambda_min_d = std::min(r.lambda_min_d, dmin);
      if (dmin <= tol) fail(r.c1, p, "D is not positive definite");
    }

    // C2
    if ((b.D * ones - ones).cwiseAbs().maxCoeff() > tol) fail(r.c2, p, "D 1 != 1");
    if ((b.B * ones - ones).cwiseAbs().maxCoeff() > tol) fail(r.c2, p, "B 1 != 1");

    // C3
    if (!detail::is_symmetric(b.C, tol)) {
      fail(r.c3, p, "C is not symmetric");
    } else {
      const auto ev = detail::sym_eigenvalues(b.C);
      if (ev.minCoeff() < -tol) fail(r.c3, p, "C is not positive semidefinite");
      const auto zeros = (ev.array().abs() <= tol).count();
      if (zeros != 1) fail(r.c3, p, "null space of C has dimension " + std::to_string(zeros) + ", expected 1");
      if ((b.C * ones).cwiseAbs().maxCoeff() > tol) fail(r.c3, p, "C 1 != 0");
      if (n > 1) r.lambda_low = std::min(r.lambda_low, ev(1));
    }

    // C4
    if ((b.B * b.C - b.C * b.B).cwiseAbs().maxCoeff() > tol) fail(r.c4, p, "B and C do not commute");

    // C5
    const Eigen::MatrixXd sb = detail::sym_sqrt(b.B);
    const Eigen::MatrixXd t = id - 0.5 * b.C - sb * b.D * sb;
    if (detail::sym_eigenvalues(t).minCoeff() < -tol) fail(r.c5, p, "I - C/2 - sqrt(B) D sqrt(B) is not PSD");

    const Eigen::MatrixXd par = Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.B - par);
    r.b_minus_parallel_norm = std::max(r.b_minus_parallel_norm, svd.singularValues()(0));
  }
  return r;
}

// A = B = W^2, C = (I - W)^2, D = I, from symmetric doubly stochastic W_p.
inline AbcMatrices augdgm_matrices(const StackedWeightOperator& w, double gamma, double tol = 1e-12) {
  AbcMatrices m;
  m.gamma = gamma;
  for (std::size_t p = 0; p < w.component_count(); ++p) {
    const auto& wp = w.matrix(p).entries();
    if (!detail::is_symmetric(wp, tol)) {
      throw std::invalid_argument("AugDGM needs symmetric weights; component " + std::to_string(p) + " is not");
    }
    const auto n = wp.rows();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    if ((wp * ones - ones).cwiseAbs().maxCoeff() > 1e-9) {
      throw std::invalid_argument("AugDGM needs doubly stochastic weights; component " + std::to_string(p) + " is not");
    }
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd w2 = wp * wp;
    m.blocks.push_back({w2, w2, (id - wp) * (id - wp), id});
  }
  return m;
}

// Two-variable AugDGM: y+ = W(y - gamma v), v+ = W(v + grad f(y+) - grad f(y)).
struct AugDgmState {
  StackedVector y;
  StackedVector v;
  StackedVector grad;  // grad f(y), cached
  StackedVector running_sum;
  std::size_t k = 0;

  StackedVector average() const {
    if (k == 0) return y;
    return StackedVector(y.layout_ptr(), running_sum.values() / static_cast<double>(k));
  }
};

// y^0 = 0, v^0 = W grad f(0).
inline AugDgmState augdgm_init(const StackedWeightOperator& w, const SeparableCost& cost,
                               const LocalityGuard* guard = nullptr) {
  StackedVector y(w.layout_ptr());
  auto g = stacked_gradient(cost, y);
  auto v = apply_stacked_weights(w, g, guard);
  return AugDgmState{y, std::move(v), std::move(g), StackedVector(w.layout_ptr()), 0};
}

inline void augdgm_step(AugDgmState& s, const StackedWeightOperator& w, const SeparableCost& cost, double gamma,
                        const LocalityGuard* guard = nullptr) {
  StackedVector pre(s.y.layout_ptr(), s.y.values() - gamma * s.v.values());
  auto y_next = apply_stacked_weights(w, pre, guard);
  auto g_next = stacked_gradient(cost, y_next);
  StackedVector track(s.y.layout_ptr(), s.v.values() + g_next.values() - s.grad.values());
  s.v = apply_stacked_weights(w, track, guard);
  s.y = std::move(y_next);
  s.grad = std::move(g_next);
  s.running_sum.values() += s.y.values();
  ++s.k;
}

// k -> h(y*, 2 z*) / (2k), h(y, z) = (1/gamma) ||y^0 - y||_D^2
//                                    + gamma (||B - P_par|| / lambda_low) ||z||^2,
// z* = -grad f(y*).
class AbcRateBound {
 public:
  AbcRateBound(double h) : h_(h) {}
  double h() const { return h_; }
  double operator()(std::size_t k) const {
    if (k == 0) throw std::invalid_argument("rate bound is defined for k >= 1");
    return h_ / (2.0 * static_cast<double>(k));
  }

 private:
  double h_;
};

inline AbcRateBound abc_rate_bound(const StackedVector& y0, const StackedVector& y_star,
                                   const StackedVector& grad_at_star, const AbcMatrices& m,
                                   const AbcConditionReport& report) {
  if (!report.all_pass()) throw std::invalid_argument("ABC conditions do not hold:\n" + report.describe());
  if (!(m.gamma > 0.0)) throw std::invalid_argument("ABC step size must be positive");
  StackedVector diff(y0.layout_ptr(), y0.values() - y_star.values());
  const auto ddiff = apply_abc(m, AbcMatrix::D, diff);
  const double first = diff.values().dot(ddiff.values()) / m.gamma;
  double second = 0.0;
  if (report.b_minus_parallel_norm > 0.0) {
    const double z2 = 4.0 * grad_at_star.values().squaredNorm();
    second = m.gamma * report.b_minus_parallel_norm / report.lambda_low * z2;
  }
  return AbcRateBound(first + second);
}

}  // namespace endopt
