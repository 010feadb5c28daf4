#pragma once

// The END information structure: agents, the partition of the variable of
// interest, and the four graph families (communication, interference,
// estimate, per-component design). Plus the stacked-vector algebra built on
// top of it.
//
// Storage convention: the copies of component p are ordered by ascending
// agent id, and the stacked vector stores component blocks contiguously
// (all copies of component 0, then all copies of component 1, ...).

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "endopt/graph.hpp"

namespace endopt {

class Partition {
 public:
  explicit Partition(std::vector<std::size_t> block_sizes) : sizes_(std::move(block_sizes)) {
    if (sizes_.empty()) throw std::invalid_argument("partition needs at least one block");
    offsets_.resize(sizes_.size());
    std::size_t acc = 0;
    for (std::size_t p = 0; p < sizes_.size(); ++p) {
      if (sizes_[p] == 0) throw std::invalid_argument("partition block " + std::to_string(p) + " has size 0");
      offsets_[p] = acc;
      acc += sizes_[p];
    }
    total_ = acc;
  }

  // P components, each of size `block`.
  static Partition uniform(std::size_t count, std::size_t block = 1) {
    return Partition(std::vector<std::size_t>(count, block));
  }

  std::size_t count() const { return sizes_.size(); }
  std::size_t size(std::size_t p) const { return sizes_.at(p); }
  std::size_t offset(std::size_t p) const { return offsets_.at(p); }
  std::size_t total() const { return total_; }
  const std::vector<std::size_t>& sizes() const { return sizes_; }

  friend bool operator==(const Partition& a, const Partition& b) { return a.sizes_ == b.sizes_; }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

class EndLayout {
 public:
  // Structural invariants are enforced here (sizes agree, design graph p lives
  // exactly on the copy set of p). Standing-assumption checks are left to
  // validate() so that all violations can be reported together.
  EndLayout(Partition partition, DirectedGraph comm, BipartiteGraph interference, BipartiteGraph estimate,
            std::vector<DirectedGraph> design)
      : partition_(std::move(partition)),
        comm_(std::move(comm)),
        interference_(std::move(interference)),
        estimate_(std::move(estimate)),
        design_(std::move(design)) {
    const auto n = comm_.size();
    const auto pc = partition_.count();
    for (std::size_t a = 0; a < n; ++a) {
      if (comm_.vertices()[a] != a) throw std::invalid_argument("communication graph must use agents 0..N-1");
    }
    if (interference_.left_count() != pc || interference_.right_count() != n) {
      throw std::invalid_argument("interference graph dimensions do not match the layout");
    }
    if (estimate_.left_count() != pc || estimate_.right_count() != n) {
      throw std::invalid_argument("estimate graph dimensions do not match the layout");
    }
    if (design_.size() != pc) throw std::invalid_argument("need one design graph per component");
    offsets_.resize(pc);
    std::size_t acc = 0;
    for (std::size_t p = 0; p < pc; ++p) {
      if (design_[p].vertices() != estimate_.right_neighbors(p)) {
        throw std::invalid_argument("design graph of component " + std::to_string(p) +
                                    " must have the copy set of that component as vertex set");
      }
      offsets_[p] = acc;
      acc += copy_count(p) * partition_.size(p);
    }
    stacked_size_ = acc;
  }

  std::size_t agent_count() const { return comm_.size(); }
  std::size_t component_count() const { return partition_.count(); }
  const Partition& partition() const { return partition_; }
  const DirectedGraph& comm() const { return comm_; }
  const BipartiteGraph& interference() const { return interference_; }
  const BipartiteGraph& estimate() const { return estimate_; }
  const DirectedGraph& design(std::size_t p) const { return design_.at(p); }
  const std::vector<DirectedGraph>& designs() const { return design_; }

  // Agents holding a copy of component p, ascending.
  const std::vector<Vertex>& copies(std::size_t p) const { return estimate_.right_neighbors(p); }
  std::size_t copy_count(std::size_t p) const { return copies(p).size(); }
  // Components agent i keeps a copy of, ascending.
  const std::vector<Vertex>& estimated_components(Vertex i) const { return estimate_.left_neighbors(i); }
  const std::vector<Vertex>& interfering_components(Vertex i) const { return interference_.left_neighbors(i); }

  bool estimates(Vertex i, std::size_t p) const { return estimate_.has_edge(p, i); }

  // Rank of agent i among the copies of p (0-based).
  std::size_t local_index(std::size_t p, Vertex i) const {
    if (p >= component_count()) throw std::out_of_range("component " + std::to_string(p) + " out of range");
    const auto& cs = copies(p);
    auto it = std::lower_bound(cs.begin(), cs.end(), i);
    if (it == cs.end() || *it != i) {
      throw std::invalid_argument("agent " + std::to_string(i) + " does not estimate component " + std::to_string(p));
    }
    return static_cast<std::size_t>(it - cs.begin());
  }

  std::size_t stacked_size() const { return stacked_size_; }
  std::size_t component_offset(std::size_t p) const { return offsets_.at(p); }
  std::size_t block_offset(std::size_t p, std::size_t local) const {
    return offsets_.at(p) + local * partition_.size(p);
  }

 private:
  Partition partition_;
  DirectedGraph comm_;
  BipartiteGraph interference_;
  BipartiteGraph estimate_;
  std::vector<DirectedGraph> design_;
  std::vector<std::size_t> offsets_;
  std::size_t stacked_size_ = 0;
};

using LayoutPtr = std::shared_ptr<const EndLayout>;

// Two layouts index stacked vectors identically.
inline bool same_structure(const EndLayout& a, const EndLayout& b) {
  return &a == &b || (a.partition() == b.partition() && a.estimate() == b.estimate());
}

inline LayoutPtr share(EndLayout layout) { return std::make_shared<const EndLayout>(std::move(layout)); }

inline std::size_t local_index(const EndLayout& layout, std::size_t p, Vertex i) { return layout.local_index(p, i); }

struct ComponentStatus {
  bool undirected = false;
  bool connected = false;  // meaningful only when undirected
  bool strongly_connected = false;
};

struct ValidationReport {
  // Standing assumption: interference inside estimate, design inside comm.
  std::vector<Edge> missing_estimates;                           // (p, i) in G_I but not in G_E
  std::vector<std::tuple<std::size_t, Vertex, Vertex>> foreign_design_edges;  // (p, u, v) not in G_C
  // Connectivity assumption per component (advisory).
  std::vector<ComponentStatus> components;

  bool consistent() const { return missing_estimates.empty() && foreign_design_edges.empty(); }
  bool all_undirected_connected() const {
    for (const auto& c : components) {
      if (!(c.undirected && c.connected)) return false;
    }
    return true;
  }
  bool all_strongly_connected() const {
    for (const auto& c : components) {
      if (!c.strongly_connected) return false;
    }
    return true;
  }

  std::string describe() const {
    std::ostringstream os;
    for (auto [p, i] : missing_estimates) {
      os << "standing assumption: agent " << i + 1 << " needs component " << p + 1 << " but does not estimate it\n";
    }
    for (auto [p, u, v] : foreign_design_edges) {
      os << "standing assumption: design edge " << u + 1 << "->" << v + 1 << " of component " << p + 1
         << " is not a communication edge\n";
    }
    for (std::size_t p = 0; p < components.size(); ++p) {
      const auto& c = components[p];
      if (!c.undirected) {
        os << "component " << p + 1 << ": design graph is directed"
           << (c.strongly_connected ? " (strongly connected)" : " (not strongly connected)") << '\n';
      } else if (!c.connected) {
        os << "component " << p + 1 << ": design graph is disconnected\n";
      }
    }
    return os.str();
  }
};

// Self-loops are not communication and are ignored for the G_C inclusion test.
inline ValidationReport validate(const EndLayout& layout) {
  ValidationReport rep;
  for (auto [p, i] : layout.interference().edges()) {
    if (!layout.estimate().has_edge(p, i)) rep.missing_estimates.emplace_back(p, i);
  }
  for (std::size_t p = 0; p < layout.component_count(); ++p) {
    const auto& g = layout.design(p);
    for (auto [u, v] : g.edges()) {
      if (u != v && !layout.comm().has_edge(u, v)) rep.foreign_design_edges.emplace_back(p, u, v);
    }
    ComponentStatus st;
    st.undirected = g.is_symmetric();
    st.connected = st.undirected && is_connected_undirected(g);
    st.strongly_connected = is_strongly_connected(g);
    rep.components.push_back(st);
  }
  return rep;
}

inline void require_consistent(const EndLayout& layout) {
  auto rep = validate(layout);
  if (!rep.consistent()) throw std::invalid_argument("layout violates the standing assumption:\n" + rep.describe());
}

// Block vector holding every estimate y_{i,p}.
class StackedVector {
 public:
  explicit StackedVector(LayoutPtr layout)
      : layout_(std::move(layout)), values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout_->stacked_size()))) {}

  StackedVector(LayoutPtr layout, Eigen::VectorXd values) : layout_(std::move(layout)), values_(std::move(values)) {
    if (values_.size() != static_cast<Eigen::Index>(layout_->stacked_size())) {
      throw std::invalid_argument("stacked vector length does not match the layout");
    }
  }

  const EndLayout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  // Copy of component p kept by agent i.
  using Segment = Eigen::VectorBlock<Eigen::VectorXd>;
  using ConstSegment = Eigen::VectorBlock<const Eigen::VectorXd>;

  Segment block(std::size_t p, Vertex i) { return local_block(p, layout_->local_index(p, i)); }
  ConstSegment block(std::size_t p, Vertex i) const { return local_block(p, layout_->local_index(p, i)); }

  Segment local_block(std::size_t p, std::size_t local) {
    return values_.segment(static_cast<Eigen::Index>(layout_->block_offset(p, local)),
                           static_cast<Eigen::Index>(layout_->partition().size(p)));
  }
  ConstSegment local_block(std::size_t p, std::size_t local) const {
    return values_.segment(static_cast<Eigen::Index>(layout_->block_offset(p, local)),
                           static_cast<Eigen::Index>(layout_->partition().size(p)));
  }

  // All copies of component p.
  Segment component(std::size_t p) {
    return values_.segment(static_cast<Eigen::Index>(layout_->component_offset(p)),
                           static_cast<Eigen::Index>(layout_->copy_count(p) * layout_->partition().size(p)));
  }
  ConstSegment component(std::size_t p) const {
    return values_.segment(static_cast<Eigen::Index>(layout_->component_offset(p)),
                           static_cast<Eigen::Index>(layout_->copy_count(p) * layout_->partition().size(p)));
  }

  bool same_layout(const StackedVector& other) const { return same_structure(*layout_, *other.layout_); }

 private:
  LayoutPtr layout_;
  Eigen::VectorXd values_;
};

inline Eigen::VectorXd select(const StackedVector& y, std::size_t p, Vertex i) {
  if (p >= y.layout().component_count()) throw std::out_of_range("component " + std::to_string(p) + " out of range");
  return y.block(p, i);
}

// Estimates kept by agent i, keyed by component in ascending order.
inline std::map<std::size_t, Eigen::VectorXd> agent_view(const StackedVector& y, Vertex i) {
  if (i >= y.layout().agent_count()) throw std::out_of_range("agent " + std::to_string(i) + " out of range");
  std::map<std::size_t, Eigen::VectorXd> view;
  for (std::size_t p : y.layout().estimated_components(i)) view.emplace(p, y.block(p, i));
  return view;
}

// Every copy of component p set to y_p.
inline StackedVector lift(LayoutPtr layout, const Eigen::VectorXd& y) {
  const auto& part = layout->partition();
  if (y.size() != static_cast<Eigen::Index>(part.total())) {
    throw std::invalid_argument("vector length " + std::to_string(y.size()) + " does not match n_y=" +
                                std::to_string(part.total()));
  }
  StackedVector out(layout);
  for (std::size_t p = 0; p < part.count(); ++p) {
    auto yp = y.segment(static_cast<Eigen::Index>(part.offset(p)), static_cast<Eigen::Index>(part.size(p)));
    for (std::size_t c = 0; c < layout->copy_count(p); ++c) out.local_block(p, c) = yp;
  }
  return out;
}

// Per-component average of the copies, as a vector of length n_y.
inline Eigen::VectorXd block_averages(const StackedVector& y) {
  const auto& layout = y.layout();
  const auto& part = layout.partition();
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(part.total()));
  for (std::size_t p = 0; p < part.count(); ++p) {
    auto seg = avg.segment(static_cast<Eigen::Index>(part.offset(p)), static_cast<Eigen::Index>(part.size(p)));
    for (std::size_t c = 0; c < layout.copy_count(p); ++c) seg += y.local_block(p, c);
    seg /= static_cast<double>(layout.copy_count(p));
  }
  return avg;
}

struct ConsensusSplit {
  StackedVector parallel;
  StackedVector orthogonal;
};

inline ConsensusSplit consensus_project(const StackedVector& y) {
  StackedVector par = lift(y.layout_ptr(), block_averages(y));
  StackedVector orth(y.layout_ptr(), y.values() - par.values());
  return {std::move(par), std::move(orth)};
}

inline double consensus_residual(const StackedVector& y) { return consensus_project(y).orthogonal.values().norm(); }

// Norm of diag((1/N_p) I) applied to the orthogonal part.
inline double weighted_consensus_residual(const StackedVector& y) {
  auto orth = consensus_project(y).orthogonal;
  const auto& layout = y.layout();
  for (std::size_t p = 0; p < layout.component_count(); ++p) {
    orth.component(p) /= static_cast<double>(layout.copy_count(p));
  }
  return orth.values().norm();
}

// Records reads of another agent's data and flags those that do not travel
// along an edge of the allowed (design) graph of that component.
struct IllegalRead {
  std::size_t component;
  Vertex reader;
  Vertex owner;
};

struct ReadLog {
  std::size_t reads = 0;
  std::vector<IllegalRead> violations;
};

class LocalityGuard {
 public:
  LocalityGuard(const std::vector<DirectedGraph>& allowed, ReadLog& log) : allowed_(&allowed), log_(&log) {}

  void check(std::size_t p, Vertex reader, Vertex owner) const {
    ++log_->reads;
    if (reader == owner) return;
    const auto& g = (*allowed_)[p];
    if (!g.contains(reader) || !g.contains(owner) || !g.has_edge(owner, reader)) {
      log_->violations.push_back({p, reader, owner});
    }
  }

 private:
  const std::vector<DirectedGraph>* allowed_;
  ReadLog* log_;
};

inline void guard_read(const LocalityGuard* guard, std::size_t p, Vertex reader, Vertex owner) {
  if (guard != nullptr) guard->check(p, reader, owner);
}

// Per-component weight matrices, one for each copy set.
class StackedWeightOperator {
 public:
  StackedWeightOperator(LayoutPtr layout, std::vector<WeightMatrix> matrices)
      : layout_(std::move(layout)), matrices_(std::move(matrices)) {
    if (matrices_.size() != layout_->component_count()) {
      throw std::invalid_argument("need one weight matrix per component");
    }
    for (std::size_t p = 0; p < matrices_.size(); ++p) {
      if (matrices_[p].graph().vertices() != layout_->copies(p)) {
        throw std::invalid_argument("weight matrix of component " + std::to_string(p) +
                                    " is not defined on the copy set");
      }
    }
  }

  const EndLayout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }
  const WeightMatrix& matrix(std::size_t p) const { return matrices_.at(p); }
  std::size_t component_count() const { return matrices_.size(); }

 private:
  LayoutPtr layout_;
  std::vector<WeightMatrix> matrices_;
};

// Metropolis weights on every (undirected, connected) design graph.
inline StackedWeightOperator metropolis_operator(LayoutPtr layout) {
  std::vector<WeightMatrix> ws;
  for (std::size_t p = 0; p < layout->component_count(); ++p) ws.push_back(metropolis_weights(layout->design(p)));
  return StackedWeightOperator(std::move(layout), std::move(ws));
}

// Uniform column-stochastic weights on the given per-component graphs
// (each needs self-loops).
inline StackedWeightOperator column_stochastic_operator(LayoutPtr layout, const std::vector<DirectedGraph>& graphs) {
  std::vector<WeightMatrix> ws;
  for (const auto& g : graphs) ws.push_back(uniform_column_stochastic_weights(g));
  return StackedWeightOperator(std::move(layout), std::move(ws));
}

// Copy (i,p) receives sum_j [W_p]_{i_p,j_p} y_{j,p} over the in-neighbors j of
// i in W_p's graph. Every read passes through the guard when one is given.
inline StackedVector apply_stacked_weights(const StackedWeightOperator& w, const StackedVector& y,
                                           const LocalityGuard* guard = nullptr) {
  if (!same_structure(y.layout(), w.layout())) {
    throw std::invalid_argument("weight operator and stacked vector use different layouts");
  }
  StackedVector out(y.layout_ptr());
  const auto& layout = y.layout();
  for (std::size_t p = 0; p < layout.component_count(); ++p) {
    const auto& wm = w.matrix(p);
    const auto& g = wm.graph();
    const auto& m = wm.entries();
    const auto& cs = layout.copies(p);
    for (std::size_t a = 0; a < cs.size(); ++a) {
      auto dst = out.local_block(p, a);
      for (Vertex j : g.in_neighbors(cs[a])) {
        guard_read(guard, p, cs[a], j);
        const auto b = g.position(j);
        dst += m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * y.local_block(p, b);
      }
    }
  }
  return out;
}

// Scalar per-copy quantities (one value per (i,p)), mixed the same way.
using CopyScalars = std::vector<Eigen::VectorXd>;

inline CopyScalars apply_stacked_weights(const StackedWeightOperator& w, const CopyScalars& q,
                                         const LocalityGuard* guard = nullptr) {
  const auto& layout = w.layout();
  CopyScalars out(q.size());
  for (std::size_t p = 0; p < layout.component_count(); ++p) {
    const auto& wm = w.matrix(p);
    const auto& g = wm.graph();
    const auto& cs = layout.copies(p);
    out[p] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cs.size()));
    for (std::size_t a = 0; a < cs.size(); ++a) {
      for (Vertex j : g.in_neighbors(cs[a])) {
        guard_read(guard, p, cs[a], j);
        const auto b = static_cast<Eigen::Index>(g.position(j));
        out[p](static_cast<Eigen::Index>(a)) += wm.entries()(static_cast<Eigen::Index>(a), b) * q[p](b);
      }
    }
  }
  return out;
}

}  // namespace endopt
