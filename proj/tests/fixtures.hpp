#pragma once

// Small instances and independent helpers shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "endopt/endopt.hpp"

namespace fixtures {

using namespace endopt;

// Five agents, two components; y_1 enters agents 1 and 3 only, which are not
// neighbors but share neighbor 2 (0-based: agents 0, 2 and 1).
inline DirectedGraph fig1_comm() { return DirectedGraph::undirected(5, {{0, 1}, {1, 2}, {1, 3}, {2, 4}, {3, 4}}); }
inline BipartiteGraph fig1_interference() { return BipartiteGraph(2, 5, {{0, 0}, {0, 2}, {1, 3}, {1, 4}}); }

inline DirectedGraph path_graph(std::size_t n) {
  std::vector<Edge> es;
  for (Vertex v = 0; v + 1 < n; ++v) es.emplace_back(v, v + 1);
  return DirectedGraph::undirected(n, es);
}

inline DirectedGraph ring_graph(std::size_t n) {
  std::vector<Edge> es;
  for (Vertex v = 0; v < n; ++v) es.emplace_back(v, (v + 1) % n);
  return DirectedGraph::undirected(n, es);
}

inline DirectedGraph directed_cycle(std::size_t n) {
  std::vector<Edge> es;
  for (Vertex v = 0; v < n; ++v) es.emplace_back(v, (v + 1) % n);
  return DirectedGraph(n, es);
}

inline DirectedGraph complete_graph(std::size_t n) {
  std::vector<Edge> es;
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = 0; v < n; ++v) {
      if (u != v) es.emplace_back(u, v);
    }
  }
  return DirectedGraph(n, es);
}

// Erdos-Renyi graph plus a random spanning path, so it is connected.
inline DirectedGraph random_connected(std::size_t n, double density, Rng& rng) {
  std::vector<Vertex> perm(n);
  for (Vertex v = 0; v < n; ++v) perm[v] = v;
  for (std::size_t a = n; a > 1; --a) std::swap(perm[a - 1], perm[rng.below(a)]);
  std::vector<Edge> es;
  for (std::size_t a = 0; a + 1 < n; ++a) es.emplace_back(perm[a], perm[a + 1]);
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) {
      if (rng.uniform() < density) es.emplace_back(u, v);
    }
  }
  return DirectedGraph::undirected(n, es);
}

// Random interference graph where every component has at least one agent.
inline BipartiteGraph random_interference(std::size_t components, std::size_t agents, double density, Rng& rng) {
  std::vector<Edge> es;
  for (std::size_t p = 0; p < components; ++p) {
    es.emplace_back(p, rng.below(agents));
    for (Vertex i = 0; i < agents; ++i) {
      if (rng.uniform() < density) es.emplace_back(p, i);
    }
  }
  return BipartiteGraph(components, agents, es);
}

inline LeastSquaresInstance random_ls(const Partition& part, const BipartiteGraph& interf, std::size_t rows,
                                      Rng& rng) {
  std::vector<LeastSquaresAgent> agents;
  for (Vertex i = 0; i < interf.right_count(); ++i) {
    std::size_t cols = 0;
    for (std::size_t p : interf.left_neighbors(i)) cols += part.size(p);
    LeastSquaresAgent a;
    a.H.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < a.H.rows(); ++r) {
      for (Eigen::Index c = 0; c < a.H.cols(); ++c) a.H(r, c) = rng.normal();
    }
    a.h.resize(static_cast<Eigen::Index>(rows));
    for (Eigen::Index r = 0; r < a.h.size(); ++r) a.h(r) = rng.normal();
    agents.push_back(std::move(a));
  }
  return LeastSquaresInstance(part, interf, std::move(agents));
}

inline StackedVector random_stacked(const LayoutPtr& layout, Rng& rng) {
  StackedVector y(layout);
  for (Eigen::Index e = 0; e < y.values().size(); ++e) y.values()(e) = rng.normal();
  return y;
}

// Explicit 0/1 matrix R with R y = stacked vector of copies (full y -> stacked).
inline Eigen::MatrixXd lift_matrix(const EndLayout& layout) {
  const auto& part = layout.partition();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(layout.stacked_size()),
                                            static_cast<Eigen::Index>(part.total()));
  Eigen::Index row = 0;
  for (std::size_t p = 0; p < layout.component_count(); ++p) {
    for (std::size_t c = 0; c < layout.copy_count(p); ++c) {
      for (std::size_t e = 0; e < part.size(p); ++e) {
        r(row++, static_cast<Eigen::Index>(part.offset(p) + e)) = 1.0;
      }
    }
  }
  return r;
}

// Unit-square geometric graph with radius r, redrawn until connected.
inline DirectedGraph random_geometric(std::size_t n, double r, Rng& rng) {
  while (true) {
    std::vector<double> x(n), y(n);
    for (std::size_t v = 0; v < n; ++v) {
      x[v] = rng.uniform();
      y[v] = rng.uniform();
    }
    std::vector<Edge> es;
    for (Vertex u = 0; u < n; ++u) {
      for (Vertex v = u + 1; v < n; ++v) {
        if (std::hypot(x[u] - x[v], y[u] - y[v]) <= r) es.emplace_back(u, v);
      }
    }
    auto g = DirectedGraph::undirected(n, es);
    if (is_connected_undirected(g)) return g;
  }
}

// Smallest vertex superset of the terminals whose induced subgraph satisfies
// the predicate, by enumerating all subsets (n <= 16).
template <class Pred>
std::size_t brute_min_cover(const DirectedGraph& g, const std::vector<Vertex>& terminals, Pred connected) {
  const std::size_t n = g.size();
  std::size_t must = 0;
  for (Vertex t : terminals) must |= std::size_t{1} << t;
  std::size_t best = n + 1;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    if ((mask & must) != must) continue;
    const auto count = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (count >= best) continue;
    std::vector<Vertex> s;
    for (Vertex v = 0; v < n; ++v) {
      if (mask >> v & 1U) s.push_back(v);
    }
    if (connected(restrict_to(g, s))) best = count;
  }
  return best;
}

inline double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace fixtures
