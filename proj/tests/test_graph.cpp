#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace endopt;
using namespace fixtures;

namespace {

// Floyd-Warshall style closure, independent of the BFS in the library.
bool brute_strongly_connected(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t v = 0; v < n; ++v) r[v][v] = true;
  for (auto [u, v] : edges) r[u][v] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (r[a][k] && r[k][b]) r[a][b] = true;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (!r[a][b]) return false;
  return true;
}

}  // namespace

TEST(DirectedGraph, InNeighborsOfRing) {
  DirectedGraph ring(3, {{0, 1}, {1, 2}, {2, 0}});
  EXPECT_EQ(ring.in_neighbors(1), (std::vector<Vertex>{0}));
  EXPECT_EQ(in_neighbors(complete_graph(3), 0), (std::vector<Vertex>{1, 2}));
  EXPECT_TRUE(DirectedGraph(3).in_neighbors(0).empty());
  EXPECT_THROW(ring.in_neighbors(7), std::invalid_argument);
}

TEST(DirectedGraph, RejectsForeignEndpointsAndDeduplicates) {
  EXPECT_THROW(DirectedGraph(2, {{0, 2}}), std::invalid_argument);
  DirectedGraph g(2, {{0, 1}, {0, 1}});
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_THROW(DirectedGraph(std::vector<Vertex>{}, {}), std::invalid_argument);
}

TEST(DirectedGraph, StrongConnectivityExamples) {
  EXPECT_TRUE(is_strongly_connected(directed_cycle(3)));
  EXPECT_FALSE(is_strongly_connected(DirectedGraph(3, {{0, 1}, {1, 2}})));
  EXPECT_TRUE(is_strongly_connected(DirectedGraph(1)));
}

TEST(DirectedGraph, StrongConnectivityMatchesClosureOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    std::vector<Edge> es;
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = 0; v < n; ++v)
        if (u != v && rng.uniform() < 0.35) es.emplace_back(u, v);
    ASSERT_EQ(is_strongly_connected(DirectedGraph(n, es)), brute_strongly_connected(n, es));
  }
}

TEST(DirectedGraph, UndirectedConnectivity) {
  EXPECT_TRUE(is_connected_undirected(DirectedGraph::undirected(4, {{0, 1}, {0, 2}, {0, 3}})));
  EXPECT_FALSE(is_connected_undirected(DirectedGraph::undirected(4, {{0, 1}, {2, 3}})));
  EXPECT_THROW(is_connected_undirected(DirectedGraph(2, {{0, 1}})), NotUndirectedError);
}

TEST(DirectedGraph, Restriction) {
  const auto r = restrict_to(directed_cycle(3), {0, 1});
  EXPECT_EQ(r, DirectedGraph(2, {{0, 1}}));
  EXPECT_EQ(restrict_to(directed_cycle(3), {0, 1, 2}), directed_cycle(3));
  EXPECT_THROW(restrict_to(directed_cycle(3), {}), std::invalid_argument);
  EXPECT_THROW(restrict_to(directed_cycle(3), {5}), std::invalid_argument);
}

TEST(DirectedGraph, NestedRestrictionEqualsInner) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = random_connected(7, 0.3, rng);
    std::vector<Vertex> outer, inner;
    for (Vertex v = 0; v < 7; ++v) {
      if (rng.uniform() < 0.7) {
        outer.push_back(v);
        if (rng.uniform() < 0.6) inner.push_back(v);
      }
    }
    if (inner.empty()) continue;
    EXPECT_EQ(restrict_to(restrict_to(g, outer), inner), restrict_to(g, inner));
  }
}

TEST(DirectedGraph, Union) {
  DirectedGraph a(std::vector<Vertex>{0, 1}, {{0, 1}});
  DirectedGraph b(std::vector<Vertex>{1, 2}, {{1, 2}});
  EXPECT_EQ(graph_union(a, b), DirectedGraph(3, {{0, 1}, {1, 2}}));
  EXPECT_EQ(graph_union(a, a), a);
  DirectedGraph c(std::vector<Vertex>{3, 4}, {{3, 4}});
  const auto u = graph_union(a, c);
  EXPECT_EQ(u.size(), 4u);
  EXPECT_EQ(u.edge_count(), 2u);
  EXPECT_FALSE(is_strongly_connected(u));
}

TEST(TimeVarying, QStrongConnectivity) {
  const auto constant = TimeVaryingGraph::periodic({directed_cycle(3)});
  EXPECT_TRUE(is_q_strongly_connected(constant, 1, 10));
  const auto alt = TimeVaryingGraph::periodic({DirectedGraph(2, {{0, 1}}), DirectedGraph(2, {{1, 0}})});
  EXPECT_TRUE(is_q_strongly_connected(alt, 2, 10));
  EXPECT_FALSE(is_q_strongly_connected(alt, 1, 10));
  EXPECT_THROW(is_q_strongly_connected(alt, 0, 10), std::invalid_argument);
  EXPECT_THROW(is_q_strongly_connected(alt, 3, 2), std::invalid_argument);
}

TEST(TimeVarying, VertexSetMustStayFixed) {
  TimeVaryingGraph bad(std::vector<Vertex>{0, 1}, [](std::size_t k) { return DirectedGraph(k == 0 ? 2 : 3); });
  EXPECT_NO_THROW(bad.at(0));
  EXPECT_THROW(bad.at(1), std::invalid_argument);
}

TEST(Bipartite, EveryComponentNeedsAnAgent) {
  EXPECT_THROW(BipartiteGraph(2, 3, {{0, 1}}), std::invalid_argument);
  BipartiteGraph g(2, 3, {{0, 1}, {1, 1}, {1, 2}});
  EXPECT_EQ(g.right_neighbors(1), (std::vector<Vertex>{1, 2}));
  EXPECT_EQ(g.left_neighbors(1), (std::vector<Vertex>{0, 1}));
  EXPECT_TRUE(g.left_neighbors(0).empty());
  EXPECT_TRUE(BipartiteGraph::complete(2, 3).is_complete());
}

TEST(Weights, MetropolisExamples) {
  const auto w = metropolis_weights(DirectedGraph::undirected(2, {{0, 1}}));
  EXPECT_TRUE(w.entries().isApprox(Eigen::MatrixXd::Constant(2, 2, 0.5)));
  EXPECT_DOUBLE_EQ(metropolis_weights(DirectedGraph(1)).entries()(0, 0), 1.0);
  const auto p = metropolis_weights(path_graph(3)).entries();
  EXPECT_DOUBLE_EQ(p(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(p(0, 1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(p(0, 0), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(p(1, 1), 1.0 / 3.0);
  EXPECT_THROW(metropolis_weights(DirectedGraph(2, {{0, 1}})), NotUndirectedError);
  EXPECT_THROW(metropolis_weights(DirectedGraph::undirected(4, {{0, 1}, {2, 3}})), std::invalid_argument);
}

TEST(Weights, MetropolisIsSymmetricDoublyStochasticAndCompliant) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = random_connected(2 + rng.below(8), 0.3, rng);
    const auto w = metropolis_weights(g);
    const auto& m = w.entries();
    EXPECT_LE((m * Eigen::VectorXd::Ones(m.rows()) - Eigen::VectorXd::Ones(m.rows())).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ((m - m.transpose()).cwiseAbs().maxCoeff(), 0.0);
    const auto sl = g.with_self_loops();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        EXPECT_EQ(m(r, c) > 0.0, sl.has_edge(static_cast<Vertex>(c), static_cast<Vertex>(r)));
  }
}

TEST(Weights, UniformColumnStochasticExamples) {
  EXPECT_DOUBLE_EQ(uniform_column_stochastic_weights(DirectedGraph(1, {{0, 0}})).entries()(0, 0), 1.0);
  const auto w = uniform_column_stochastic_weights(DirectedGraph(2, {{0, 0}, {1, 1}, {0, 1}})).entries();
  EXPECT_DOUBLE_EQ(w(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(w(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(w(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(w(1, 1), 1.0);
  const auto c = uniform_column_stochastic_weights(complete_graph(3).with_self_loops()).entries();
  EXPECT_TRUE(c.isApprox(Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0)));
  EXPECT_THROW(uniform_column_stochastic_weights(DirectedGraph(2, {{0, 1}})), std::invalid_argument);
}

TEST(Weights, ColumnSumsAndLowerBound) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(7);
    std::vector<Edge> es;
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = 0; v < n; ++v)
        if (u == v || rng.uniform() < 0.3) es.emplace_back(u, v);
    const auto m = uniform_column_stochastic_weights(DirectedGraph(n, es)).entries();
    const Eigen::RowVectorXd ones = Eigen::RowVectorXd::Ones(static_cast<Eigen::Index>(n));
    EXPECT_LE((ones * m - ones).cwiseAbs().maxCoeff(), 1e-12);
    for (Eigen::Index e = 0; e < m.size(); ++e) {
      if (m.data()[e] > 0.0) EXPECT_GE(m.data()[e], 1.0 / static_cast<double>(n));
    }
  }
}

TEST(Weights, NonCompliantMatrixRejected) {
  Eigen::MatrixXd m(2, 2);
  m << 0.5, 0.5, 0.5, 0.5;
  EXPECT_THROW(WeightMatrix(DirectedGraph(2, {{0, 0}, {1, 1}, {0, 1}}), m), std::invalid_argument);
}
