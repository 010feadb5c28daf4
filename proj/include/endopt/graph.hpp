#pragma once

// Directed, bipartite and time-varying graphs plus the weight-matrix
// constructors shared by the layout, design and algorithm code.
//
// Vertices are dense non-negative integers. A DirectedGraph keeps an ordered
// vertex set (which need not be 0..V-1: design graphs live on a subset of the
// agents) and exposes position(v), the rank of v inside that set, which is the
// row/column index used by WeightMatrix.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace endopt {

using Vertex = std::size_t;
using Edge = std::pair<Vertex, Vertex>;  // (u, v): v can receive from u

// Raised by is_connected_undirected() and friends when the input has an edge
// without its reverse. Kept distinct from "disconnected", which is a plain
// false result.
class NotUndirectedError : public std::invalid_argument {
 public:
  explicit NotUndirectedError(const std::string& what) : std::invalid_argument(what) {}
};

class DirectedGraph {
 public:
  // Vertices 0..vertex_count-1, no edges.
  explicit DirectedGraph(std::size_t vertex_count, std::vector<Edge> edges = {}) {
    vertices_.resize(vertex_count);
    for (std::size_t v = 0; v < vertex_count; ++v) vertices_[v] = v;
    init(std::move(edges));
  }

  DirectedGraph(std::vector<Vertex> vertices, std::vector<Edge> edges) : vertices_(std::move(vertices)) {
    std::sort(vertices_.begin(), vertices_.end());
    vertices_.erase(std::unique(vertices_.begin(), vertices_.end()), vertices_.end());
    init(std::move(edges));
  }

  // Symmetric closure of the given edge list.
  static DirectedGraph undirected(std::vector<Vertex> vertices, const std::vector<Edge>& edges) {
    std::vector<Edge> both;
    both.reserve(2 * edges.size());
    for (auto [u, v] : edges) {
      both.emplace_back(u, v);
      both.emplace_back(v, u);
    }
    return DirectedGraph(std::move(vertices), std::move(both));
  }
  static DirectedGraph undirected(std::size_t vertex_count, const std::vector<Edge>& edges) {
    std::vector<Vertex> vs(vertex_count);
    for (std::size_t v = 0; v < vertex_count; ++v) vs[v] = v;
    return undirected(std::move(vs), edges);
  }

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t size() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  bool contains(Vertex v) const { return std::binary_search(vertices_.begin(), vertices_.end(), v); }

  std::size_t position(Vertex v) const {
    auto it = std::lower_bound(vertices_.begin(), vertices_.end(), v);
    if (it == vertices_.end() || *it != v) {
      throw std::invalid_argument("vertex " + std::to_string(v) + " is not in the graph");
    }
    return static_cast<std::size_t>(it - vertices_.begin());
  }

  bool has_edge(Vertex u, Vertex v) const { return std::binary_search(edges_.begin(), edges_.end(), Edge{u, v}); }

  // Sorted ascending.
  const std::vector<Vertex>& in_neighbors(Vertex v) const { return in_[position(v)]; }
  const std::vector<Vertex>& out_neighbors(Vertex v) const { return out_[position(v)]; }

  bool is_symmetric() const {
    for (auto [u, v] : edges_) {
      if (!has_edge(v, u)) return false;
    }
    return true;
  }

  bool has_self_loop(Vertex v) const { return has_edge(v, v); }

  DirectedGraph with_self_loops() const {
    std::vector<Edge> es = edges_;
    for (Vertex v : vertices_) es.emplace_back(v, v);
    return DirectedGraph(vertices_, std::move(es));
  }

  DirectedGraph without_self_loops() const {
    std::vector<Edge> es;
    for (auto e : edges_) {
      if (e.first != e.second) es.push_back(e);
    }
    return DirectedGraph(vertices_, std::move(es));
  }

  // Subgraph relation: vertex and edge inclusion.
  bool is_subgraph_of(const DirectedGraph& other) const {
    return std::includes(other.vertices_.begin(), other.vertices_.end(), vertices_.begin(), vertices_.end()) &&
           std::includes(other.edges_.begin(), other.edges_.end(), edges_.begin(), edges_.end());
  }

  friend bool operator==(const DirectedGraph& a, const DirectedGraph& b) {
    return a.vertices_ == b.vertices_ && a.edges_ == b.edges_;
  }

 private:
  void init(std::vector<Edge> edges) {
    if (vertices_.empty()) throw std::invalid_argument("a graph needs a nonempty vertex set");
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);
    in_.assign(vertices_.size(), {});
    out_.assign(vertices_.size(), {});
    for (auto [u, v] : edges_) {
      if (!contains(u) || !contains(v)) {
        throw std::invalid_argument("edge (" + std::to_string(u) + "," + std::to_string(v) +
                                    ") has an endpoint outside the vertex set");
      }
      out_[position(u)].push_back(v);
      in_[position(v)].push_back(u);
    }
    for (auto& l : in_) std::sort(l.begin(), l.end());
  }

  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Vertex>> in_;
  std::vector<std::vector<Vertex>> out_;
};

inline std::vector<Vertex> in_neighbors(const DirectedGraph& g, Vertex v) { return g.in_neighbors(v); }
inline std::vector<Vertex> out_neighbors(const DirectedGraph& g, Vertex v) { return g.out_neighbors(v); }

namespace detail {

// Positions reachable from `start` following edges forward (or backward).
inline std::vector<bool> reachable(const DirectedGraph& g, Vertex start, bool forward) {
  std::vector<bool> seen(g.size(), false);
  std::queue<Vertex> frontier;
  seen[g.position(start)] = true;
  frontier.push(start);
  while (!frontier.empty()) {
    Vertex u = frontier.front();
    frontier.pop();
    const auto& next = forward ? g.out_neighbors(u) : g.in_neighbors(u);
    for (Vertex w : next) {
      auto pw = g.position(w);
      if (!seen[pw]) {
        seen[pw] = true;
        frontier.push(w);
      }
    }
  }
  return seen;
}

}  // namespace detail

inline bool is_strongly_connected(const DirectedGraph& g) {
  Vertex root = g.vertices().front();
  auto fwd = detail::reachable(g, root, true);
  auto bwd = detail::reachable(g, root, false);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

inline bool is_connected_undirected(const DirectedGraph& g) {
  if (!g.is_symmetric()) throw NotUndirectedError("graph has a directed-only edge");
  auto fwd = detail::reachable(g, g.vertices().front(), true);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; });
}

// g|_subset: keeps edges with both endpoints in the subset.
inline DirectedGraph restrict_to(const DirectedGraph& g, std::vector<Vertex> subset) {
  if (subset.empty()) throw std::invalid_argument("restriction to an empty vertex set");
  for (Vertex v : subset) {
    if (!g.contains(v)) throw std::invalid_argument("restriction set is not contained in the vertex set");
  }
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  std::vector<Edge> es;
  for (auto [u, v] : g.edges()) {
    if (std::binary_search(subset.begin(), subset.end(), u) && std::binary_search(subset.begin(), subset.end(), v)) {
      es.emplace_back(u, v);
    }
  }
  return DirectedGraph(std::move(subset), std::move(es));
}

inline DirectedGraph graph_union(const DirectedGraph& a, const DirectedGraph& b) {
  std::vector<Vertex> vs = a.vertices();
  vs.insert(vs.end(), b.vertices().begin(), b.vertices().end());
  std::vector<Edge> es = a.edges();
  es.insert(es.end(), b.edges().begin(), b.edges().end());
  return DirectedGraph(std::move(vs), std::move(es));
}

// Same vertex set as `a`, edges present in both graphs.
inline DirectedGraph edge_intersection(const DirectedGraph& a, const DirectedGraph& b) {
  std::vector<Edge> es;
  std::set_intersection(a.edges().begin(), a.edges().end(), b.edges().begin(), b.edges().end(),
                        std::back_inserter(es));
  return DirectedGraph(a.vertices(), std::move(es));
}

// Mutual edges only: (u,v) kept iff (v,u) is also present.
inline DirectedGraph symmetric_part(const DirectedGraph& g) {
  std::vector<Edge> es;
  for (auto [u, v] : g.edges()) {
    if (g.has_edge(v, u)) es.emplace_back(u, v);
  }
  return DirectedGraph(g.vertices(), std::move(es));
}

// Bipartite graph between left vertices 0..left_count-1 (components) and right
// vertices 0..right_count-1 (agents). Every left vertex has a right neighbor.
class BipartiteGraph {
 public:
  BipartiteGraph(std::size_t left_count, std::size_t right_count, std::vector<Edge> edges)
      : left_count_(left_count), right_count_(right_count) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);
    out_.assign(left_count_, {});
    in_.assign(right_count_, {});
    for (auto [p, i] : edges_) {
      if (p >= left_count_ || i >= right_count_) {
        throw std::invalid_argument("bipartite edge (" + std::to_string(p) + "," + std::to_string(i) +
                                    ") is out of range");
      }
      out_[p].push_back(i);
      in_[i].push_back(p);
    }
    for (auto& l : in_) std::sort(l.begin(), l.end());
    for (std::size_t p = 0; p < left_count_; ++p) {
      if (out_[p].empty()) {
        throw std::invalid_argument("left vertex " + std::to_string(p) + " has no right neighbor");
      }
    }
  }

  // Complete bipartite graph left x right.
  static BipartiteGraph complete(std::size_t left_count, std::size_t right_count) {
    std::vector<Edge> es;
    for (std::size_t p = 0; p < left_count; ++p) {
      for (std::size_t i = 0; i < right_count; ++i) es.emplace_back(p, i);
    }
    return BipartiteGraph(left_count, right_count, std::move(es));
  }

  std::size_t left_count() const { return left_count_; }
  std::size_t right_count() const { return right_count_; }
  const std::vector<Edge>& edges() const { return edges_; }

  // Right neighbors of left vertex p (agents touching component p), ascending.
  const std::vector<Vertex>& right_neighbors(std::size_t p) const { return out_.at(p); }
  // Left neighbors of right vertex i (components of agent i), ascending.
  const std::vector<Vertex>& left_neighbors(std::size_t i) const { return in_.at(i); }

  bool has_edge(std::size_t p, std::size_t i) const {
    return std::binary_search(edges_.begin(), edges_.end(), Edge{p, i});
  }

  bool is_subgraph_of(const BipartiteGraph& other) const {
    return left_count_ == other.left_count_ && right_count_ == other.right_count_ &&
           std::includes(other.edges_.begin(), other.edges_.end(), edges_.begin(), edges_.end());
  }

  bool is_complete() const { return edges_.size() == left_count_ * right_count_; }

  friend bool operator==(const BipartiteGraph& a, const BipartiteGraph& b) {
    return a.left_count_ == b.left_count_ && a.right_count_ == b.right_count_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t left_count_;
  std::size_t right_count_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Vertex>> out_;
  std::vector<std::vector<Vertex>> in_;
};

// Dense weight matrix compliant with its graph: entry (pos u, pos v) is
// positive iff (v, u) is an edge.
class WeightMatrix {
 public:
  WeightMatrix(DirectedGraph graph, Eigen::MatrixXd entries) : graph_(std::move(graph)), entries_(std::move(entries)) {
    const auto n = static_cast<Eigen::Index>(graph_.size());
    if (entries_.rows() != n || entries_.cols() != n) {
      throw std::invalid_argument("weight matrix size does not match the vertex count");
    }
    const auto& vs = graph_.vertices();
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) {
        const double w = entries_(r, c);
        const bool edge = graph_.has_edge(vs[static_cast<std::size_t>(c)], vs[static_cast<std::size_t>(r)]);
        if (w < 0.0 || (w > 0.0) != edge) {
          throw std::invalid_argument("weight matrix is not compliant with its graph at (" + std::to_string(vs[r]) +
                                      "," + std::to_string(vs[c]) + ")");
        }
      }
    }
  }

  const DirectedGraph& graph() const { return graph_; }
  const Eigen::MatrixXd& entries() const { return entries_; }
  std::size_t size() const { return graph_.size(); }

  // Weight applied by `receiver` to data from `sender` (agent ids).
  double weight(Vertex receiver, Vertex sender) const {
    return entries_(static_cast<Eigen::Index>(graph_.position(receiver)),
                    static_cast<Eigen::Index>(graph_.position(sender)));
  }

 private:
  DirectedGraph graph_;
  Eigen::MatrixXd entries_;
};

// Symmetric doubly stochastic weights on an undirected connected graph.
// Self-loops in the input are ignored for the degree count and added to the
// returned matrix's graph.
inline WeightMatrix metropolis_weights(const DirectedGraph& g) {
  if (!is_connected_undirected(g)) throw std::invalid_argument("metropolis weights need a connected graph");
  const auto n = g.size();
  const auto& vs = g.vertices();
  std::vector<double> deg(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (Vertex u : g.in_neighbors(vs[a])) {
      if (u != vs[a]) deg[a] += 1.0;
    }
  }
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (auto [u, v] : g.edges()) {
    if (u == v) continue;
    const auto pu = g.position(u);
    const auto pv = g.position(v);
    w(static_cast<Eigen::Index>(pv), static_cast<Eigen::Index>(pu)) = 1.0 / (1.0 + std::max(deg[pu], deg[pv]));
  }
  for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(n); ++a) {
    w(a, a) = 0.0;
    w(a, a) = 1.0 - w.row(a).sum();
  }
  return WeightMatrix(g.with_self_loops(), std::move(w));
}

// Column v holds 1/|out(v)| on each out-neighbor of v (self-loop included).
inline WeightMatrix uniform_column_stochastic_weights(const DirectedGraph& g) {
  const auto& vs = g.vertices();
  for (Vertex v : vs) {
    if (!g.has_self_loop(v)) throw std::invalid_argument("vertex " + std::to_string(v) + " is missing its self-loop");
  }
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t c = 0; c < vs.size(); ++c) {
    const auto& outs = g.out_neighbors(vs[c]);
    const double share = 1.0 / static_cast<double>(outs.size());
    for (Vertex u : outs) w(static_cast<Eigen::Index>(g.position(u)), static_cast<Eigen::Index>(c)) = share;
  }
  return WeightMatrix(g, std::move(w));
}

// Fixed vertex set, edge set supplied per iteration.
class TimeVaryingGraph {
 public:
  using Sequence = std::function<DirectedGraph(std::size_t)>;

  TimeVaryingGraph(std::vector<Vertex> vertices, Sequence sequence)
      : vertices_(std::move(vertices)), sequence_(std::move(sequence)) {
    std::sort(vertices_.begin(), vertices_.end());
  }

  // Cycles through `graphs` with period graphs.size().
  static TimeVaryingGraph periodic(std::vector<DirectedGraph> graphs) {
    if (graphs.empty()) throw std::invalid_argument("periodic sequence needs at least one graph");
    auto vs = graphs.front().vertices();
    for (const auto& g : graphs) {
      if (g.vertices() != vs) throw std::invalid_argument("periodic sequence changes the vertex set");
    }
    return TimeVaryingGraph(vs, [gs = std::move(graphs)](std::size_t k) { return gs[k % gs.size()]; });
  }

  const std::vector<Vertex>& vertices() const { return vertices_; }

  DirectedGraph at(std::size_t k) const {
    DirectedGraph g = sequence_(k);
    if (g.vertices() != vertices_) {
      throw std::invalid_argument("time-varying graph changes its vertex set at k=" + std::to_string(k));
    }
    return g;
  }

 private:
  std::vector<Vertex> vertices_;
  Sequence sequence_;
};

// Union over each complete window [kQ, (k+1)Q-1] inside [0, horizon) must be
// strongly connected.
inline bool is_q_strongly_connected(const TimeVaryingGraph& tv, long long q, std::size_t horizon) {
  if (q <= 0) throw std::invalid_argument("window length q must be positive");
  const auto window = static_cast<std::size_t>(q);
  if (horizon < window) throw std::invalid_argument("horizon shorter than one window");
  for (std::size_t start = 0; start + window <= horizon; start += window) {
    DirectedGraph acc = tv.at(start);
    for (std::size_t t = start + 1; t < start + window; ++t) acc = graph_union(acc, tv.at(t));
    if (!is_strongly_connected(acc)) return false;
  }
  return true;
}

}  // namespace endopt
