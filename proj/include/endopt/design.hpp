#pragma once

// Synthesis of estimate and design graphs from (G_C, G_I): the standard
// choice, Steiner-type minimal-copy heuristics, time-varying intersections,
// and memory/communication cost metrics.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "endopt/graph.hpp"
#include "endopt/layout.hpp"

namespace endopt {

enum class DesignMode { standard, steiner_undirected, steiner_directed };
enum class EdgePolicy { all_available, tree_only };

struct DesignSpec {
  DesignMode mode = DesignMode::standard;
  EdgePolicy edge_policy = EdgePolicy::all_available;
};

inline std::string to_string(DesignMode m) {
  switch (m) {
    case DesignMode::standard:
      return "standard";
    case DesignMode::steiner_undirected:
      return "steiner_undirected";
    case DesignMode::steiner_directed:
      return "steiner_directed";
  }
  return "unknown";
}

inline DesignMode parse_design_mode(const std::string& s) {
  if (s == "standard") return DesignMode::standard;
  if (s == "steiner_undirected") return DesignMode::steiner_undirected;
  if (s == "steiner_directed") return DesignMode::steiner_directed;
  throw std::invalid_argument("unknown design mode: " + s);
}

inline std::string to_string(EdgePolicy e) { return e == EdgePolicy::all_available ? "all_available" : "tree_only"; }

inline EdgePolicy parse_edge_policy(const std::string& s) {
  if (s == "all_available") return EdgePolicy::all_available;
  if (s == "tree_only") return EdgePolicy::tree_only;
  throw std::invalid_argument("unknown edge policy: " + s);
}

// G_E = P x I and G_p^D = G_C for every p.
inline EndLayout standard_design(const DirectedGraph& comm, const BipartiteGraph& interference,
                                 const Partition& partition) {
  const auto n = comm.size();
  const auto pc = partition.count();
  return EndLayout(partition, comm, interference, BipartiteGraph::complete(pc, n),
                   std::vector<DirectedGraph>(pc, comm));
}

namespace detail {

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

// BFS distances (in positions of g) from a set of sources, along edges forward
// or backward.
inline std::vector<std::size_t> bfs_distances(const DirectedGraph& g, const std::vector<Vertex>& sources,
                                              bool forward) {
  std::vector<std::size_t> dist(g.size(), kUnreached);
  std::queue<Vertex> q;
  for (Vertex s : sources) {
    auto ps = g.position(s);
    if (dist[ps] == kUnreached) {
      dist[ps] = 0;
      q.push(s);
    }
  }
  while (!q.empty()) {
    Vertex u = q.front();
    q.pop();
    const auto du = dist[g.position(u)];
    for (Vertex w : forward ? g.out_neighbors(u) : g.in_neighbors(u)) {
      auto pw = g.position(w);
      if (dist[pw] == kUnreached) {
        dist[pw] = du + 1;
        q.push(w);
      }
    }
  }
  return dist;
}

// Lexicographically smallest shortest directed path from the source set to
// the nearest target (ties on the target broken by smallest id). Empty when
// no target is reachable.
inline std::vector<Vertex> shortest_path_to_nearest(const DirectedGraph& g, const std::vector<Vertex>& sources,
                                                    const std::vector<Vertex>& targets) {
  const auto from = bfs_distances(g, sources, true);
  Vertex best = 0;
  std::size_t best_d = kUnreached;
  for (Vertex t : targets) {
    const auto d = from[g.position(t)];
    if (d < best_d || (d == best_d && d != kUnreached && t < best)) {
      best_d = d;
      best = t;
    }
  }
  if (best_d == kUnreached) return {};
  const auto to = bfs_distances(g, {best}, false);
  Vertex cur = g.vertices().back();
  bool found = false;
  for (Vertex s : sources) {
    if (to[g.position(s)] == best_d && (!found || s < cur)) {
      cur = s;
      found = true;
    }
  }
  std::vector<Vertex> path{cur};
  while (cur != best) {
    const auto need = to[g.position(cur)] - 1;
    for (Vertex w : g.out_neighbors(cur)) {  // sorted ascending
      if (to[g.position(w)] == need) {
        cur = w;
        break;
      }
    }
    path.push_back(cur);
  }
  return path;
}

inline bool sorted_contains(const std::vector<Vertex>& s, Vertex v) { return std::binary_search(s.begin(), s.end(), v); }

inline void sorted_insert(std::vector<Vertex>& s, Vertex v) {
  auto it = std::lower_bound(s.begin(), s.end(), v);
  if (it == s.end() || *it != v) s.insert(it, v);
}

}  // namespace detail

struct SteinerResult {
  std::vector<Vertex> nodes;  // sorted
  std::vector<Edge> tree;     // undirected tree edges (u < v); empty for the directed heuristic
};

// Shortest-path heuristic: grow a tree from the smallest terminal, each time
// attaching the nearest terminal not yet in the tree through a shortest path.
inline SteinerResult steiner_tree_undirected(const DirectedGraph& comm, std::vector<Vertex> terminals) {
  if (terminals.empty()) throw std::invalid_argument("Steiner problem needs at least one terminal");
  std::sort(terminals.begin(), terminals.end());
  terminals.erase(std::unique(terminals.begin(), terminals.end()), terminals.end());
  SteinerResult r;
  r.nodes = {terminals.front()};
  while (true) {
    std::vector<Vertex> missing;
    for (Vertex t : terminals) {
      if (!detail::sorted_contains(r.nodes, t)) missing.push_back(t);
    }
    if (missing.empty()) break;
    auto path = detail::shortest_path_to_nearest(comm, r.nodes, missing);
    if (path.empty()) throw std::invalid_argument("terminals are not connected in the communication graph");
    for (std::size_t a = 0; a + 1 < path.size(); ++a) {
      r.tree.emplace_back(std::min(path[a], path[a + 1]), std::max(path[a], path[a + 1]));
    }
    for (Vertex v : path) detail::sorted_insert(r.nodes, v);
  }
  std::sort(r.tree.begin(), r.tree.end());
  return r;
}

// Grows S until G_C|_S is strongly connected. With r the smallest terminal,
// alternately adds a shortest path from r's forward-reachable part of S to the
// nearest vertex of S it misses, and a shortest path from a vertex of S that
// cannot reach r into the part of S that can.
inline SteinerResult steiner_subgraph_directed(const DirectedGraph& comm, std::vector<Vertex> terminals) {
  if (terminals.empty()) throw std::invalid_argument("Steiner problem needs at least one terminal");
  std::sort(terminals.begin(), terminals.end());
  terminals.erase(std::unique(terminals.begin(), terminals.end()), terminals.end());
  SteinerResult r;
  r.nodes = terminals;
  const Vertex root = terminals.front();
  for (std::size_t guard = 0; guard <= 2 * comm.size() + 1; ++guard) {
    const auto induced = restrict_to(comm, r.nodes);
    const auto fwd = detail::reachable(induced, root, true);
    const auto bwd = detail::reachable(induced, root, false);
    std::vector<Vertex> reach, miss_fwd, coreach, miss_bwd;
    for (std::size_t a = 0; a < r.nodes.size(); ++a) {
      (fwd[a] ? reach : miss_fwd).push_back(r.nodes[a]);
      (bwd[a] ? coreach : miss_bwd).push_back(r.nodes[a]);
    }
    std::vector<Vertex> path;
    if (!miss_fwd.empty()) {
      path = detail::shortest_path_to_nearest(comm, reach, miss_fwd);
    } else if (!miss_bwd.empty()) {
      path = detail::shortest_path_to_nearest(comm, miss_bwd, coreach);
    } else {
      return r;
    }
    if (path.empty()) throw std::invalid_argument("communication graph is not strongly connected");
    for (Vertex v : path) detail::sorted_insert(r.nodes, v);
  }
  throw std::logic_error("directed Steiner heuristic failed to terminate");
}

namespace detail {

inline EndLayout assemble(const DirectedGraph& comm, const BipartiteGraph& interference, const Partition& partition,
                          const std::vector<SteinerResult>& sets, EdgePolicy policy) {
  std::vector<Edge> est;
  std::vector<DirectedGraph> design;
  for (std::size_t p = 0; p < sets.size(); ++p) {
    for (Vertex i : sets[p].nodes) est.emplace_back(p, i);
    if (policy == EdgePolicy::tree_only) {
      design.push_back(DirectedGraph::undirected(sets[p].nodes, sets[p].tree));
    } else {
      design.push_back(restrict_to(comm, sets[p].nodes));
    }
  }
  return EndLayout(partition, comm, interference, BipartiteGraph(interference.left_count(), comm.size(), est),
                   std::move(design));
}

}  // namespace detail

inline EndLayout steiner_design_undirected(const DirectedGraph& comm, const BipartiteGraph& interference,
                                           const Partition& partition,
                                           EdgePolicy policy = EdgePolicy::all_available) {
  if (!is_connected_undirected(comm)) throw std::invalid_argument("communication graph is not connected");
  std::vector<SteinerResult> sets;
  for (std::size_t p = 0; p < interference.left_count(); ++p) {
    sets.push_back(steiner_tree_undirected(comm, interference.right_neighbors(p)));
  }
  return detail::assemble(comm, interference, partition, sets, policy);
}

inline EndLayout steiner_design_directed(const DirectedGraph& comm, const BipartiteGraph& interference,
                                         const Partition& partition) {
  if (!is_strongly_connected(comm)) throw std::invalid_argument("communication graph is not strongly connected");
  std::vector<SteinerResult> sets;
  for (std::size_t p = 0; p < interference.left_count(); ++p) {
    sets.push_back(steiner_subgraph_directed(comm, interference.right_neighbors(p)));
  }
  return detail::assemble(comm, interference, partition, sets, EdgePolicy::all_available);
}

inline EndLayout synthesize(const DirectedGraph& comm, const BipartiteGraph& interference, const Partition& partition,
                            const DesignSpec& spec) {
  switch (spec.mode) {
    case DesignMode::standard:
      return standard_design(comm, interference, partition);
    case DesignMode::steiner_undirected:
      return steiner_design_undirected(comm, interference, partition, spec.edge_policy);
    case DesignMode::steiner_directed:
      if (spec.edge_policy == EdgePolicy::tree_only) {
        throw std::invalid_argument("tree_only edge policy applies to the undirected heuristic only");
      }
      return steiner_design_directed(comm, interference, partition);
  }
  throw std::invalid_argument("unknown design mode");
}

// G_p^D(k) = G_p^D intersected with G_C(k), on the copy set of p.
class TimeVaryingDesign {
 public:
  TimeVaryingDesign(std::vector<DirectedGraph> static_design, TimeVaryingGraph comm_seq)
      : static_(std::move(static_design)), comm_(std::move(comm_seq)) {
    for (std::size_t p = 0; p < static_.size(); ++p) {
      for (Vertex v : static_[p].vertices()) {
        if (!std::binary_search(comm_.vertices().begin(), comm_.vertices().end(), v)) {
          throw std::invalid_argument("design graph of component " + std::to_string(p) +
                                      " has a vertex outside the communication sequence");
        }
      }
    }
  }

  std::size_t component_count() const { return static_.size(); }
  const DirectedGraph& static_design(std::size_t p) const { return static_.at(p); }

  DirectedGraph at(std::size_t p, std::size_t k) const { return edge_intersection(static_.at(p), comm_.at(k)); }

  std::vector<DirectedGraph> at(std::size_t k) const {
    const auto ck = comm_.at(k);
    std::vector<DirectedGraph> out;
    out.reserve(static_.size());
    for (const auto& g : static_) out.push_back(edge_intersection(g, ck));
    return out;
  }

  TimeVaryingGraph component_sequence(std::size_t p) const {
    auto self = *this;
    return TimeVaryingGraph(static_.at(p).vertices(), [self, p](std::size_t k) { return self.at(p, k); });
  }

 private:
  std::vector<DirectedGraph> static_;
  TimeVaryingGraph comm_;
};

inline TimeVaryingDesign time_varying_design(const std::vector<DirectedGraph>& static_design,
                                             const TimeVaryingGraph& comm_seq) {
  return TimeVaryingDesign(static_design, comm_seq);
}

// Per-component Q-strong connectivity of the time-varying design.
inline std::vector<bool> q_connectivity_report(const TimeVaryingDesign& d, long long q, std::size_t horizon) {
  std::vector<bool> ok;
  for (std::size_t p = 0; p < d.component_count(); ++p) {
    ok.push_back(is_q_strongly_connected(d.component_sequence(p), q, horizon));
  }
  return ok;
}

struct CostReport {
  std::map<std::size_t, std::size_t> copies_per_component;
  std::size_t total_memory = 0;              // sum_p N_p n_p scalar slots
  double per_iteration_broadcast_cost = 0;   // broadcasts per iteration
};

// An agent pays 1 per communication round for each estimated component whose
// design graph gives it at least one out-neighbor other than itself.
inline CostReport cost_report(const EndLayout& layout, std::size_t rounds_per_iteration = 1) {
  CostReport r;
  std::size_t senders = 0;
  for (std::size_t p = 0; p < layout.component_count(); ++p) {
    r.copies_per_component[p] = layout.copy_count(p);
    r.total_memory += layout.copy_count(p) * layout.partition().size(p);
    const auto& g = layout.design(p);
    for (Vertex i : g.vertices()) {
      const auto& outs = g.out_neighbors(i);
      if (std::any_of(outs.begin(), outs.end(), [i](Vertex j) { return j != i; })) ++senders;
    }
  }
  r.per_iteration_broadcast_cost = static_cast<double>(senders * rounds_per_iteration);
  return r;
}

}  // namespace endopt
