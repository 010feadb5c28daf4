#pragma once

// Line-oriented text format for graphs, using 1-based labels:
//
//   V <count>
//   L <label> <label> ...      only when the vertex set is not 1..count
//   E <u> <v>                  one per edge, sorted by (u, v)
//   W <u> <v> <weight>         optional, entry [W]_{u,v}, sorted by (u, v)
//
// Bipartite graphs use "V <left> <right>" and "E <p> <i>" lines.
// Blank lines and lines starting with '#' are ignored.

#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>

#include "endopt/graph.hpp"

namespace endopt {

namespace detail {

inline std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

// Next non-blank, non-comment line. Returns false at end of stream or when
// the line equals `terminator`.
inline bool next_record(std::istream& in, std::string& line, const std::string& terminator = "") {
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    line = line.substr(first);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    if (!terminator.empty() && line == terminator) return false;
    return true;
  }
  return false;
}

inline std::size_t parse_label(std::istringstream& is, const std::string& line) {
  long long label = 0;
  if (!(is >> label) || label < 1) throw std::runtime_error("bad vertex label in line: " + line);
  return static_cast<std::size_t>(label - 1);
}

}  // namespace detail

struct GraphRecord {
  DirectedGraph graph;
  std::optional<WeightMatrix> weights;
};

inline void write_graph(std::ostream& out, const DirectedGraph& g, const WeightMatrix* weights = nullptr) {
  const auto& vs = g.vertices();
  out << "V " << vs.size() << '\n';
  bool dense = true;
  for (std::size_t a = 0; a < vs.size(); ++a) dense = dense && vs[a] == a;
  if (!dense) {
    out << 'L';
    for (Vertex v : vs) out << ' ' << v + 1;
    out << '\n';
  }
  for (auto [u, v] : g.edges()) out << "E " << u + 1 << ' ' << v + 1 << '\n';
  if (weights != nullptr) {
    const auto& wv = weights->graph().vertices();
    const auto& m = weights->entries();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (m(r, c) != 0.0) {
          out << "W " << wv[static_cast<std::size_t>(r)] + 1 << ' ' << wv[static_cast<std::size_t>(c)] + 1 << ' '
              << detail::format_double(m(r, c)) << '\n';
        }
      }
    }
  }
}

// Reads until end of stream or a line equal to `terminator`.
inline GraphRecord read_graph(std::istream& in, const std::string& terminator = "") {
  std::string line;
  std::optional<std::size_t> count;
  std::vector<Vertex> labels;
  std::vector<Edge> edges;
  std::vector<std::tuple<Vertex, Vertex, double>> entries;
  while (detail::next_record(in, line, terminator)) {
    std::istringstream is(line);
    char tag = 0;
    is >> tag;
    if (tag == 'V') {
      std::size_t n = 0;
      if (!(is >> n)) throw std::runtime_error("bad V line: " + line);
      count = n;
    } else if (tag == 'L') {
      long long l = 0;
      while (is >> l) {
        if (l < 1) throw std::runtime_error("bad L line: " + line);
        labels.push_back(static_cast<Vertex>(l - 1));
      }
    } else if (tag == 'E') {
      auto u = detail::parse_label(is, line);
      auto v = detail::parse_label(is, line);
      edges.emplace_back(u, v);
    } else if (tag == 'W') {
      auto u = detail::parse_label(is, line);
      auto v = detail::parse_label(is, line);
      double w = 0.0;
      if (!(is >> w)) throw std::runtime_error("bad W line: " + line);
      entries.emplace_back(u, v, w);
    } else {
      throw std::runtime_error("unexpected line in graph record: " + line);
    }
  }
  if (!count) throw std::runtime_error("graph record is missing its V header");
  if (labels.empty()) {
    labels.resize(*count);
    for (std::size_t a = 0; a < *count; ++a) labels[a] = a;
  } else if (labels.size() != *count) {
    throw std::runtime_error("L line lists " + std::to_string(labels.size()) + " labels, V says " +
                             std::to_string(*count));
  }
  GraphRecord rec{DirectedGraph(labels, std::move(edges)), std::nullopt};
  if (!entries.empty()) {
    const auto n = static_cast<Eigen::Index>(rec.graph.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (auto [u, v, w] : entries) {
      m(static_cast<Eigen::Index>(rec.graph.position(u)), static_cast<Eigen::Index>(rec.graph.position(v))) = w;
    }
    rec.weights.emplace(rec.graph, std::move(m));
  }
  return rec;
}

inline void write_bipartite(std::ostream& out, const BipartiteGraph& g) {
  out << "V " << g.left_count() << ' ' << g.right_count() << '\n';
  for (auto [p, i] : g.edges()) out << "E " << p + 1 << ' ' << i + 1 << '\n';
}

inline BipartiteGraph read_bipartite(std::istream& in, const std::string& terminator = "") {
  std::string line;
  std::optional<std::pair<std::size_t, std::size_t>> dims;
  std::vector<Edge> edges;
  while (detail::next_record(in, line, terminator)) {
    std::istringstream is(line);
    char tag = 0;
    is >> tag;
    if (tag == 'V') {
      std::size_t l = 0, r = 0;
      if (!(is >> l >> r)) throw std::runtime_error("bad bipartite V line: " + line);
      dims.emplace(l, r);
    } else if (tag == 'E') {
      auto p = detail::parse_label(is, line);
      auto i = detail::parse_label(is, line);
      edges.emplace_back(p, i);
    } else {
      throw std::runtime_error("unexpected line in bipartite record: " + line);
    }
  }
  if (!dims) throw std::runtime_error("bipartite record is missing its V header");
  return BipartiteGraph(dims->first, dims->second, std::move(edges));
}

}  // namespace endopt
