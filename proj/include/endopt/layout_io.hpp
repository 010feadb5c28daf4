#pragma once

// Single-file text format for layouts. Keyed sections, each closed by END:
//
//   PARTITION
//   <n_1> <n_2> ... <n_P>
//   END
//   COMM            graph record (see graph_io.hpp)
//   INTERF          bipartite record
//   ESTIM           bipartite record
//   DESIGN <p>      graph record, p is 1-based
//
// ESTIM and DESIGN are optional in read_structure(), which only needs the
// inputs of a design synthesis.

#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "endopt/graph_io.hpp"
#include "endopt/layout.hpp"

namespace endopt {

struct LayoutSections {
  std::optional<Partition> partition;
  std::optional<DirectedGraph> comm;
  std::optional<BipartiteGraph> interference;
  std::optional<BipartiteGraph> estimate;
  std::map<std::size_t, DirectedGraph> design;
};

// Inputs of a design synthesis: partition, communication and interference.
struct LayoutStructure {
  Partition partition;
  DirectedGraph comm;
  BipartiteGraph interference;
};

inline void write_layout(std::ostream& out, const EndLayout& layout) {
  out << "PARTITION\n";
  const auto& sizes = layout.partition().sizes();
  for (std::size_t p = 0; p < sizes.size(); ++p) out << (p ? " " : "") << sizes[p];
  out << "\nEND\nCOMM\n";
  write_graph(out, layout.comm());
  out << "END\nINTERF\n";
  write_bipartite(out, layout.interference());
  out << "END\nESTIM\n";
  write_bipartite(out, layout.estimate());
  out << "END\n";
  for (std::size_t p = 0; p < layout.component_count(); ++p) {
    out << "DESIGN " << p + 1 << '\n';
    write_graph(out, layout.design(p));
    out << "END\n";
  }
}

inline LayoutSections read_layout_sections(std::istream& in) {
  LayoutSections s;
  std::string line;
  while (detail::next_record(in, line)) {
    std::istringstream is(line);
    std::string key;
    is >> key;
    if (key == "PARTITION") {
      std::vector<std::size_t> sizes;
      while (detail::next_record(in, line, "END")) {
        std::istringstream ps(line);
        long long n = 0;
        while (ps >> n) {
          if (n <= 0) throw std::runtime_error("partition block sizes must be positive: " + line);
          sizes.push_back(static_cast<std::size_t>(n));
        }
        if (!ps.eof()) throw std::runtime_error("bad PARTITION line: " + line);
      }
      s.partition.emplace(std::move(sizes));
    } else if (key == "COMM") {
      auto rec = read_graph(in, "END");
      s.comm.emplace(std::move(rec.graph));
    } else if (key == "INTERF") {
      s.interference.emplace(read_bipartite(in, "END"));
    } else if (key == "ESTIM") {
      s.estimate.emplace(read_bipartite(in, "END"));
    } else if (key == "DESIGN") {
      long long p = 0;
      if (!(is >> p) || p < 1) throw std::runtime_error("bad DESIGN header: " + line);
      auto rec = read_graph(in, "END");
      s.design.insert_or_assign(static_cast<std::size_t>(p - 1), std::move(rec.graph));
    } else {
      throw std::runtime_error("unknown layout section: " + line);
    }
  }
  return s;
}

inline LayoutStructure read_structure(std::istream& in) {
  auto s = read_layout_sections(in);
  if (!s.partition || !s.comm || !s.interference) {
    throw std::runtime_error("layout file needs PARTITION, COMM and INTERF sections");
  }
  return LayoutStructure{std::move(*s.partition), std::move(*s.comm), std::move(*s.interference)};
}

inline EndLayout read_layout(std::istream& in) {
  auto s = read_layout_sections(in);
  if (!s.partition || !s.comm || !s.interference || !s.estimate) {
    throw std::runtime_error("layout file needs PARTITION, COMM, INTERF and ESTIM sections");
  }
  const auto pc = s.partition->count();
  std::vector<DirectedGraph> design;
  for (std::size_t p = 0; p < pc; ++p) {
    auto it = s.design.find(p);
    if (it == s.design.end()) throw std::runtime_error("missing DESIGN " + std::to_string(p + 1));
    design.push_back(it->second);
  }
  if (s.design.size() != pc) throw std::runtime_error("DESIGN section for a component outside the partition");
  return EndLayout(std::move(*s.partition), std::move(*s.comm), std::move(*s.interference), std::move(*s.estimate),
                   std::move(design));
}

inline EndLayout load_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open layout file " + path);
  return read_layout(in);
}

inline LayoutStructure load_structure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open layout file " + path);
  return read_structure(in);
}

inline void save_layout(const std::string& path, const EndLayout& layout) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write layout file " + path);
  write_layout(out, layout);
}

}  // namespace endopt
