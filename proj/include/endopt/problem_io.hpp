#pragma once

// Text format for problem instances:
//
//   PROBLEM least_squares | lasso | coupled
//   PARTITION / INTERF sections as in layout files
//   AGENT <i>                      one per agent, 1-based, closed by END
//     least squares / lasso:  "H <row>" per row, then "h <values>"
//     coupled:                "Q <row>" per row, "c ...", "lower ...", "upper ...",
//                             then per component "BLOCK <p>", "A <row>" per row, "a ..."
//
// Numbers are written with 17 significant digits so a round trip is exact.

#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "endopt/graph_io.hpp"
#include "endopt/problems.hpp"

namespace endopt {

using ProblemInstance = std::variant<LeastSquaresInstance, LassoInstance, ConstraintCoupledInstance>;

namespace detail {

inline void write_row(std::ostream& out, const char* tag, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  out << tag;
  for (Eigen::Index c = 0; c < row.size(); ++c) out << ' ' << format_double(row(c));
  out << '\n';
}

inline void write_header(std::ostream& out, const char* kind, const Partition& part, const BipartiteGraph& interf) {
  out << "PROBLEM " << kind << "\nPARTITION\n";
  for (std::size_t p = 0; p < part.count(); ++p) out << (p ? " " : "") << part.size(p);
  out << "\nEND\nINTERF\n";
  write_bipartite(out, interf);
  out << "END\n";
}

inline void write_ls_agents(std::ostream& out, const LeastSquaresInstance& ls) {
  for (Vertex i = 0; i < ls.agent_count(); ++i) {
    const auto& a = ls.agents()[i];
    out << "AGENT " << i + 1 << '\n';
    out << "ROWS " << a.H.rows() << '\n';
    for (Eigen::Index r = 0; r < a.H.rows(); ++r) write_row(out, "H", a.H.row(r));
    write_row(out, "h", a.h.transpose());
    out << "END\n";
  }
}

inline std::vector<double> numbers_after_tag(const std::string& line) {
  std::istringstream is(line);
  std::string tag;
  is >> tag;
  std::vector<double> v;
  double x = 0.0;
  while (is >> x) v.push_back(x);
  if (!is.eof()) throw std::runtime_error("bad number in line: " + line);
  return v;
}

inline Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<Eigen::Index>(rows[r].size()) != cols) throw std::runtime_error("ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  }
  return m;
}

inline std::string first_token(const std::string& line) {
  std::istringstream is(line);
  std::string t;
  is >> t;
  return t;
}

}  // namespace detail

inline void write_problem(std::ostream& out, const LeastSquaresInstance& ls) {
  detail::write_header(out, "least_squares", ls.partition(), ls.interference());
  detail::write_ls_agents(out, ls);
}

inline void write_problem(std::ostream& out, const LassoInstance& lasso) {
  detail::write_header(out, "lasso", lasso.partition(), lasso.interference());
  detail::write_ls_agents(out, lasso.least_squares());
}

inline void write_problem(std::ostream& out, const ConstraintCoupledInstance& cc) {
  detail::write_header(out, "coupled", cc.partition(), cc.interference());
  for (Vertex i = 0; i < cc.agents().size(); ++i) {
    const auto& a = cc.agents()[i];
    out << "AGENT " << i + 1 << '\n';
    for (Eigen::Index r = 0; r < a.Q.rows(); ++r) detail::write_row(out, "Q", a.Q.row(r));
    detail::write_row(out, "c", a.c.transpose());
    detail::write_row(out, "lower", a.lower.transpose());
    detail::write_row(out, "upper", a.upper.transpose());
    for (const auto& [p, blk] : a.constraints) {
      out << "BLOCK " << p + 1 << '\n';
      for (Eigen::Index r = 0; r < blk.first.rows(); ++r) detail::write_row(out, "A", blk.first.row(r));
      detail::write_row(out, "a", blk.second.transpose());
    }
    out << "END\n";
  }
}

inline ProblemInstance read_problem(std::istream& in) {
  std::string line, kind;
  std::optional<Partition> part;
  std::optional<BipartiteGraph> interf;
  std::map<std::size_t, LeastSquaresAgent> ls_agents;
  std::map<std::size_t, CoupledAgent> cc_agents;
  while (detail::next_record(in, line)) {
    const auto key = detail::first_token(line);
    if (key == "PROBLEM") {
      std::istringstream is(line);
      is >> kind >> kind;
    } else if (key == "PARTITION") {
      std::vector<std::size_t> sizes;
      while (detail::next_record(in, line, "END")) {
        for (double x : detail::numbers_after_tag("_ " + line)) sizes.push_back(static_cast<std::size_t>(x));
      }
      part.emplace(std::move(sizes));
    } else if (key == "INTERF") {
      interf.emplace(read_bipartite(in, "END"));
    } else if (key == "AGENT") {
      std::istringstream is(line);
      std::string tag;
      long long label = 0;
      if (!(is >> tag >> label) || label < 1) throw std::runtime_error("bad AGENT header: " + line);
      const auto i = static_cast<std::size_t>(label - 1);
      if (!part || !interf) throw std::runtime_error("AGENT section before PARTITION and INTERF");
      std::vector<std::vector<double>> hrows, qrows, arows;
      std::vector<double> h, c, lo, hi, avec;
      std::optional<std::size_t> block;
      CoupledAgent ca;
      auto close_block = [&]() {
        if (!block) return;
        const auto cols = static_cast<Eigen::Index>(c.size());
        ca.constraints[*block] = {detail::to_matrix(arows, cols), detail::to_vector(avec)};
        arows.clear();
        avec.clear();
        block.reset();
      };
      while (detail::next_record(in, line, "END")) {
        const auto t = detail::first_token(line);
        const auto nums = detail::numbers_after_tag(line);
        if (t == "ROWS") continue;
        if (t == "H") hrows.push_back(nums);
        else if (t == "h") h = nums;
        else if (t == "Q") qrows.push_back(nums);
        else if (t == "c") c = nums;
        else if (t == "lower") lo = nums;
        else if (t == "upper") hi = nums;
        else if (t == "BLOCK") {
          close_block();
          if (nums.size() != 1 || nums[0] < 1) throw std::runtime_error("bad BLOCK line: " + line);
          block = static_cast<std::size_t>(nums[0]) - 1;
        } else if (t == "A") arows.push_back(nums);
        else if (t == "a") avec = nums;
        else throw std::runtime_error("unexpected line in AGENT section: " + line);
      }
      close_block();
      if (kind == "coupled") {
        ca.Q = detail::to_matrix(qrows, static_cast<Eigen::Index>(c.size()));
        ca.c = detail::to_vector(c);
        ca.lower = detail::to_vector(lo);
        ca.upper = detail::to_vector(hi);
        cc_agents[i] = std::move(ca);
      } else {
        std::size_t cols = 0;
        for (std::size_t p : interf->left_neighbors(i)) cols += part->size(p);
        LeastSquaresAgent a{detail::to_matrix(hrows, static_cast<Eigen::Index>(cols)), detail::to_vector(h)};
        ls_agents[i] = std::move(a);
      }
    } else {
      throw std::runtime_error("unknown problem section: " + line);
    }
  }
  if (!part || !interf) throw std::runtime_error("problem file needs PARTITION and INTERF sections");
  const auto n = interf->right_count();
  if (kind == "coupled") {
    std::vector<CoupledAgent> agents;
    for (std::size_t i = 0; i < n; ++i) {
      auto it = cc_agents.find(i);
      if (it == cc_agents.end()) throw std::runtime_error("missing AGENT " + std::to_string(i + 1));
      agents.push_back(std::move(it->second));
    }
    return ConstraintCoupledInstance(*part, *interf, std::move(agents));
  }
  std::vector<LeastSquaresAgent> agents;
  for (std::size_t i = 0; i < n; ++i) {
    auto it = ls_agents.find(i);
    if (it == ls_agents.end()) throw std::runtime_error("missing AGENT " + std::to_string(i + 1));
    agents.push_back(std::move(it->second));
  }
  LeastSquaresInstance ls(*part, *interf, std::move(agents));
  if (kind == "least_squares") return ls;
  if (kind == "lasso") return LassoInstance(std::move(ls));
  throw std::runtime_error("unknown or missing PROBLEM kind: " + kind);
}

inline ProblemInstance load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file " + path);
  return read_problem(in);
}

}  // namespace endopt
