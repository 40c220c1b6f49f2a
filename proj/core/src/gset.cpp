#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "rarc/problems.hpp"

namespace rarc {

namespace {

bool blank(const std::string &s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

GsetGraph parse_gset(std::istream &in) {
  std::string line;
  int lineno = 0;
  auto next_line = [&]() {
    while (std::getline(in, line)) {
      ++lineno;
      if (!blank(line)) return true;
    }
    return false;
  };

  if (!next_line()) throw ParseError("gset: missing header", lineno + 1);
  GsetGraph g;
  long long m = 0;
  {
    std::istringstream ss(line);
    std::string rest;
    if (!(ss >> g.n >> m) || (ss >> rest)) {
      throw ParseError("gset: header must be \"n m\"", lineno);
    }
    if (g.n < 1 || m < 0) {
      throw ParseError("gset: header counts out of range", lineno);
    }
  }
  std::set<std::pair<int, int>> seen;
  for (long long e = 0; e < m; ++e) {
    if (!next_line()) {
      throw ParseError("gset: expected " + std::to_string(m) +
                           " edges, found " + std::to_string(e),
                       lineno + 1);
    }
    std::istringstream ss(line);
    GsetEdge edge;
    std::string rest;
    if (!(ss >> edge.i >> edge.j >> edge.w) || (ss >> rest)) {
      throw ParseError("gset: edge line must be \"i j w\"", lineno);
    }
    if (edge.i < 1 || edge.j < 1 || edge.i > g.n || edge.j > g.n) {
      throw ParseError("gset: node index out of range", lineno);
    }
    if (edge.i == edge.j) throw ParseError("gset: self-loop", lineno);
    if (edge.i > edge.j) std::swap(edge.i, edge.j);
    if (!seen.emplace(edge.i, edge.j).second) {
      throw ParseError("gset: duplicate edge", lineno);
    }
    g.edges.push_back(edge);
  }
  if (next_line()) {
    throw ParseError("gset: more edge lines than declared", lineno);
  }
  return g;
}

GsetGraph read_gset(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("read_gset: cannot open " + path.string());
  return parse_gset(in);
}

void write_gset(std::ostream &out, const GsetGraph &g) {
  out << g.n << ' ' << g.edges.size() << '\n';
  char buf[64];
  for (const GsetEdge &e : g.edges) {
    std::snprintf(buf, sizeof buf, "%.17g", e.w);
    out << e.i << ' ' << e.j << ' ' << buf << '\n';
  }
}

void write_gset(const std::filesystem::path &path, const GsetGraph &g) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("write_gset: cannot open " + path.string());
  write_gset(out, g);
}

}  // namespace rarc
