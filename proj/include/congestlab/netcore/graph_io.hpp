#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "congestlab/netcore/graph.hpp"

namespace congestlab {

// Graph text format:
//   n m
//   edge_id u v      (m lines, edge ids dense 0..m-1 in any order)
inline void write_graph(std::ostream& os, const NetworkGraph& g) {
  os << g.node_count() << ' ' << g.edge_count() << '\n';
  for (EdgeId e = 0; e < g.edge_count(); ++e) os << e << ' ' << g.edge(e).u << ' ' << g.edge(e).v << '\n';
}

inline NetworkGraph read_graph(std::istream& is) {
  std::size_t n = 0, m = 0;
  if (!(is >> n >> m)) throw Error(ErrorKind::ParseError, "missing 'n m' header");
  std::vector<Edge> edges(m);
  std::vector<char> seen(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    std::uint64_t id = 0, u = 0, v = 0;
    if (!(is >> id >> u >> v)) throw Error(ErrorKind::ParseError, "expected " + std::to_string(m) + " edge lines");
    if (id >= m || seen[id]) throw Error(ErrorKind::ParseError, "edge ids must be dense and unique");
    if (u >= n || v >= n) throw Error(ErrorKind::ParseError, "endpoint out of range on edge " + std::to_string(id));
    seen[id] = 1;
    edges[id] = {static_cast<NodeId>(u), static_cast<NodeId>(v)};
  }
  return NetworkGraph(n, std::move(edges));
}

inline void save_graph(const std::string& path, const NetworkGraph& g) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
  write_graph(os, g);
}

inline NetworkGraph load_graph(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::InvalidArgument, "cannot read " + path);
  return read_graph(is);
}

}  // namespace congestlab
