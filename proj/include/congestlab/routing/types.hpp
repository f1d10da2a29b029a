#pragma once

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "congestlab/netcore/graph.hpp"

namespace congestlab {

// A walk in a graph: a start node and the edges crossed in order. Not
// necessarily simple.
struct Path {
  NodeId start = kNoNode;
  std::vector<EdgeId> edges;

  std::size_t length() const noexcept { return edges.size(); }
  friend bool operator==(const Path&, const Path&) = default;
};

// Follows the path and returns its last node. Throws NonIncidentEdge if two
// consecutive edges do not share a node.
inline NodeId path_end(const NetworkGraph& g, const Path& p) {
  NodeId x = p.start;
  for (EdgeId e : p.edges) x = g.other_end(e, x);
  return x;
}

inline bool path_connects(const NetworkGraph& g, const Path& p, NodeId s, NodeId t) {
  if (p.start != s) return false;
  NodeId x = s;
  for (EdgeId e : p.edges) {
    if (!g.is_incident(x, e)) return false;
    x = g.other_end(e, x);
  }
  return x == t;
}

inline Path reversed(const NetworkGraph& g, const Path& p) {
  Path r;
  r.start = path_end(g, p);
  r.edges.assign(p.edges.rbegin(), p.edges.rend());
  return r;
}

struct DemandPair {
  NodeId s;
  NodeId t;
  friend bool operator==(const DemandPair&, const DemandPair&) = default;
};

// Max number of times a node appears as a source, or as a target. Sources
// and targets are counted separately, so a permutation has width 1.
inline std::size_t instance_width(const std::vector<DemandPair>& pairs, std::size_t n) {
  std::vector<std::size_t> as_s(n, 0), as_t(n, 0);
  std::size_t w = 0;
  for (const auto& p : pairs) {
    if (p.s >= n || p.t >= n) throw Error(ErrorKind::InvalidArgument, "pair endpoint out of range");
    w = std::max({w, ++as_s[p.s], ++as_t[p.t]});
  }
  return w;
}

struct RoutingInstance {
  std::vector<DemandPair> pairs;
  std::size_t width = 0;

  static RoutingInstance from_pairs(std::vector<DemandPair> pairs, std::size_t n) {
    RoutingInstance inst;
    inst.width = instance_width(pairs, n);
    inst.pairs = std::move(pairs);
    return inst;
  }

  // s_i -> pi(s_i) for a uniformly random permutation pi. Width 1.
  static RoutingInstance permutation(std::size_t n, std::uint64_t seed) {
    std::vector<NodeId> perm(n);
    for (NodeId i = 0; i < n; ++i) perm[i] = i;
    Rng rng(derive_seed({seed, 0x7065726dULL}));
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    std::vector<DemandPair> pairs;
    pairs.reserve(n);
    for (NodeId i = 0; i < n; ++i) pairs.push_back({i, perm[i]});
    return from_pairs(std::move(pairs), n);
  }
};

// Instance file: one "s t" per line.
inline RoutingInstance read_instance(std::istream& is, std::size_t n) {
  std::vector<DemandPair> pairs;
  std::uint64_t s = 0, t = 0;
  while (is >> s >> t) {
    if (s >= n || t >= n) throw Error(ErrorKind::ParseError, "pair endpoint out of range");
    pairs.push_back({static_cast<NodeId>(s), static_cast<NodeId>(t)});
  }
  if (!is.eof()) throw Error(ErrorKind::ParseError, "malformed instance line");
  return RoutingInstance::from_pairs(std::move(pairs), n);
}

inline void write_instance(std::ostream& os, const RoutingInstance& inst) {
  for (const auto& p : inst.pairs) os << p.s << ' ' << p.t << '\n';
}

struct PathMetrics {
  std::size_t congestion = 0;
  std::size_t dilation = 0;
  friend bool operator==(const PathMetrics&, const PathMetrics&) = default;
};

// Recount from scratch: congestion = max over edges of total occurrences,
// dilation = max path length.
inline PathMetrics recount(const NetworkGraph& g, const std::vector<Path>& paths) {
  std::vector<std::uint32_t> load(g.edge_count(), 0);
  PathMetrics m;
  for (const auto& p : paths) {
    m.dilation = std::max(m.dilation, p.edges.size());
    for (EdgeId e : p.edges) m.congestion = std::max<std::size_t>(m.congestion, ++load.at(e));
  }
  return m;
}

struct PathSolution {
  std::vector<Path> paths;             // per pair, base-graph path from s_i to t_i
  std::vector<std::size_t> relay_len;  // per pair, edges spent on relay hops (a prefix)
  std::size_t congestion = 0;
  std::size_t dilation = 0;
  std::size_t dilation_without_relays = 0;
  std::size_t levels = 0;  // hierarchy depth K the routes ran through
  std::vector<std::uint32_t> relay_load;  // per real node, relay hand-offs received
  std::size_t max_relay_load = 0;
  std::size_t final_direct = 0;    // pairs joined by one final-level edge
  std::size_t final_searched = 0;  // pairs needing a multi-hop search at the final level
  std::size_t resamples = 0;
};

}  // namespace congestlab
