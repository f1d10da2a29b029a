#pragma once

#include <memory>
#include <vector>

#include "congestlab/routing/types.hpp"

namespace congestlab {

// A virtual graph H realized in a base graph G: every virtual node lives on a
// host node of G, every virtual edge (a, b) is a path in G from host(a) to
// host(b).
struct Embedding {
  std::shared_ptr<const NetworkGraph> base;
  std::shared_ptr<const NetworkGraph> virtual_graph;
  std::vector<NodeId> host;
  std::vector<Path> paths;
  std::size_t congestion = 0;
  std::size_t dilation = 0;

  void measure() {
    const PathMetrics m = recount(*base, paths);
    congestion = m.congestion;
    dilation = m.dilation;
  }
};

// Checks every path against its virtual edge; returns the recounted metrics.
inline PathMetrics verify_embedding(const Embedding& emb) {
  const NetworkGraph& h = *emb.virtual_graph;
  if (emb.paths.size() != h.edge_count() || emb.host.size() != h.node_count())
    throw Error(ErrorKind::GraphMismatch, "embedding size does not match its virtual graph");
  for (EdgeId e = 0; e < h.edge_count(); ++e) {
    const Edge& ve = h.edge(e);
    if (!path_connects(*emb.base, emb.paths[e], emb.host[ve.u], emb.host[ve.v]))
      throw Error(ErrorKind::GraphMismatch, "embedded path of virtual edge " + std::to_string(e) + " is broken");
  }
  return recount(*emb.base, emb.paths);
}

inline Embedding identity_embedding(std::shared_ptr<const NetworkGraph> g) {
  Embedding emb;
  emb.base = g;
  emb.virtual_graph = g;
  emb.host.resize(g->node_count());
  for (NodeId v = 0; v < g->node_count(); ++v) emb.host[v] = v;
  emb.paths.reserve(g->edge_count());
  for (EdgeId e = 0; e < g->edge_count(); ++e) emb.paths.push_back(Path{g->edge(e).u, {e}});
  emb.measure();
  return emb;
}

namespace detail {

inline void append_oriented(const Path& p, bool reverse, std::vector<EdgeId>& out) {
  if (reverse)
    out.insert(out.end(), p.edges.rbegin(), p.edges.rend());
  else
    out.insert(out.end(), p.edges.begin(), p.edges.end());
}

}  // namespace detail

// Embeds inner's virtual graph H2 into outer's base G0: each H2 path through
// H1 is replaced by the concatenation of the outer paths of its H1 edges.
inline Embedding compose(const Embedding& outer, const Embedding& inner) {
  const bool same = inner.base == outer.virtual_graph ||
                    (inner.base && outer.virtual_graph && *inner.base == *outer.virtual_graph);
  if (!same) throw Error(ErrorKind::GraphMismatch, "inner embedding is not based on the outer virtual graph");
  const NetworkGraph& h1 = *outer.virtual_graph;

  Embedding out;
  out.base = outer.base;
  out.virtual_graph = inner.virtual_graph;
  out.host.resize(inner.host.size());
  for (std::size_t x = 0; x < inner.host.size(); ++x) out.host[x] = outer.host[inner.host[x]];
  out.paths.reserve(inner.paths.size());
  for (const Path& p2 : inner.paths) {
    Path p;
    p.start = outer.host[p2.start];
    NodeId at = p2.start;
    for (EdgeId f : p2.edges) {
      const Edge& fe = h1.edge(f);
      detail::append_oriented(outer.paths[f], fe.u != at, p.edges);
      at = h1.other_end(f, at);
    }
    out.paths.push_back(std::move(p));
  }
  out.measure();
  return out;
}

// Test generator: every node of H = (same node set as base) starts
// `virtual_degree` lazy walks of `walk_length` steps; each walk becomes the
// virtual edge (start, end) embedded along itself.
inline Embedding random_walk_embedding(std::shared_ptr<const NetworkGraph> base, std::size_t virtual_degree,
                                       std::size_t walk_length, std::uint64_t seed) {
  const NetworkGraph& g = *base;
  std::vector<Edge> hedges;
  std::vector<Path> paths;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    Rng rng(derive_seed({seed, 0x72776bULL, v}));
    for (std::size_t i = 0; i < virtual_degree; ++i) {
      Path p{v, {}};
      NodeId x = v;
      for (std::size_t s = 0; s < walk_length; ++s) {
        if (!rng.coin() || g.degree(x) == 0) continue;
        const auto sl = g.slots(x);
        const EdgeId e = sl[rng.below(sl.size())];
        const NodeId y = g.other_end(e, x);
        if (y == x) continue;
        p.edges.push_back(e);
        x = y;
      }
      hedges.push_back({v, x});
      paths.push_back(std::move(p));
    }
  }
  Embedding emb;
  emb.base = base;
  emb.virtual_graph = std::make_shared<const NetworkGraph>(g.node_count(), std::move(hedges));
  emb.host.resize(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) emb.host[v] = v;
  emb.paths = std::move(paths);
  emb.measure();
  return emb;
}

}  // namespace congestlab
