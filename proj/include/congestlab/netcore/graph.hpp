#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "congestlab/common.hpp"

namespace congestlab {

struct Edge {
  NodeId u;
  NodeId v;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected multigraph with stable edge identities 0..m-1. Self-loops and
// parallel edges are kept. Immutable after construction.
//
// Two adjacency views exist:
//   incident(v) - every edge end at v; a self-loop appears twice.
//   slots(v)    - the walk/processor view; a self-loop appears once, so
//                 degree(v) = slots(v).size().
// For generated graphs endpoint u of every edge is the node that picked it.
class NetworkGraph {
 public:
  NetworkGraph() = default;

  NetworkGraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    for (const Edge& e : edges_) {
      if (e.u >= n_ || e.v >= n_) throw Error(ErrorKind::InvalidArgument, "edge endpoint out of range");
    }
    build();
  }

  std::size_t node_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_.at(e); }

  std::span<const EdgeId> incident(NodeId v) const {
    return {incidence_.data() + inc_off_[v], incidence_.data() + inc_off_[v + 1]};
  }
  std::span<const EdgeId> slots(NodeId v) const {
    return {slots_.data() + slot_off_[v], slots_.data() + slot_off_[v + 1]};
  }

  std::size_t degree(NodeId v) const { return slot_off_[v + 1] - slot_off_[v]; }
  // Sum of degrees with self-loops counted once; the number of slots.
  std::size_t volume() const noexcept { return slots_.size(); }
  // Rank of the first slot of v, i.e. sum of degrees of nodes before v.
  std::size_t slot_offset(NodeId v) const { return slot_off_[v]; }

  bool is_incident(NodeId v, EdgeId e) const {
    if (e >= edges_.size()) return false;
    return edges_[e].u == v || edges_[e].v == v;
  }

  NodeId other_end(EdgeId e, NodeId from) const {
    const Edge& ed = edges_.at(e);
    if (ed.u == from) return ed.v;
    if (ed.v == from) return ed.u;
    throw Error(ErrorKind::NonIncidentEdge, "edge " + std::to_string(e) + " not incident to node " +
                                                std::to_string(from));
  }

  // Edges picked by v (endpoint u == v).
  std::vector<EdgeId> outgoing(NodeId v) const {
    std::vector<EdgeId> out;
    for (EdgeId e : slots(v))
      if (edges_[e].u == v) out.push_back(e);
    return out;
  }

  bool connected() const {
    if (n_ == 0) return true;
    std::vector<char> seen(n_, 0);
    std::vector<NodeId> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      NodeId x = stack.back();
      stack.pop_back();
      for (EdgeId e : slots(x)) {
        NodeId y = other_end(e, x);
        if (!seen[y]) {
          seen[y] = 1;
          ++count;
          stack.push_back(y);
        }
      }
    }
    return count == n_;
  }

  friend bool operator==(const NetworkGraph& a, const NetworkGraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  void build() {
    inc_off_.assign(n_ + 1, 0);
    slot_off_.assign(n_ + 1, 0);
    for (const Edge& e : edges_) {
      ++inc_off_[e.u + 1];
      ++inc_off_[e.v + 1];
      ++slot_off_[e.u + 1];
      if (e.v != e.u) ++slot_off_[e.v + 1];
    }
    for (std::size_t i = 0; i < n_; ++i) {
      inc_off_[i + 1] += inc_off_[i];
      slot_off_[i + 1] += slot_off_[i];
    }
    incidence_.resize(inc_off_[n_]);
    slots_.resize(slot_off_[n_]);
    std::vector<std::size_t> ic(inc_off_.begin(), inc_off_.end() - 1);
    std::vector<std::size_t> sc(slot_off_.begin(), slot_off_.end() - 1);
    for (EdgeId id = 0; id < edges_.size(); ++id) {
      const Edge& e = edges_[id];
      incidence_[ic[e.u]++] = id;
      incidence_[ic[e.v]++] = id;
      slots_[sc[e.u]++] = id;
      if (e.v != e.u) slots_[sc[e.v]++] = id;
    }
  }

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> inc_off_{0};
  std::vector<EdgeId> incidence_;
  std::vector<std::size_t> slot_off_{0};
  std::vector<EdgeId> slots_;
};

// Convenience builders used by tests and the CLI.
namespace graphs {

inline NetworkGraph path(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return NetworkGraph(n, std::move(e));
}

inline NetworkGraph ring(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId i = 0; i < n; ++i) e.push_back({i, static_cast<NodeId>((i + 1) % n)});
  return NetworkGraph(n, std::move(e));
}

inline NetworkGraph star(std::size_t leaves) {
  std::vector<Edge> e;
  for (NodeId i = 1; i <= leaves; ++i) e.push_back({0, i});
  return NetworkGraph(leaves + 1, std::move(e));
}

inline NetworkGraph complete(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) e.push_back({i, j});
  return NetworkGraph(n, std::move(e));
}

// Two complete graphs on `half` nodes joined by a single bridge edge.
inline NetworkGraph dumbbell(std::size_t half) {
  std::vector<Edge> e;
  for (NodeId i = 0; i < half; ++i)
    for (NodeId j = i + 1; j < half; ++j) {
      e.push_back({i, j});
      e.push_back({static_cast<NodeId>(i + half), static_cast<NodeId>(j + half)});
    }
  e.push_back({0, static_cast<NodeId>(half)});
  return NetworkGraph(2 * half, std::move(e));
}

}  // namespace graphs
}  // namespace congestlab
