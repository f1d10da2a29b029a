#pragma once

#include <algorithm>
#include <vector>

#include "congestlab/netcore/engine.hpp"

namespace congestlab {

namespace detail {

// Message kind in the top two bits, value below.
enum class IdMsg : Word { Join = 0, Reply = 1, Size = 2, Assign = 3 };

inline Payload id_msg(IdMsg kind, Word value) { return Payload::word((static_cast<Word>(kind) << 62) | value); }
inline IdMsg id_kind(Word w) { return static_cast<IdMsg>(w >> 62); }
inline Word id_value(Word w) { return w & ((Word{1} << 62) - 1); }

// BFS tree from the root, convergecast of subtree sizes, then preorder ids
// handed down as [start, start + size) ranges. Entirely message driven.
class IdAssignProgram {
 public:
  explicit IdAssignProgram(bool is_root = false) : is_root_(is_root) {}

  void init(NodeContext& ctx) {
    if (is_root_) {
      joined_ = true;
      send_joins(ctx, {});
      maybe_report(ctx);
    }
    ctx.set_done();
  }

  void round(NodeContext& ctx, std::span<const Message> inbox) {
    EdgeId parent = kNoEdge;
    std::vector<EdgeId> join_edges;
    for (const Message& m : inbox) {
      const Word w = m.payload.lo;
      switch (id_kind(w)) {
        case IdMsg::Join:
          join_edges.push_back(m.edge);
          if (!joined_) parent = std::min(parent, m.edge);
          break;
        case IdMsg::Reply:
          --awaiting_;
          if (id_value(w) == 1) children_.push_back({m.edge, 0});
          break;
        case IdMsg::Size:
          for (auto& c : children_)
            if (c.edge == m.edge) c.size = id_value(w);
          break;
        case IdMsg::Assign:
          assign_from(ctx, id_value(w));
          break;
      }
    }
    if (parent != kNoEdge) {
      joined_ = true;
      parent_ = parent;
      joined_round_ = ctx.round();
    }
    for (EdgeId e : join_edges) ctx.send(e, id_msg(IdMsg::Reply, e == parent ? 1 : 0));
    if (parent != kNoEdge) send_joins(ctx, join_edges);
    maybe_report(ctx);
    // A leaf that joined this round already used the parent edge for its reply.
    ctx.set_done(!(joined_ && !reported_ && awaiting_ == 0 && ctx.round() == joined_round_));
  }

  std::uint64_t id() const noexcept { return id_; }

 private:
  struct ChildLink {
    EdgeId edge;
    Word size;
  };

  void send_joins(NodeContext& ctx, const std::vector<EdgeId>& skip) {
    for (EdgeId e : ctx.slots()) {
      if (ctx.neighbor(e) == ctx.id()) continue;
      if (std::find(skip.begin(), skip.end(), e) != skip.end()) continue;
      ctx.send(e, id_msg(IdMsg::Join, 0));
      ++awaiting_;
    }
  }

  void maybe_report(NodeContext& ctx) {
    if (!joined_ || reported_ || awaiting_ != 0) return;
    if (!is_root_ && ctx.round() == joined_round_) return;
    Word total = 1;
    for (const auto& c : children_) {
      if (c.size == 0) return;
      total += c.size;
    }
    reported_ = true;
    if (is_root_)
      assign_from(ctx, 1);
    else
      ctx.send(parent_, id_msg(IdMsg::Size, total));
  }

  void assign_from(NodeContext& ctx, Word start) {
    id_ = start;
    std::sort(children_.begin(), children_.end(), [](const ChildLink& a, const ChildLink& b) { return a.edge < b.edge; });
    Word next = start + 1;
    for (const auto& c : children_) {
      ctx.send(c.edge, id_msg(IdMsg::Assign, next));
      next += c.size;
    }
  }

  bool is_root_;
  bool joined_ = false;
  bool reported_ = false;
  EdgeId parent_ = kNoEdge;
  std::size_t joined_round_ = 0;
  std::size_t awaiting_ = 0;
  std::vector<ChildLink> children_;
  Word id_ = 0;
};

}  // namespace detail

struct IdAssignment {
  std::vector<std::uint64_t> ids;  // node -> id in 1..n, preorder of the BFS tree
  RoundReport report;
};

// Dense identifiers 1..n computed inside the engine in O(diameter) rounds.
inline IdAssignment assign_ids(const NetworkGraph& g, NodeId root = 0, std::uint64_t seed = 0) {
  if (g.node_count() == 0) return {};
  if (root >= g.node_count()) throw Error(ErrorKind::InvalidArgument, "root out of range");
  std::vector<detail::IdAssignProgram> progs;
  progs.reserve(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) progs.emplace_back(v == root);
  EngineConfig cfg;
  cfg.seed = seed;
  cfg.budget_bits = 64;
  auto res = run(g, progs, cfg);
  IdAssignment out;
  out.report = res.report;
  out.ids.reserve(g.node_count());
  for (const auto& p : progs) {
    if (p.id() == 0) throw Error(ErrorKind::DisconnectedGraph, "graph is not connected");
    out.ids.push_back(p.id());
  }
  return out;
}

}  // namespace congestlab
