#pragma once

#include <algorithm>
#include <deque>
#include <string>

#include "congestlab/netcore/engine.hpp"
#include "congestlab/routing/exchange.hpp"

namespace congestlab {

// offsets[i] = sum of deg(v_i') over i' < i: the rank of slot (v_i, 0).
struct PhiTable {
  std::vector<std::uint64_t> offsets;
  std::uint64_t total = 0;  // 2m, the number of slots

  static PhiTable from_degrees(const std::vector<std::uint64_t>& degrees) {
    PhiTable t;
    t.offsets.reserve(degrees.size());
    for (auto d : degrees) {
      t.offsets.push_back(t.total);
      t.total += d;
    }
    return t;
  }
  static PhiTable of(const NetworkGraph& g) {
    std::vector<std::uint64_t> deg(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v) deg[v] = g.degree(v);
    return from_degrees(deg);
  }
  friend bool operator==(const PhiTable&, const PhiTable&) = default;
};

struct SlotRef {
  NodeId vertex;
  std::uint32_t slot;
  friend bool operator==(const SlotRef&, const SlotRef&) = default;
};

// Largest i with offsets[i] <= k, then j = k - offsets[i].
inline SlotRef lookup_phi(const PhiTable& t, std::uint64_t k) {
  if (k >= t.total)
    throw Error(ErrorKind::OutOfRange, "block " + std::to_string(k) + " >= " + std::to_string(t.total));
  const auto it = std::upper_bound(t.offsets.begin(), t.offsets.end(), k);
  const auto i = static_cast<NodeId>(it - t.offsets.begin() - 1);
  return {i, static_cast<std::uint32_t>(k - t.offsets[i])};
}

inline std::uint64_t rank(const PhiTable& t, SlotRef s) { return t.offsets.at(s.vertex) + s.slot; }

// M words split into one block of Bk = ceil(M / 2m) words per slot; block b
// belongs to the virtual node of rank b.
struct SharedMemoryLayout {
  std::size_t memory_size = 0;
  std::size_t blocks = 0;
  std::size_t block_words = 1;

  static SharedMemoryLayout make(std::size_t memory, std::size_t slots, std::size_t block_cap) {
    if (slots == 0) throw Error(ErrorKind::InvalidArgument, "no processors to own memory");
    SharedMemoryLayout l;
    l.memory_size = memory;
    l.blocks = slots;
    l.block_words = std::max<std::size_t>(1, ceil_div(memory, slots));
    if (l.block_words > block_cap)
      throw Error(ErrorKind::MemoryCapExceeded, "block size " + std::to_string(l.block_words) + " > cap " +
                                                    std::to_string(block_cap));
    return l;
  }
  std::size_t block_of(std::uint64_t addr) const { return static_cast<std::size_t>(addr / block_words); }
  std::size_t block_begin(std::size_t b) const { return b * block_words; }
};

namespace detail {

// Pipelined all-to-all broadcast over a BFS tree. Every node starts with one
// (index, value) entry; the tree is grown by Join messages from the root and
// a child reveals itself by sending its first entry up. Each entry crosses
// every tree edge once, one message per edge and direction per round.
class TableBroadcastNode {
 public:
  TableBroadcastNode(bool root, std::size_t n, std::uint32_t index, Word value, unsigned index_bits)
      : root_(root), index_bits_(index_bits), known_(n, 0), have_(n, 0) {
    learn(index, value);
  }

  void init(NodeContext& ctx) {
    if (root_) {
      joined_ = true;
      send_joins(ctx, {});
    }
    finish(ctx);
  }

  void round(NodeContext& ctx, std::span<const Message> inbox) {
    std::vector<EdgeId> joins;
    for (const Message& m : inbox)
      if ((m.payload.hi & 1) == 0) joins.push_back(m.edge);
    if (!joined_ && !joins.empty()) {
      joined_ = true;
      const EdgeId parent = *std::min_element(joins.begin(), joins.end());
      add_tree_edge(parent);
      send_joins(ctx, joins);
    }
    for (const Message& m : inbox) {
      if ((m.payload.hi & 1) == 0) continue;
      if (!is_tree_edge(m.edge)) add_tree_edge(m.edge);
      const auto idx = static_cast<std::uint32_t>(m.payload.hi >> 1);
      if (have_[idx]) continue;
      learn(idx, m.payload.lo);
      for (auto& te : tree_)
        if (te.edge != m.edge) te.queue.push_back(idx);
    }
    finish(ctx);
  }

  const std::vector<Word>& known() const noexcept { return known_; }
  std::size_t count() const noexcept { return count_; }

 private:
  struct TreeEdge {
    EdgeId edge;
    std::deque<std::uint32_t> queue;
  };

  void learn(std::uint32_t idx, Word value) {
    known_[idx] = value;
    have_[idx] = 1;
    ++count_;
  }
  bool is_tree_edge(EdgeId e) const {
    return std::any_of(tree_.begin(), tree_.end(), [e](const TreeEdge& t) { return t.edge == e; });
  }
  void add_tree_edge(EdgeId e) {
    TreeEdge te{e, {}};
    for (std::uint32_t i = 0; i < have_.size(); ++i)
      if (have_[i]) te.queue.push_back(i);
    tree_.push_back(std::move(te));
  }
  void send_joins(NodeContext& ctx, const std::vector<EdgeId>& skip) {
    for (EdgeId e : ctx.slots()) {
      if (ctx.neighbor(e) == ctx.id() || is_tree_edge(e)) continue;
      if (std::find(skip.begin(), skip.end(), e) != skip.end()) continue;
      ctx.send(e, Payload::tagged(0, index_bits_ + 1, 0));
    }
  }
  void finish(NodeContext& ctx) {
    bool idle = true;
    for (auto& te : tree_) {
      if (te.queue.empty()) continue;
      const std::uint32_t idx = te.queue.front();
      te.queue.pop_front();
      ctx.send(te.edge, Payload::tagged((Word{idx} << 1) | 1, index_bits_ + 1, known_[idx]));
      idle = idle && te.queue.empty();
    }
    ctx.set_done(joined_ && idle && count_ == known_.size());
  }

  bool root_;
  unsigned index_bits_;
  bool joined_ = false;
  std::vector<Word> known_;
  std::vector<char> have_;
  std::size_t count_ = 0;
  std::vector<TreeEdge> tree_;
};

}  // namespace detail

struct PhiPrecompute {
  PhiTable table;
  RoundReport report;  // prefix rounds plus broadcast
  std::size_t routing_calls = 0;
  std::size_t prefix_rounds = 0;
  std::size_t broadcast_rounds = 0;
};

// Distributed construction of the table. Node v's avatar (v, 0) owns entry v
// and knows deg(v); the degree array is prefix-summed by Hillis-Steele rounds
// whose reads are routing round trips, then every node receives the whole
// table by a pipelined broadcast. Node index order serves as the id order.
inline PhiPrecompute precompute_phi(RoutingContext& ctx) {
  const NetworkGraph& g = ctx.graph();
  const std::size_t n = g.node_count();
  PhiPrecompute out;
  std::vector<Word> val(n);
  for (NodeId v = 0; v < n; ++v) val[v] = g.degree(v);
  for (std::size_t step = 1; step < n; step *= 2) {
    std::vector<DemandPair> pairs;
    std::vector<std::vector<Word>> req;
    for (std::size_t i = step; i < n; ++i) {
      pairs.push_back({ctx.avatar(static_cast<NodeId>(i)), ctx.avatar(static_cast<NodeId>(i - step))});
      req.push_back({i - step});
    }
    const std::vector<Word> snapshot = val;
    auto res = round_trip_all(ctx, pairs, req, [&](std::size_t, const std::vector<Word>& w) {
      return std::vector<Word>{snapshot.at(w.at(0))};
    });
    for (std::size_t k = 0; k < pairs.size(); ++k) val[step + k] += res.replies[k].at(0);
    out.report += res.report;
    out.routing_calls += res.calls;
    ++out.prefix_rounds;
  }
  for (NodeId v = 0; v < n; ++v) val[v] -= g.degree(v);

  const unsigned index_bits = std::max(1U, ceil_log2(n));
  std::vector<detail::TableBroadcastNode> nodes;
  nodes.reserve(n);
  for (NodeId v = 0; v < n; ++v) nodes.emplace_back(v == 0, n, v, val[v], index_bits);
  EngineConfig ec;
  ec.budget_bits = 64 + index_bits + 1;
  ec.seed = derive_seed({ctx.seed(), 0x706869ULL});
  ec.max_rounds = 64 * (n + 16);
  auto run_res = run(g, nodes, ec);
  out.broadcast_rounds = run_res.report.rounds_elapsed;
  out.report += run_res.report;

  out.table.offsets.assign(nodes[0].known().begin(), nodes[0].known().end());
  out.table.total = out.table.offsets.empty() ? 0 : out.table.offsets.back() + g.degree(static_cast<NodeId>(n - 1));
  for (NodeId v = 0; v < n; ++v)
    if (nodes[v].count() != n || nodes[v].known() != nodes[0].known())
      throw Error(ErrorKind::OwnershipMiss, "node " + std::to_string(v) + " holds a different table");
  return out;
}

}  // namespace congestlab
