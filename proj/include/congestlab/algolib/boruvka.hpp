#pragma once

#include <algorithm>
#include <map>
#include <numeric>

#include "congestlab/pramsim/program.hpp"

namespace congestlab {

struct WeightedEdge {
  EdgeId id;
  NodeId u, v;  // u < v
  Word weight;
};

// Non-loop edges ordered by (weight, edge id), the total order that makes the
// MST unique.
inline std::vector<WeightedEdge> edges_by_weight(const NetworkGraph& g, const std::vector<Word>& weights) {
  if (weights.size() != g.edge_count()) throw Error(ErrorKind::InvalidArgument, "one weight per edge");
  std::vector<WeightedEdge> es;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    if (ed.u == ed.v) continue;
    es.push_back({e, std::min(ed.u, ed.v), std::max(ed.u, ed.v), weights[e]});
  }
  std::sort(es.begin(), es.end(),
            [](const WeightedEdge& a, const WeightedEdge& b) { return a.weight != b.weight ? a.weight < b.weight : a.id < b.id; });
  return es;
}

namespace detail {

struct UnionFind {
  std::vector<NodeId> up;
  explicit UnionFind(std::size_t n) : up(n) { std::iota(up.begin(), up.end(), NodeId{0}); }
  NodeId find(NodeId x) {
    while (up[x] != x) x = up[x] = up[up[x]];
    return x;
  }
  bool unite(NodeId a, NodeId b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    up[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace detail

struct MstOracle {
  std::vector<EdgeId> edges;                      // by (weight, id)
  std::vector<std::pair<NodeId, NodeId>> pairs;   // sorted, u < v
  Word weight = 0;
};

inline MstOracle kruskal(const NetworkGraph& g, const std::vector<Word>& weights) {
  MstOracle out;
  detail::UnionFind uf(g.node_count());
  for (const auto& e : edges_by_weight(g, weights))
    if (uf.unite(e.u, e.v)) {
      out.edges.push_back(e.id);
      out.pairs.push_back({e.u, e.v});
      out.weight += e.weight;
    }
  if (g.node_count() > 0 && out.edges.size() + 1 != g.node_count())
    throw Error(ErrorKind::Disconnected, "graph has no spanning tree");
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

// Output tape of the MST program read back as sorted (u, v) pairs.
inline std::vector<std::pair<NodeId, NodeId>> edge_pairs(const std::vector<Word>& tape) {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (std::size_t i = 0; i + 1 < tape.size(); i += 2)
    out.push_back({static_cast<NodeId>(tape[i]), static_cast<NodeId>(tape[i + 1])});
  std::sort(out.begin(), out.end());
  return out;
}

// Weight of an MST given as pairs: the lightest parallel edge of each pair.
inline Word pair_weight(const NetworkGraph& g, const std::vector<Word>& weights,
                        const std::vector<std::pair<NodeId, NodeId>>& pairs) {
  std::map<std::pair<NodeId, NodeId>, Word> lightest;
  for (const auto& e : edges_by_weight(g, weights)) lightest.emplace(std::pair{e.u, e.v}, e.weight);
  Word w = 0;
  for (const auto& pr : pairs) w += lightest.at(pr);
  return w;
}

// Boruvka with hooking and pointer jumping. Edge processors come in pairs:
// processor 2r + s handles side s of the edge of weight rank r, so the
// lowest-pid write rule picks each component's lightest outgoing edge.
// Vertex processor v keeps comp[v]. After ceil(log2 n) phases the marked
// edges are compacted by a prefix sum (processor r for rank r) into the
// output tape of (u, v) pairs, u < v, in weight order.
//
// Memory: adjacency tape | U, V by rank | comp | best | mark | out.
class BoruvkaProgram final : public PramProgram {
 public:
  BoruvkaProgram(const NetworkGraph& g, const std::vector<Word>& weights) : n_(g.node_count()) {
    kruskal(g, weights);  // Disconnected check
    const auto es = edges_by_weight(g, weights);
    me_ = es.size();
    tape_ = adjacency_tape(g);
    U_ = tape_.size();
    V_ = U_ + me_;
    for (const auto& e : es) tape_.push_back(e.u);
    for (const auto& e : es) tape_.push_back(e.v);
    comp_ = tape_.size();
    for (NodeId v = 0; v < n_; ++v) tape_.push_back(v);
    best_ = comp_ + n_;
    mark_ = best_ + n_;
    out_ = mark_ + me_;
    memory_ = out_ + 2 * (n_ > 0 ? n_ - 1 : 0);
    phases_ = n_ > 1 ? ceil_log2(n_) : 0;
    jumps_ = std::max<std::size_t>(1, ceil_log2(n_));
    scan_ = ceil_log2(std::max<std::size_t>(1, me_));
  }

  std::size_t phases() const noexcept { return phases_; }
  std::size_t processor_count() const override { return std::max(n_, 2 * me_); }
  std::size_t round_count() const override {
    return n_ > 1 ? kSetup + phases_ * phase_len() + 1 + scan_ + 3 : 0;
  }
  std::size_t memory_size() const override { return memory_; }
  std::size_t local_words() const override { return 8; }
  std::pair<std::size_t, std::size_t> output_region() const override { return {out_, memory_}; }
  std::vector<Word> input_tape() const override { return tape_; }

  std::optional<std::uint64_t> read(std::size_t pid, std::size_t round, std::span<const Word> l) const override {
    const bool side = pid < 2 * me_, vertex = pid < n_, rank = pid < me_;
    const std::size_t r = pid / 2;
    const bool second = pid & 1;
    if (round < kSetup) {
      if (!side) return std::nullopt;
      return ((round == 0) != second ? U_ : V_) + r;  // own endpoint, then the other
    }
    round -= kSetup;
    if (round < phases_ * phase_len()) {
      const std::size_t k = round % phase_len();
      const bool live = side && l[kA] != l[kB];
      switch (k) {
        case 1: return side ? std::optional<std::uint64_t>(comp_ + l[kX]) : std::nullopt;
        case 2: return side ? std::optional<std::uint64_t>(comp_ + l[kY]) : std::nullopt;
        case 3: return live ? std::optional<std::uint64_t>(best_ + l[kA]) : std::nullopt;
        case 4: return live ? std::optional<std::uint64_t>(best_ + l[kB]) : std::nullopt;
        case 6: return vertex ? std::optional<std::uint64_t>(comp_ + pid) : std::nullopt;
        default:
          if (k > 6 && vertex) return comp_ + l[kPtr];
          return std::nullopt;
      }
    }
    round -= phases_ * phase_len();
    if (!rank) return std::nullopt;
    if (round == 0) return mark_ + pid;
    if (round <= scan_) {
      const std::size_t s = std::size_t{1} << (round - 1);
      if (pid < s) return std::nullopt;
      return mark_ + pid - s;
    }
    if (l[kFlags] == 0) return std::nullopt;
    if (round == scan_ + 1) return U_ + pid;
    if (round == scan_ + 2) return V_ + pid;
    return std::nullopt;
  }

  std::optional<WriteRequest> step(std::size_t pid, std::size_t round, std::span<Word> l,
                                   std::optional<Word> val) const override {
    const bool side = pid < 2 * me_, vertex = pid < n_, rank = pid < me_;
    const std::size_t r = pid / 2;
    const Word self = r + 1;  // best[] holds rank + 1
    if (round < kSetup) {
      if (side) l[round == 0 ? kX : kY] = *val;
      return std::nullopt;
    }
    round -= kSetup;
    if (round < phases_ * phase_len()) {
      const std::size_t k = round % phase_len();
      switch (k) {
        case 0: return vertex ? std::optional<WriteRequest>(WriteRequest{best_ + pid, 0}) : std::nullopt;
        case 1:
          if (side) l[kA] = *val;
          return std::nullopt;
        case 2:
          if (!side) return std::nullopt;
          l[kB] = *val;
          l[kFlags] = 0;
          if (l[kA] == l[kB]) return std::nullopt;
          return WriteRequest{best_ + l[kA], self};
        case 3:
          if (val && *val == self) l[kFlags] |= 1;
          return std::nullopt;
        case 4:
          if (val && *val == self) l[kFlags] |= 2;
          // Mutual lightest edges hook only the larger label onto the smaller.
          if ((l[kFlags] & 1) && !((l[kFlags] & 2) && l[kA] < l[kB])) return WriteRequest{comp_ + l[kA], l[kB]};
          return std::nullopt;
        case 5:
          if (side && (l[kFlags] & 1)) return WriteRequest{mark_ + r, 1};
          return std::nullopt;
        case 6:
          if (vertex) l[kPtr] = *val;
          return std::nullopt;
        default:
          if (!vertex) return std::nullopt;
          l[kPtr] = *val;
          return WriteRequest{comp_ + pid, *val};
      }
    }
    round -= phases_ * phase_len();
    if (!rank) return std::nullopt;
    if (round == 0) {
      l[kFlags] = *val;  // own mark
      l[kAcc] = *val;
      return std::nullopt;
    }
    if (round <= scan_) {
      if (!val) return std::nullopt;
      l[kAcc] += *val;
      return WriteRequest{mark_ + pid, l[kAcc]};
    }
    if (l[kFlags] == 0) return std::nullopt;
    const std::size_t at = out_ + 2 * (l[kAcc] - 1);
    if (round == scan_ + 1) {
      l[kX] = *val;
      return std::nullopt;
    }
    if (round == scan_ + 2) {
      l[kY] = *val;
      return WriteRequest{at, l[kX]};
    }
    return WriteRequest{at + 1, l[kY]};
  }

 private:
  static constexpr std::size_t kSetup = 2;
  // local words
  static constexpr std::size_t kX = 0, kY = 1, kA = 2, kB = 3, kFlags = 4, kPtr = 5, kAcc = 6;

  std::size_t phase_len() const noexcept { return 7 + jumps_; }

  std::size_t n_ = 0, me_ = 0;
  std::vector<Word> tape_;
  std::size_t U_ = 0, V_ = 0, comp_ = 0, best_ = 0, mark_ = 0, out_ = 0, memory_ = 0;
  std::size_t phases_ = 0, jumps_ = 1, scan_ = 0;
};

// Distinct-enough random weights in [1, max_weight]; ties are broken by edge id.
inline std::vector<Word> random_weights(const NetworkGraph& g, std::uint64_t seed, Word max_weight = Word{1} << 20) {
  Rng rng(derive_seed({seed, 0x77656967ULL}));
  std::vector<Word> w(g.edge_count());
  for (auto& x : w) x = 1 + rng.below(max_weight);
  return w;
}

}  // namespace congestlab
