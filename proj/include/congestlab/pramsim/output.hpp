#pragma once

#include <set>

#include "congestlab/algolib/sort.hpp"
#include "congestlab/pramsim/simulate.hpp"

namespace congestlab {

// Processor (v, j) with neighbor w binary-searches a sorted array of packed
// edges (u << 32 | v) for (v, w), then for (w, v). The output word of
// processor pid has bit 0 set if (v, w) was found and bit 1 for (w, v).
class EdgeSearchProgram final : public PramProgram {
 public:
  EdgeSearchProgram(std::vector<Word> sorted, std::size_t processors)
      : sorted_(std::move(sorted)), p_(processors), steps_(1 + ceil_log2(std::max<std::size_t>(1, sorted_.size()))) {
    out_ = sorted_.size();
  }

  std::size_t processor_count() const override { return p_; }
  std::size_t round_count() const override { return sorted_.empty() ? 0 : 2 * steps_ + 1; }
  std::size_t memory_size() const override { return sorted_.size() + p_; }
  std::size_t local_words() const override { return 5; }  // key, lo, hi, found bits, (v, w)
  std::pair<std::size_t, std::size_t> output_region() const override { return {out_, out_ + p_}; }
  std::vector<Word> input_tape() const override { return sorted_; }

  void init(std::size_t, const ProcessorIdentity& id, std::span<Word> l) const override {
    l[0] = key(id.vertex, id.neighbor);
    l[1] = 0;
    l[2] = sorted_.size();
    l[3] = 0;
    l[4] = l[0];
  }

  std::optional<std::uint64_t> read(std::size_t, std::size_t round, std::span<const Word> l) const override {
    if (round == 2 * steps_ || l[1] >= l[2]) return std::nullopt;
    return l[1] + (l[2] - l[1]) / 2;
  }
  std::optional<WriteRequest> step(std::size_t pid, std::size_t round, std::span<Word> l,
                                   std::optional<Word> val) const override {
    if (round == 2 * steps_) return WriteRequest{out_ + pid, l[3]};
    if (val) {
      const Word mid = l[1] + (l[2] - l[1]) / 2;
      if (*val == l[0]) {
        l[3] |= round < steps_ ? 1 : 2;
        l[1] = l[2];
      } else if (*val < l[0]) {
        l[1] = mid + 1;
      } else {
        l[2] = mid;
      }
    }
    if (round + 1 == steps_) {  // start the reversed search
      l[0] = (l[4] << 32) | (l[4] >> 32);
      l[1] = 0;
      l[2] = sorted_.size();
    }
    return std::nullopt;
  }

  static Word key(NodeId a, NodeId b) { return (Word{a} << 32) | b; }

 private:
  std::vector<Word> sorted_;
  std::size_t p_;
  std::size_t steps_;
  std::size_t out_ = 0;
};

struct OutputDistribution {
  std::vector<std::set<NodeId>> incident;  // per node, neighbors across its output edges
  std::size_t sort_rounds = 0;
  std::size_t search_rounds = 0;
  RoundReport report;
  bool sort_matches = true;  // simulated sort equals the sequential sort
};

// Every real node learns its incident edges of an output subgraph given as
// a tape of (u, v) pairs: the packed edges are sorted by a simulated sorting
// network, then every slot searches for its edge in both orientations.
inline OutputDistribution distribute_output_subgraph(RoutingContext& ctx, const std::vector<Word>& tape,
                                                     const SimulateConfig& cfg = {}) {
  const NetworkGraph& g = ctx.graph();
  OutputDistribution out;
  out.incident.resize(g.node_count());
  std::vector<Word> keys;
  for (std::size_t i = 0; i + 1 < tape.size(); i += 2)
    keys.push_back(EdgeSearchProgram::key(static_cast<NodeId>(tape[i]), static_cast<NodeId>(tape[i + 1])));
  if (keys.empty()) return out;

  SortProgram sorter(keys);
  SimulationResult sorted = simulate(ctx, sorter, cfg);
  out.sort_rounds = sorted.pram_rounds;
  out.report += sorted.setup;
  out.report += sorted.report;
  std::vector<Word> expect = keys;
  std::sort(expect.begin(), expect.end());
  out.sort_matches = sorted.output == expect;

  EdgeSearchProgram search(sorted.output, g.volume());
  SimulationResult found = simulate(ctx, search, cfg);
  out.search_rounds = found.pram_rounds;
  out.report += found.setup;
  out.report += found.report;
  // Virtual node (v, j) is hosted at v, so v reads its slots' answers locally.
  const auto ids = processor_identities(g);
  for (std::size_t pid = 0; pid < ids.size(); ++pid)
    if (found.output[pid] != 0) out.incident[ids[pid].vertex].insert(ids[pid].neighbor);
  return out;
}

}  // namespace congestlab
