#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include "congestlab/netcore/engine.hpp"
#include "congestlab/routing/types.hpp"

namespace congestlab {

struct DeliveryConfig {
  double kappa_sched = 4.0;
  bool random_delay = true;  // false: every pair is released in round 0
  std::uint64_t seed = 0;
  bool record_transcript = false;
};

struct DeliveryResult {
  std::vector<std::vector<Word>> delivered;  // per pair, words in sent order
  std::vector<std::size_t> arrival_round;    // per pair, round the last word arrived
  RoundReport report;
  Transcript transcript;
  std::size_t congestion = 0;  // of the word-weighted path system
  std::size_t dilation = 0;
  std::size_t round_cap = 0;
  double kappa_measured = 0.0;  // rounds / ((c + d) * ceil(log2 n))
};

namespace detail {

// Store-and-forward node for path delivery. Knows, for every unit that
// visits it, the next edge of each visit in order (the path neighbors a
// routing solution installs at on-path nodes), plus the units it originates
// and their release rounds. One FIFO queue per incident edge; each round the
// head of every non-empty queue is sent.
class DeliveryNode {
 public:
  struct Origin {
    std::uint32_t unit;
    std::size_t release;
    Word word;
  };
  struct Arrival {
    std::uint32_t unit;
    Word word;
    std::size_t round;
  };

  void add_visit(std::uint32_t unit, EdgeId next) { plan_.push_back({unit, next}); }
  void add_origin(const Origin& o) { origins_.push_back(o); }
  void set_tag_bits(unsigned b) { tag_bits_ = b; }

  void init(NodeContext& ctx) {
    std::sort(origins_.begin(), origins_.end(),
              [](const Origin& a, const Origin& b) { return a.release != b.release ? a.release < b.release : a.unit < b.unit; });
    std::stable_sort(plan_.begin(), plan_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    cursor_.assign(plan_.size(), 0);
    const auto sl = ctx.slots();
    edges_.assign(sl.begin(), sl.end());
    queues_.resize(edges_.size());
    // Next edges become queue positions; kNoEdge stays as the arrival mark.
    for (auto& [unit, next] : plan_)
      if (next != kNoEdge) next = static_cast<EdgeId>(std::lower_bound(edges_.begin(), edges_.end(), next) - edges_.begin());
    // unit -> first plan entry, open addressing
    std::size_t cap = 16;
    while (cap < 2 * plan_.size()) cap *= 2;
    index_.assign(cap, {kNoUnit, 0});
    for (std::uint32_t i = 0; i < plan_.size(); ++i) {
      if (i > 0 && plan_[i].first == plan_[i - 1].first) continue;
      std::size_t h = slot_hash(plan_[i].first);
      while (index_[h].first != kNoUnit) h = (h + 1) & (index_.size() - 1);
      index_[h] = {plan_[i].first, i};
    }
    release(ctx);
    flush(ctx);
  }

  void round(NodeContext& ctx, std::span<const Message> inbox) {
    for (const Message& m : inbox) forward(ctx, static_cast<std::uint32_t>(m.payload.hi), m.payload.lo);
    release(ctx);
    flush(ctx);
  }

  const std::vector<Arrival>& arrivals() const noexcept { return arrivals_; }

 private:
  struct Queued {
    std::uint32_t unit;
    Word word;
  };

  void forward(NodeContext& ctx, std::uint32_t unit, Word w) {
    std::size_t h = index_.empty() ? 0 : slot_hash(unit);
    while (!index_.empty() && index_[h].first != unit && index_[h].first != kNoUnit) h = (h + 1) & (index_.size() - 1);
    const std::size_t first = index_.empty() || index_[h].first != unit ? plan_.size() : index_[h].second;
    const std::size_t at = first + (first < plan_.size() ? cursor_[first] : 0);
    if (at >= plan_.size() || plan_[at].first != unit)
      throw Error(ErrorKind::InvalidArgument, "unit " + std::to_string(unit) + " has no plan at node " +
                                                  std::to_string(ctx.id()));
    ++cursor_[first];
    const EdgeId next = plan_[at].second;
    if (next == kNoEdge) {
      arrivals_.push_back({unit, w, ctx.round()});
      return;
    }
    queues_[next].push_back({unit, w});
    ++queued_;
  }

  void release(NodeContext& ctx) {
    while (next_origin_ < origins_.size() && origins_[next_origin_].release <= ctx.round()) {
      const Origin& o = origins_[next_origin_++];
      forward(ctx, o.unit, o.word);
    }
  }

  void flush(NodeContext& ctx) {
    if (queued_ > 0) {
      for (std::size_t i = 0; i < queues_.size(); ++i) {
        if (queues_[i].empty()) continue;
        const Queued q = queues_[i].front();
        queues_[i].pop_front();
        --queued_;
        ctx.send(edges_[i], Payload::tagged(q.unit, tag_bits_, q.word));
      }
    }
    ctx.set_done(queued_ == 0 && next_origin_ == origins_.size());
  }

  static constexpr std::uint32_t kNoUnit = 0xffffffffU;
  std::size_t slot_hash(std::uint32_t unit) const noexcept {
    return static_cast<std::size_t>((unit * 0x9e3779b97f4a7c15ULL) >> 20) & (index_.size() - 1);
  }

  unsigned tag_bits_ = 1;
  std::vector<std::pair<std::uint32_t, EdgeId>> plan_;  // (unit, next queue) by unit, then visit order
  std::vector<std::pair<std::uint32_t, std::uint32_t>> index_;
  std::vector<std::uint32_t> cursor_;                   // visits used, kept at each unit's first entry
  std::vector<Origin> origins_;
  std::size_t next_origin_ = 0;
  std::vector<EdgeId> edges_;
  std::vector<std::deque<Queued>> queues_;
  std::size_t queued_ = 0;
  std::vector<Arrival> arrivals_;
};

}  // namespace detail

// Sends payloads[i] (one or more words) from paths[i].start to the end of
// paths[i] hop by hop inside the round engine. Each pair starts after a
// random delay in [0, c); contention is resolved by FIFO queues. Messages
// carry a unit tag next to the 64-bit word, so the bandwidth budget is
// 64 + ceil(log2 units) bits.
inline DeliveryResult deliver(const NetworkGraph& g, const std::vector<Path>& paths,
                              const std::vector<std::vector<Word>>& payloads, const DeliveryConfig& cfg = {}) {
  if (paths.size() != payloads.size()) throw Error(ErrorKind::InvalidArgument, "one payload list per path");
  const std::size_t n = g.node_count();
  DeliveryResult res;
  res.delivered.resize(paths.size());
  res.arrival_round.assign(paths.size(), 0);

  // Word-weighted congestion and dilation fix the delay range and round cap.
  {
    std::vector<std::size_t> load(g.edge_count(), 0);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      if (payloads[i].empty()) continue;
      res.dilation = std::max(res.dilation, paths[i].edges.size());
      for (EdgeId e : paths[i].edges) {
        load.at(e) += payloads[i].size();
        res.congestion = std::max(res.congestion, load[e]);
      }
    }
  }
  const std::size_t lg = std::max<std::size_t>(1, ceil_log2(n));
  res.round_cap = static_cast<std::size_t>(
      std::ceil(cfg.kappa_sched * static_cast<double>(res.congestion + res.dilation) * static_cast<double>(lg)));

  std::vector<std::pair<std::uint32_t, std::uint32_t>> unit_of;  // unit -> (pair, word index)
  std::vector<detail::DeliveryNode> nodes(n);
  Rng delay_rng(derive_seed({cfg.seed, 0x64656c6179ULL}));
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const Path& p = paths[i];
    if (payloads[i].empty()) continue;
    if (p.start >= n) throw Error(ErrorKind::InvalidArgument, "path start out of range");
    const std::size_t delay = cfg.random_delay && res.congestion > 0 ? delay_rng.below(res.congestion) : 0;
    for (std::size_t w = 0; w < payloads[i].size(); ++w) {
      const auto unit = static_cast<std::uint32_t>(unit_of.size());
      unit_of.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(w)});
      NodeId x = p.start;
      nodes[x].add_origin({unit, delay, payloads[i][w]});
      for (EdgeId e : p.edges) {
        nodes[x].add_visit(unit, e);
        x = g.other_end(e, x);
      }
      nodes[x].add_visit(unit, kNoEdge);
    }
  }
  const unsigned tag_bits = std::max(1U, ceil_log2(std::max<std::size_t>(unit_of.size(), 2)));
  for (auto& nd : nodes) nd.set_tag_bits(tag_bits);

  EngineConfig ec;
  ec.budget_bits = 64 + tag_bits;
  ec.seed = cfg.seed;
  ec.record_transcript = cfg.record_transcript;
  ec.max_rounds = std::max<std::size_t>(1000, 64 * res.round_cap);
  RunResult run_res = run(g, nodes, ec);
  res.report = run_res.report;
  res.transcript = std::move(run_res.transcript);

  std::vector<std::vector<std::pair<std::uint32_t, Word>>> got(paths.size());
  for (const auto& nd : nodes)
    for (const auto& a : nd.arrivals()) {
      const auto [pair, idx] = unit_of[a.unit];
      got[pair].push_back({idx, a.word});
      res.arrival_round[pair] = std::max(res.arrival_round[pair], a.round);
    }
  for (std::size_t i = 0; i < paths.size(); ++i) {
    std::sort(got[i].begin(), got[i].end());
    for (const auto& [idx, w] : got[i]) res.delivered[i].push_back(w);
  }
  const double denom = static_cast<double>(std::max<std::size_t>(1, res.congestion + res.dilation)) * static_cast<double>(lg);
  res.kappa_measured = static_cast<double>(res.report.rounds_elapsed) / denom;
  if (res.report.rounds_elapsed > std::max<std::size_t>(res.round_cap, 1))
    throw Error(ErrorKind::RoundCapExceeded, "delivery took " + std::to_string(res.report.rounds_elapsed) +
                                                 " rounds > cap " + std::to_string(res.round_cap) +
                                                 "; measured kappa " + std::to_string(res.kappa_measured));
  return res;
}

}  // namespace congestlab
