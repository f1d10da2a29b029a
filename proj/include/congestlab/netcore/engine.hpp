#pragma once

#include <chrono>
#include <concepts>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "congestlab/common.hpp"
#include "congestlab/netcore/graph.hpp"

namespace congestlab {

// A message body of at most 128 bits. `bits` is the declared size charged
// against the bandwidth budget; content above it must be zero.
struct Payload {
  Word lo = 0;
  Word hi = 0;
  unsigned bits = 64;

  static Payload word(Word w, unsigned bits = 64) { return Payload{w, 0, bits}; }
  // A tag in the high part followed by a full 64-bit word.
  static Payload tagged(Word tag, unsigned tag_bits, Word w) { return Payload{w, tag, 64 + tag_bits}; }

  bool fits() const noexcept {
    if (bits >= 128) return true;
    if (bits >= 64) return bits == 64 ? hi == 0 : (hi >> (bits - 64)) == 0;
    return hi == 0 && (lo >> bits) == 0;
  }

  std::string hex() const {
    char buf[40];
    if (hi != 0)
      std::snprintf(buf, sizeof buf, "%llx%016llx", static_cast<unsigned long long>(hi),
                    static_cast<unsigned long long>(lo));
    else
      std::snprintf(buf, sizeof buf, "%llx", static_cast<unsigned long long>(lo));
    return buf;
  }

  friend bool operator==(const Payload&, const Payload&) = default;
};

struct Message {
  EdgeId edge;
  Payload payload;
};

struct RoundReport {
  std::size_t rounds_elapsed = 0;
  std::size_t messages_sent = 0;
  std::size_t messages_delivered = 0;
  unsigned max_edge_load = 0;  // largest payload, in bits, on any (edge, direction, round)
  std::size_t violations = 0;
  double wall_ms = 0.0;  // courtesy metric, never part of reports that must be reproducible

  RoundReport& operator+=(const RoundReport& o) {
    rounds_elapsed += o.rounds_elapsed;
    messages_sent += o.messages_sent;
    messages_delivered += o.messages_delivered;
    max_edge_load = std::max(max_edge_load, o.max_edge_load);
    violations += o.violations;
    wall_ms += o.wall_ms;
    return *this;
  }
};

struct TranscriptRecord {
  std::size_t round;  // round in which the message was sent
  EdgeId edge;
  unsigned direction;  // 0: u -> v, 1: v -> u
  Payload payload;
  friend bool operator==(const TranscriptRecord&, const TranscriptRecord&) = default;
};

struct Transcript {
  std::vector<TranscriptRecord> records;

  void write_jsonl(std::ostream& os) const {
    for (const auto& r : records)
      os << "{\"round\":" << r.round << ",\"edge\":" << r.edge << ",\"dir\":" << r.direction
         << ",\"payload\":\"" << r.payload.hex() << "\"}\n";
  }

  std::uint64_t digest() const {
    std::uint64_t h = 0;
    for (const auto& r : records)
      h = derive_seed({h, r.round, r.edge, r.direction, r.payload.lo, r.payload.hi, r.payload.bits});
    return h;
  }
};

struct EngineConfig {
  unsigned budget_bits = 64;
  std::size_t max_rounds = 1'000'000;
  std::uint64_t seed = 0;
  bool record_transcript = false;
};

struct RunResult {
  RoundReport report;
  Transcript transcript;
};

class Engine;

// What a node program may touch: its own id, its incident edges, its own
// randomness stream and its outbox. Nothing about other nodes' state.
class NodeContext {
 public:
  NodeId id() const noexcept { return id_; }
  std::size_t round() const noexcept { return round_; }
  std::size_t node_count() const noexcept { return graph_->node_count(); }
  std::span<const EdgeId> incident() const { return graph_->incident(id_); }
  std::span<const EdgeId> slots() const { return graph_->slots(id_); }
  NodeId neighbor(EdgeId e) const;
  Rng& rng() noexcept { return *rng_; }

  void send(EdgeId e, const Payload& p);
  void send(EdgeId e, Word w) { send(e, Payload::word(w)); }

  // A done node is not invoked again until a message reaches it.
  void set_done(bool done = true) noexcept { *done_ = done; }
  bool done() const noexcept { return *done_; }

 private:
  friend class Engine;
  NodeContext(Engine& eng, const NetworkGraph& g) : engine_(&eng), graph_(&g) {}

  Engine* engine_;
  const NetworkGraph* graph_;
  NodeId id_ = 0;
  std::size_t round_ = 0;
  Rng* rng_ = nullptr;
  char* done_ = nullptr;
};

template <typename P>
concept NodeProgramLike = requires(P p, NodeContext& ctx, std::span<const Message> inbox) {
  p.init(ctx);
  p.round(ctx, inbox);
};

// Synchronous-round CONGEST engine. Round 0 is the init hook; messages sent
// in round r are in the receiver's inbox in round r+1. At most one message per
// (edge, direction, round), each at most budget_bits.
class Engine {
 public:
  Engine(const NetworkGraph& g, EngineConfig cfg) : graph_(g), cfg_(cfg) {
    if (cfg_.budget_bits < ceil_log2(g.node_count()))
      throw Error(ErrorKind::InvalidArgument, "budget_bits below ceil(log2 n)");
    const std::size_t n = g.node_count();
    rngs_.reserve(n);
    for (NodeId v = 0; v < n; ++v) rngs_.emplace_back(derive_seed({cfg_.seed, 0x6e6f6465ULL, v}));
    done_.assign(n, 0);
    inbox_.resize(n);
    next_inbox_.resize(n);
    last_sent_.assign(2 * g.edge_count(), 0);
  }

  template <NodeProgramLike P>
  RunResult run(std::span<P> programs) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = graph_.node_count();
    if (programs.size() != n) throw Error(ErrorKind::InvalidArgument, "need exactly one program per node");

    NodeContext ctx(*this, graph_);
    round_ = 0;
    for (NodeId v = 0; v < n; ++v) {
      bind(ctx, v);
      programs[v].init(ctx);
    }
    std::vector<NodeId> awake;
    std::size_t r = 0;
    while (true) {
      flip_inboxes();
      awake.clear();
      for (NodeId v = 0; v < n; ++v)
        if (!done_[v] || !inbox_[v].empty()) awake.push_back(v);
      if (awake.empty()) break;
      ++r;
      if (r > cfg_.max_rounds)
        throw Error(ErrorKind::RoundLimitExceeded, "no termination after " + std::to_string(cfg_.max_rounds) + " rounds");
      round_ = r;
      for (NodeId v : awake) {
        bind(ctx, v);
        report_.messages_delivered += inbox_[v].size();
        programs[v].round(ctx, std::span<const Message>(inbox_[v]));
      }
    }
    report_.rounds_elapsed = r;
    report_.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    RunResult out{report_, std::move(transcript_)};
    return out;
  }

  template <NodeProgramLike P>
  RunResult run(std::vector<P>& programs) {
    return run(std::span<P>(programs));
  }

 private:
  friend class NodeContext;

  void bind(NodeContext& ctx, NodeId v) {
    ctx.id_ = v;
    ctx.round_ = round_;
    ctx.rng_ = &rngs_[v];
    ctx.done_ = &done_[v];
  }

  void flip_inboxes() {
    for (NodeId v : touched_) inbox_[v].clear();
    touched_.clear();
    std::swap(inbox_, next_inbox_);
    for (NodeId v : pending_) touched_.push_back(v);
    pending_.clear();
  }

  void send(NodeId from, EdgeId e, const Payload& p) {
    if (!graph_.is_incident(from, e))
      throw Error(ErrorKind::NonIncidentEdge, "node " + std::to_string(from) + " edge " + std::to_string(e));
    const Edge& ed = graph_.edge(e);
    const unsigned dir = ed.u == from ? 0U : 1U;
    const std::size_t key = 2 * static_cast<std::size_t>(e) + dir;
    if (p.bits > cfg_.budget_bits || !p.fits() || last_sent_[key] == round_ + 1) {
      ++report_.violations;
      throw Error(ErrorKind::BandwidthViolation, "node " + std::to_string(from) + " edge " + std::to_string(e) +
                                                     " round " + std::to_string(round_));
    }
    last_sent_[key] = round_ + 1;
    const NodeId to = dir == 0 ? ed.v : ed.u;
    if (next_inbox_[to].empty()) pending_.push_back(to);
    next_inbox_[to].push_back(Message{e, p});
    ++report_.messages_sent;
    report_.max_edge_load = std::max(report_.max_edge_load, p.bits);
    if (cfg_.record_transcript) transcript_.records.push_back({round_, e, dir, p});
  }

  const NetworkGraph& graph_;
  EngineConfig cfg_;
  std::size_t round_ = 0;
  std::vector<Rng> rngs_;
  std::vector<char> done_;
  std::vector<std::vector<Message>> inbox_;
  std::vector<std::vector<Message>> next_inbox_;
  std::vector<NodeId> pending_;  // nodes with a non-empty next_inbox_
  std::vector<NodeId> touched_;  // nodes with a non-empty inbox_
  std::vector<std::size_t> last_sent_;
  RoundReport report_;
  Transcript transcript_;
};

inline NodeId NodeContext::neighbor(EdgeId e) const {
  if (!graph_->is_incident(id_, e))
    throw Error(ErrorKind::NonIncidentEdge, "node " + std::to_string(id_) + " edge " + std::to_string(e));
  return graph_->other_end(e, id_);
}

inline void NodeContext::send(EdgeId e, const Payload& p) { engine_->send(id_, e, p); }

// One-shot helper.
template <NodeProgramLike P>
RunResult run(const NetworkGraph& g, std::vector<P>& programs, EngineConfig cfg = {}) {
  Engine eng(g, cfg);
  return eng.run(programs);
}

}  // namespace congestlab
