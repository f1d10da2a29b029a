#pragma once

#include <algorithm>
#include <map>
#include <string>

#include "congestlab/pramsim/fantree.hpp"
#include "congestlab/pramsim/phi.hpp"
#include "congestlab/pramsim/run_pram.hpp"

namespace congestlab {

struct SimulateConfig {
  std::size_t hot_threshold = 8;  // more distinct requesters than this: fan-tree
  std::size_t block_cap = 64;     // largest admissible block, in words
  FanTreeConfig fantree;
};

struct SimulationResult {
  std::vector<Word> memory;
  std::vector<Word> output;
  SharedMemoryLayout layout;
  std::size_t pram_rounds = 0;
  RoundReport setup;   // table precomputation
  RoundReport report;  // all PRAM rounds
  std::size_t routing_calls = 0;
  std::size_t local_reads = 0;
  std::size_t remote_reads = 0;
  std::size_t local_writes = 0;
  std::size_t remote_writes = 0;
  std::size_t read_sessions = 0;   // read fan-trees
  std::size_t write_sessions = 0;  // write fan-ins
  std::size_t root_contacts = 0;
  std::size_t fantree_resamples = 0;
  std::size_t max_round_cost = 0;  // network rounds of the costliest PRAM round
  double max_kappa = 0.0;          // delivery, over all routing calls
  double max_tree_kappa = 0.0;     // fan-tree load / log2^2 n

  std::size_t fan_tree_sessions() const noexcept { return read_sessions + write_sessions; }
};

// Runs prog on the network: processor pid is the virtual node of rank pid,
// memory block b lives at the virtual node of rank b, and every PRAM round
// becomes routed reads (fan-trees for hot blocks) followed by routed writes
// that the owners apply with the lowest-pid rule.
inline SimulationResult simulate(RoutingContext& ctx, const PramProgram& prog, const SimulateConfig& cfg = {}) {
  const NetworkGraph& g = ctx.graph();
  const std::size_t nv = ctx.virtual_count();
  const std::size_t p = prog.processor_count();
  const std::size_t lw = prog.local_words();
  if (p > nv)
    throw Error(ErrorKind::InvalidArgument, std::to_string(p) + " processors > " + std::to_string(nv) + " virtual nodes");

  SimulationResult out;
  PhiPrecompute phi = precompute_phi(ctx);
  out.setup = phi.report;
  out.routing_calls += phi.routing_calls;
  const PhiTable& table = phi.table;
  out.layout = SharedMemoryLayout::make(prog.memory_size(), static_cast<std::size_t>(table.total), cfg.block_cap);
  const SharedMemoryLayout& lay = out.layout;

  auto owner = [&](std::size_t b) {
    const SlotRef s = lookup_phi(table, b);
    if (s.slot >= g.degree(s.vertex) || rank(table, s) != b)
      throw Error(ErrorKind::OwnershipMiss, "block " + std::to_string(b) + " resolved to a foreign slot");
    return static_cast<NodeId>(rank(table, s));
  };
  auto block_words = [&](std::size_t b) {
    std::vector<Word> w(lay.block_words, 0);
    const std::size_t lo = lay.block_begin(b);
    for (std::size_t i = 0; i < lay.block_words && lo + i < out.memory.size(); ++i) w[i] = out.memory[lo + i];
    return w;
  };
  auto absorb = [&](const ExchangeResult& ex, RoundReport& rr) {
    rr += ex.report;
    out.routing_calls += ex.calls;
    out.max_kappa = std::max(out.max_kappa, ex.kappa);
  };
  auto absorb_tree = [&](const FanTreeStats& st, RoundReport& rr) {
    rr += st.report;
    out.routing_calls += st.routing_calls;
    out.root_contacts += st.root_contacts;
    out.fantree_resamples += st.resamples;
    out.max_tree_kappa = std::max(out.max_tree_kappa, st.kappa_measured);
  };

  // Input tape preloaded into the owners' blocks.
  out.memory = detail::initial_memory(prog);
  const std::vector<ProcessorIdentity> ids = processor_identities(g);
  std::vector<Word> local(p * lw, 0);
  for (std::size_t pid = 0; pid < p; ++pid) prog.init(pid, ids[pid], std::span<Word>(local.data() + pid * lw, lw));

  std::vector<std::optional<Word>> values(p);
  for (std::size_t r = 0; r < prog.round_count(); ++r) {
    RoundReport rr;

    // Reads, against the memory as it stands at the start of the round.
    std::map<std::size_t, std::vector<std::size_t>> want;  // block -> remote requesters
    std::vector<std::uint64_t> addr_of(p, 0);
    for (std::size_t pid = 0; pid < p; ++pid) {
      values[pid].reset();
      const auto a = prog.read(pid, r, std::span<const Word>(local.data() + pid * lw, lw));
      if (!a) continue;
      detail::check_address(*a, out.memory.size(), pid, r);
      addr_of[pid] = *a;
      const std::size_t b = lay.block_of(*a);
      if (owner(b) == pid) {
        values[pid] = out.memory[*a];
        ++out.local_reads;
      } else {
        want[b].push_back(pid);
        ++out.remote_reads;
      }
    }
    std::vector<FanTreeSession> sessions;
    std::vector<std::size_t> session_block;
    std::vector<DemandPair> pairs;
    std::vector<std::vector<Word>> req;
    std::vector<std::size_t> req_pid;
    for (const auto& [b, pids] : want) {
      const NodeId o = owner(b);
      if (pids.size() > cfg.hot_threshold) {
        FanTreeSession s{o, {}};
        for (auto pid : pids) s.leaves.push_back(static_cast<NodeId>(pid));
        sessions.push_back(std::move(s));
        session_block.push_back(b);
      } else {
        for (auto pid : pids) {
          pairs.push_back({static_cast<NodeId>(pid), o});
          req.push_back({addr_of[pid]});
          req_pid.push_back(pid);
        }
      }
    }
    if (!sessions.empty()) {
      FanOutResult fo = fanin_fanout(ctx, sessions, [&](std::size_t s) { return block_words(session_block[s]); },
                                     cfg.fantree);
      absorb_tree(fo.stats, rr);
      out.read_sessions += sessions.size();
      for (std::size_t s = 0; s < sessions.size(); ++s) {
        const std::size_t lo = lay.block_begin(session_block[s]);
        for (std::size_t i = 0; i < sessions[s].leaves.size(); ++i) {
          const std::size_t pid = sessions[s].leaves[i];
          values[pid] = fo.received[s][i].at(addr_of[pid] - lo);
        }
      }
    }
    if (!pairs.empty()) {
      auto rt = round_trip_all(ctx, pairs, req,
                               [&](std::size_t, const std::vector<Word>& w) { return std::vector<Word>{out.memory.at(w.at(0))}; });
      absorb(rt, rr);
      for (std::size_t i = 0; i < pairs.size(); ++i) values[req_pid[i]] = rt.replies[i].at(0);
    }

    // Steps and writes.
    std::map<std::size_t, std::vector<WriteTriple>> writers;  // block -> remote writes
    std::vector<WriteTriple> landed;                          // writes that reached their owner
    for (std::size_t pid = 0; pid < p; ++pid) {
      const auto w = prog.step(pid, r, std::span<Word>(local.data() + pid * lw, lw), values[pid]);
      if (!w) continue;
      detail::check_address(w->addr, out.memory.size(), pid, r);
      const std::size_t b = lay.block_of(w->addr);
      if (owner(b) == pid) {
        landed.push_back({w->addr, w->value, pid});
        ++out.local_writes;
      } else {
        writers[b].push_back({w->addr, w->value, pid});
        ++out.remote_writes;
      }
    }
    sessions.clear();
    std::vector<std::vector<std::vector<WriteTriple>>> bundles;
    pairs.clear();
    req.clear();
    for (const auto& [b, ws] : writers) {
      const NodeId o = owner(b);
      if (ws.size() > cfg.hot_threshold) {
        FanTreeSession s{o, {}};
        std::vector<std::vector<WriteTriple>> per;
        for (const auto& w : ws) {
          s.leaves.push_back(static_cast<NodeId>(w.pid));
          per.push_back({w});
        }
        sessions.push_back(std::move(s));
        bundles.push_back(std::move(per));
      } else {
        for (const auto& w : ws) {
          pairs.push_back({static_cast<NodeId>(w.pid), o});
          req.push_back({w.addr, w.value, w.pid});
        }
      }
    }
    if (!sessions.empty()) {
      FanInWriteResult fw = fanin_writes(ctx, sessions, bundles, cfg.fantree);
      absorb_tree(fw.stats, rr);
      out.write_sessions += sessions.size();
      for (const auto& ws : fw.at_root) landed.insert(landed.end(), ws.begin(), ws.end());
    }
    if (!pairs.empty()) {
      auto ex = exchange_all(ctx, pairs, req);
      absorb(ex, rr);
      for (const auto& w : ex.delivered) landed.push_back({w.at(0), w.at(1), w.at(2)});
    }
    for (const auto& w : merge_writes(std::move(landed))) out.memory[w.addr] = w.value;

    out.max_round_cost = std::max(out.max_round_cost, rr.rounds_elapsed);
    out.report += rr;
    ++out.pram_rounds;
  }
  const auto [b, e] = prog.output_region();
  out.output.assign(out.memory.begin() + static_cast<std::ptrdiff_t>(b), out.memory.begin() + static_cast<std::ptrdiff_t>(e));
  return out;
}

}  // namespace congestlab
