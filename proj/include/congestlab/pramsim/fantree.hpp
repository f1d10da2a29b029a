#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "congestlab/hashing.hpp"
#include "congestlab/routing/exchange.hpp"

namespace congestlab {

// One block owner (root) and the virtual nodes that want it (leaves). The
// root does not know the leaves.
struct FanTreeSession {
  NodeId root = 0;
  std::vector<NodeId> leaves;
};

struct FanTreeConfig {
  double kappa_tree = 4.0;  // load bound kappa_tree * log2^2 n
  std::size_t max_retries = 5;
  PartitionHashKind hash = PartitionHashKind::Prf;
};

struct FanTreeStats {
  std::size_t iterations = 0;
  std::size_t routing_calls = 0;
  std::size_t root_contacts = 0;
  std::size_t max_load = 0;  // leaves served by one node in one iteration, over all sessions
  double load_bound = 0.0;
  double kappa_measured = 0.0;  // max_load / log2^2 n
  std::size_t resamples = 0;
  RoundReport report;
};

struct WriteTriple {
  std::uint64_t addr;
  Word value;
  std::uint64_t pid;
  friend bool operator==(const WriteTriple&, const WriteTriple&) = default;
};

// Keeps, per address, the write of the lowest processor id; sorted by address.
inline std::vector<WriteTriple> merge_writes(std::vector<WriteTriple> ws) {
  std::sort(ws.begin(), ws.end(), [](const WriteTriple& a, const WriteTriple& b) {
    return a.addr != b.addr ? a.addr < b.addr : a.pid < b.pid;
  });
  ws.erase(std::unique(ws.begin(), ws.end(), [](const WriteTriple& a, const WriteTriple& b) { return a.addr == b.addr; }),
           ws.end());
  return ws;
}

// Iteration count ceil(log2(N/2)) and the connection range of iteration t:
// ceil(N / 2^(t+1)), halving from N/2, with the last iteration forced to 1 so
// that a single leader remains.
inline std::size_t fantree_iterations(std::size_t nv) {
  return std::max<std::size_t>(1, ceil_log2(ceil_div(nv, 2)));
}
inline std::size_t fantree_range(std::size_t nv, std::size_t t, std::size_t iterations) {
  if (t + 1 >= iterations) return 1;
  const std::size_t shift = std::min<std::size_t>(t + 1, 63);
  return std::max<std::size_t>(1, ceil_div(nv, std::size_t{1} << shift));
}

namespace detail {

using Bundle = std::vector<Word>;
using MergeFn = std::function<Bundle(const std::vector<const Bundle*>&)>;

struct FanInTree {
  NodeId leader = kNoNode;
  Bundle bundle;
  // per iteration: leader -> the other members of its group
  std::vector<std::vector<std::pair<NodeId, std::vector<NodeId>>>> groups;
};

struct FanInOutcome {
  std::vector<FanInTree> trees;  // per session
  FanTreeStats stats;
};

inline FanInOutcome fan_in_once(RoutingContext& ctx, const std::vector<FanTreeSession>& sessions,
                                const std::vector<std::vector<Bundle>>& bundles, const MergeFn& merge,
                                const FanTreeConfig& cfg, std::uint64_t seed) {
  const std::size_t nv = ctx.virtual_count();
  const std::size_t n = ctx.graph().node_count();
  const double lg = std::max(1.0, std::log2(static_cast<double>(n)));
  FanInOutcome out;
  out.stats.iterations = fantree_iterations(nv);
  out.stats.load_bound = cfg.kappa_tree * lg * lg;
  out.trees.resize(sessions.size());

  // active[s] = (node, bundle) of the current leaders of session s
  std::vector<std::vector<std::pair<NodeId, Bundle>>> active(sessions.size());
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    for (std::size_t i = 0; i < sessions[s].leaves.size(); ++i)
      active[s].push_back({sessions[s].leaves[i], bundles.empty() ? Bundle{} : bundles[s][i]});
    out.trees[s].groups.resize(out.stats.iterations);
  }

  for (std::size_t t = 0; t < out.stats.iterations; ++t) {
    const std::size_t range = fantree_range(nv, t, out.stats.iterations);
    const SeededHash conn(derive_seed({seed, 0x636f6e6eULL, t}), cfg.hash);

    // Leaves route (id, session, bundle) to their connection point.
    std::vector<DemandPair> pairs;
    std::vector<std::vector<Word>> payloads;
    for (std::size_t s = 0; s < sessions.size(); ++s)
      for (const auto& [x, b] : active[s]) {
        Rng rng(derive_seed({seed, 0x6c656166ULL, t, s, x}));
        const std::uint64_t k = rng.below(range);
        const auto c = static_cast<NodeId>(conn.bucket((Word{sessions[s].root} << 32) ^ k, nv));
        pairs.push_back({x, c});
        std::vector<Word> w{x, s};
        w.insert(w.end(), b.begin(), b.end());
        payloads.push_back(std::move(w));
      }
    if (pairs.empty()) break;
    auto up = exchange_all(ctx, pairs, payloads);
    out.stats.routing_calls += up.calls;
    out.stats.report += up.report;

    // Connection points group arrivals by session and elect a leader.
    std::map<std::pair<NodeId, std::size_t>, std::vector<std::size_t>> groups;  // (c, session) -> arrivals
    std::vector<std::size_t> load(nv, 0);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& w = up.delivered[i];
      groups[{pairs[i].t, static_cast<std::size_t>(w.at(1))}].push_back(i);
      out.stats.max_load = std::max(out.stats.max_load, ++load[pairs[i].t]);
    }
    if (static_cast<double>(out.stats.max_load) > out.stats.load_bound)
      throw Error(ErrorKind::RelayOverload, "connection point serves " + std::to_string(out.stats.max_load) +
                                                " leaves > " + std::to_string(out.stats.load_bound));

    std::vector<DemandPair> down;
    std::vector<std::vector<Word>> lists;
    std::vector<std::size_t> down_session;
    for (const auto& [key, members] : groups) {
      const auto [c, s] = key;
      Rng rng(derive_seed({seed, 0x656c6563ULL, t, c, s}));
      const std::size_t li = members[rng.below(members.size())];
      const auto leader = static_cast<NodeId>(up.delivered[li].at(0));
      std::vector<Bundle> got;
      got.reserve(members.size());
      for (auto i : members) got.emplace_back(up.delivered[i].begin() + 2, up.delivered[i].end());
      std::vector<const Bundle*> ptrs;
      for (const auto& b : got) ptrs.push_back(&b);
      const Bundle merged = merge(ptrs);
      std::vector<Word> msg{members.size()};
      for (auto i : members) msg.push_back(up.delivered[i].at(0));
      msg.insert(msg.end(), merged.begin(), merged.end());
      down.push_back({c, leader});
      lists.push_back(std::move(msg));
      down_session.push_back(s);
    }
    auto dn = exchange_all(ctx, down, lists);
    out.stats.routing_calls += dn.calls;
    out.stats.report += dn.report;

    for (auto& a : active) a.clear();
    for (std::size_t g = 0; g < down.size(); ++g) {
      const auto& w = dn.delivered[g];
      const std::size_t cnt = w.at(0);
      const NodeId leader = down[g].t;
      std::vector<NodeId> others;
      for (std::size_t k = 0; k < cnt; ++k)
        if (static_cast<NodeId>(w.at(1 + k)) != leader) others.push_back(static_cast<NodeId>(w[1 + k]));
      const std::size_t s = down_session[g];
      out.trees[s].groups[t].push_back({leader, std::move(others)});
      active[s].push_back({leader, Bundle(w.begin() + 1 + static_cast<std::ptrdiff_t>(cnt), w.end())});
    }
  }
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    if (sessions[s].leaves.empty()) continue;
    if (active[s].size() != 1)
      throw Error(ErrorKind::InvalidArgument, "fan-in ended with " + std::to_string(active[s].size()) + " leaders");
    out.trees[s].leader = active[s][0].first;
    out.trees[s].bundle = std::move(active[s][0].second);
  }
  const double lg2 = lg * lg;
  out.stats.kappa_measured = static_cast<double>(out.stats.max_load) / lg2;
  return out;
}

inline void check_sessions(const std::vector<FanTreeSession>& sessions, std::size_t nv) {
  std::vector<char> root(nv, 0), leaf(nv, 0);
  for (const auto& s : sessions) {
    if (s.root >= nv || root[s.root]++) throw Error(ErrorKind::InvalidArgument, "a node is root of two sessions");
    for (NodeId x : s.leaves)
      if (x >= nv || leaf[x]++) throw Error(ErrorKind::InvalidArgument, "a node is leaf of two sessions");
  }
}

inline FanInOutcome fan_in(RoutingContext& ctx, const std::vector<FanTreeSession>& sessions,
                           const std::vector<std::vector<Bundle>>& bundles, const MergeFn& merge,
                           const FanTreeConfig& cfg) {
  check_sessions(sessions, ctx.virtual_count());
  const std::uint64_t base = ctx.next_call_seed();
  FanTreeStats spent;
  for (std::size_t attempt = 0;; ++attempt) {
    try {
      FanInOutcome o = fan_in_once(ctx, sessions, bundles, merge, cfg, derive_seed({base, attempt}));
      o.stats.resamples = attempt;
      o.stats.routing_calls += spent.routing_calls;
      o.stats.report += spent.report;
      return o;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::RelayOverload || attempt >= cfg.max_retries) throw;
    }
  }
}

}  // namespace detail

struct FanOutResult {
  std::vector<std::vector<std::vector<Word>>> received;  // [session][leaf] block words
  FanTreeStats stats;
};

// Fan-in/fan-out: leaves converge through hashed connection points
// to one leader per session, the leader fetches the block from the root once,
// and the block flows back down the election tree in reverse iteration order.
inline FanOutResult fanin_fanout(RoutingContext& ctx, const std::vector<FanTreeSession>& sessions,
                                 const std::function<std::vector<Word>(std::size_t session)>& block,
                                 const FanTreeConfig& cfg = {}) {
  auto none = [](const std::vector<const detail::Bundle*>&) { return detail::Bundle{}; };
  detail::FanInOutcome fi = detail::fan_in(ctx, sessions, {}, none, cfg);
  FanOutResult out;
  out.stats = fi.stats;
  out.received.resize(sessions.size());

  // holder -> block, per session
  std::vector<std::unordered_map<NodeId, std::vector<Word>>> hold(sessions.size());
  std::vector<DemandPair> pairs;
  std::vector<std::vector<Word>> req;
  std::vector<std::size_t> who;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    if (sessions[s].leaves.empty()) continue;
    ++out.stats.root_contacts;
    const NodeId leader = fi.trees[s].leader;
    if (leader == sessions[s].root) {
      hold[s][leader] = block(s);
      continue;
    }
    pairs.push_back({leader, sessions[s].root});
    req.push_back({s});
    who.push_back(s);
  }
  if (!pairs.empty()) {
    auto rt = round_trip_all(ctx, pairs, req, [&](std::size_t, const std::vector<Word>& w) { return block(w.at(0)); });
    out.stats.routing_calls += rt.calls;
    out.stats.report += rt.report;
    for (std::size_t i = 0; i < pairs.size(); ++i) hold[who[i]][pairs[i].s] = std::move(rt.replies[i]);
  }

  for (std::size_t t = out.stats.iterations; t-- > 0;) {
    pairs.clear();
    req.clear();
    who.clear();
    for (std::size_t s = 0; s < sessions.size(); ++s) {
      if (sessions[s].leaves.empty()) continue;
      for (const auto& [leader, others] : fi.trees[s].groups[t]) {
        const auto& words = hold[s].at(leader);
        for (NodeId y : others) {
          pairs.push_back({leader, y});
          req.push_back(words);
          who.push_back(s);
        }
      }
    }
    if (pairs.empty()) continue;
    auto ex = exchange_all(ctx, pairs, req);
    out.stats.routing_calls += ex.calls;
    out.stats.report += ex.report;
    for (std::size_t i = 0; i < pairs.size(); ++i) hold[who[i]][pairs[i].t] = std::move(ex.delivered[i]);
  }

  for (std::size_t s = 0; s < sessions.size(); ++s)
    for (NodeId x : sessions[s].leaves) {
      auto it = hold[s].find(x);
      out.received[s].push_back(it == hold[s].end() ? std::vector<Word>{} : it->second);
    }
  return out;
}

struct FanInWriteResult {
  std::vector<std::vector<WriteTriple>> at_root;  // per session, merged writes
  FanTreeStats stats;
};

// Write fan-in: the same convergence, carrying write triples that are merged
// at every leader (lowest pid per address); the final leader hands the merged
// set to the root.
inline FanInWriteResult fanin_writes(RoutingContext& ctx, const std::vector<FanTreeSession>& sessions,
                                     const std::vector<std::vector<std::vector<WriteTriple>>>& writes,
                                     const FanTreeConfig& cfg = {}) {
  auto pack = [](const std::vector<WriteTriple>& ws) {
    detail::Bundle b;
    for (const auto& w : ws) b.insert(b.end(), {w.addr, w.value, w.pid});
    return b;
  };
  auto unpack = [](const detail::Bundle& b) {
    std::vector<WriteTriple> ws;
    for (std::size_t i = 0; i + 2 < b.size(); i += 3) ws.push_back({b[i], b[i + 1], b[i + 2]});
    return ws;
  };
  std::vector<std::vector<detail::Bundle>> bundles(sessions.size());
  for (std::size_t s = 0; s < sessions.size(); ++s)
    for (std::size_t i = 0; i < sessions[s].leaves.size(); ++i) bundles[s].push_back(pack(writes[s][i]));
  auto merge = [&](const std::vector<const detail::Bundle*>& parts) {
    std::vector<WriteTriple> all;
    for (const auto* p : parts) {
      auto ws = unpack(*p);
      all.insert(all.end(), ws.begin(), ws.end());
    }
    return pack(merge_writes(std::move(all)));
  };
  detail::FanInOutcome fi = detail::fan_in(ctx, sessions, bundles, merge, cfg);
  FanInWriteResult out;
  out.stats = fi.stats;
  out.at_root.resize(sessions.size());
  std::vector<DemandPair> pairs;
  std::vector<std::vector<Word>> pl;
  std::vector<std::size_t> who;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    if (sessions[s].leaves.empty()) continue;
    ++out.stats.root_contacts;
    if (fi.trees[s].leader == sessions[s].root) {
      out.at_root[s] = unpack(fi.trees[s].bundle);
      continue;
    }
    pairs.push_back({fi.trees[s].leader, sessions[s].root});
    pl.push_back(fi.trees[s].bundle);
    who.push_back(s);
  }
  if (!pairs.empty()) {
    auto ex = exchange_all(ctx, pairs, pl);
    out.stats.routing_calls += ex.calls;
    out.stats.report += ex.report;
    for (std::size_t i = 0; i < pairs.size(); ++i) out.at_root[who[i]] = unpack(ex.delivered[i]);
  }
  return out;
}

}  // namespace congestlab
