#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "congestlab/routing/context.hpp"
#include "congestlab/routing/types.hpp"

namespace congestlab {

// One step through a hierarchy level: virtual edge `edge` of level `level`,
// crossed from source to target or, if reversed, from target to source.
struct Hop {
  std::uint32_t edge;
  std::uint8_t level;
  bool reversed;
};

struct VirtualRoute {
  std::vector<Hop> hops;      // relay hops first, then the final-level hops
  std::size_t relay_hops = 0;
  std::size_t final_level = 0;
  bool direct = false;        // final part is a single edge (or empty)
};

struct VirtualRouting {
  std::vector<VirtualRoute> routes;
  std::vector<std::uint32_t> relay_load;  // per virtual node
  std::size_t levels = 0;
};

namespace detail {

// Bidirectional breadth-first search over the undirected view of one level,
// confined to a single component by construction. Scratch is reused across
// calls through generation stamps.
class LevelSearch {
 public:
  explicit LevelSearch(std::size_t n) : mark_s_(n, 0), mark_t_(n, 0), back_s_(n), back_t_(n) {}

  bool find(const Hierarchy& h, std::size_t k, NodeId s, NodeId t, std::vector<Hop>& out) {
    if (++stamp_ == 0) {
      std::fill(mark_s_.begin(), mark_s_.end(), 0);
      std::fill(mark_t_.begin(), mark_t_.end(), 0);
      stamp_ = 1;
    }
    fs_.assign(1, s);
    ft_.assign(1, t);
    mark_s_[s] = stamp_;
    mark_t_[t] = stamp_;
    NodeId meet = kNoNode;
    while (!fs_.empty() && !ft_.empty() && meet == kNoNode) {
      const bool from_s = fs_.size() <= ft_.size();
      meet = expand(h, k, from_s);
    }
    if (meet == kNoNode) return false;
    std::vector<Hop> head;
    for (NodeId x = meet; x != s; x = back_s_[x].prev) head.push_back(back_s_[x].hop);
    out.insert(out.end(), head.rbegin(), head.rend());
    for (NodeId x = meet; x != t; x = back_t_[x].prev) out.push_back(back_t_[x].hop);
    return true;
  }

 private:
  struct Back {
    NodeId prev = kNoNode;
    Hop hop{};
  };

  NodeId expand(const Hierarchy& h, std::size_t k, bool from_s) {
    auto& frontier = from_s ? fs_ : ft_;
    auto& mine = from_s ? mark_s_ : mark_t_;
    auto& other = from_s ? mark_t_ : mark_s_;
    auto& back = from_s ? back_s_ : back_t_;
    next_.clear();
    const auto lvl = static_cast<std::uint8_t>(k);
    auto visit = [&](NodeId x, NodeId y, std::uint32_t e, bool rev) -> bool {
      if (mine[y] == stamp_) return false;
      mine[y] = stamp_;
      // s side stores the hop x -> y; t side stores the hop y -> x.
      back[y] = {x, Hop{e, lvl, from_s ? rev : !rev}};
      next_.push_back(y);
      return other[y] == stamp_;
    };
    for (NodeId x : frontier) {
      auto [b, f] = h.out_edges(k, x);
      for (std::size_t e = b; e < f; ++e)
        if (visit(x, h.target(k, e), static_cast<std::uint32_t>(e), false)) return next_.back();
      auto [ib, iff] = h.in_edges(k, x);
      for (auto it = ib; it != iff; ++it)
        if (visit(x, it->source, it->edge, true)) return next_.back();
    }
    frontier.swap(next_);
    return kNoNode;
  }

  std::uint32_t stamp_ = 0;
  std::vector<std::uint32_t> mark_s_, mark_t_;
  std::vector<Back> back_s_, back_t_;
  std::vector<NodeId> fs_, ft_, next_;
};

}  // namespace detail

// Routes virtual-node pairs through the hierarchy. While s and t sit in the
// same level-(k-1) component but different level-k components, s hands the
// pair to a uniformly random out-neighbor inside t's level-k component. At
// the first level where their shared component is terminal the pair is
// joined by a direct edge when one exists, otherwise by a shortest path
// inside the component.
inline VirtualRouting route_virtual(const RoutingContext& ctx, const std::vector<DemandPair>& pairs,
                                    std::uint64_t seed) {
  const Hierarchy& h = ctx.hierarchy();
  const std::size_t nv = ctx.virtual_count();
  VirtualRouting out;
  out.routes.resize(pairs.size());
  out.relay_load.assign(nv, 0);
  out.levels = h.depth();
  detail::LevelSearch search(nv);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    NodeId cur = pairs[i].s;
    const NodeId t = pairs[i].t;
    if (cur >= nv || t >= nv) throw Error(ErrorKind::InvalidArgument, "virtual node out of range");
    VirtualRoute& r = out.routes[i];
    Rng rng(derive_seed({seed, 0x726f757465ULL, i}));
    std::size_t k = 1;
    for (; k <= h.depth(); ++k) {
      if (h.terminal(k - 1, h.comp(k - 1, t))) break;
      const std::uint32_t want = h.predicted_comp(k, t);
      if (h.predicted_comp(k, cur) == want) continue;
      auto [b, f] = h.out_edges(k - 1, cur);
      std::size_t count = 0;
      for (std::size_t e = b; e < f; ++e) count += h.predicted_comp(k, h.target(k - 1, e)) == want;
      if (count == 0)
        throw Error(ErrorKind::NoNeighborInTargetComponent,
                    "pair " + std::to_string(i) + " at level " + std::to_string(k));
      std::size_t pick = rng.below(count);
      for (std::size_t e = b; e < f; ++e) {
        if (h.predicted_comp(k, h.target(k - 1, e)) != want) continue;
        if (pick-- == 0) {
          r.hops.push_back(Hop{static_cast<std::uint32_t>(e), static_cast<std::uint8_t>(k - 1), false});
          cur = h.target(k - 1, e);
          ++out.relay_load[cur];
          break;
        }
      }
    }
    r.relay_hops = r.hops.size();
    r.final_level = k - 1;
    const std::size_t fl = r.final_level;
    if (cur == t) {
      r.direct = true;
      continue;
    }
    const auto lvl = static_cast<std::uint8_t>(fl);
    auto [b, f] = h.out_edges(fl, cur);
    for (std::size_t e = b; e < f && !r.direct; ++e)
      if (h.target(fl, e) == t) {
        r.hops.push_back(Hop{static_cast<std::uint32_t>(e), lvl, false});
        r.direct = true;
      }
    auto [tb, tf] = h.out_edges(fl, t);
    for (std::size_t e = tb; e < tf && !r.direct; ++e)
      if (h.target(fl, e) == cur) {
        r.hops.push_back(Hop{static_cast<std::uint32_t>(e), lvl, true});
        r.direct = true;
      }
    if (r.direct) continue;
    if (ctx.config().strict_complete)
      throw Error(ErrorKind::ComponentNotComplete,
                  "no edge between virtual nodes " + std::to_string(cur) + " and " + std::to_string(t));
    if (!search.find(h, fl, cur, t, r.hops))
      throw Error(ErrorKind::ComponentNotComplete,
                  "virtual nodes " + std::to_string(cur) + " and " + std::to_string(t) + " are not connected");
  }
  return out;
}

// Base-graph edges of a hop, following the 2-path embeddings down to level
// zero and then the level-zero walks.
inline void expand_hop(const Hierarchy& h, std::size_t level, std::size_t edge, bool reversed,
                       std::vector<EdgeId>& out) {
  if (level == 0) {
    h.level_zero().append_path(edge, reversed, out);
    return;
  }
  const auto& lv = h.level(level);
  const std::size_t a = lv.parent_a[edge], b = lv.parent_b[edge];
  if (!reversed) {
    expand_hop(h, level - 1, a, true, out);
    expand_hop(h, level - 1, b, false, out);
  } else {
    expand_hop(h, level - 1, b, true, out);
    expand_hop(h, level - 1, a, false, out);
  }
}

// Base path of a virtual route from host(s); relay_len receives the number
// of base edges spent on the relay prefix.
inline Path expand_route(const RoutingContext& ctx, NodeId s, const VirtualRoute& r, std::size_t* relay_len = nullptr) {
  Path p{ctx.host(s), {}};
  for (std::size_t i = 0; i < r.hops.size(); ++i) {
    if (i == r.relay_hops && relay_len) *relay_len = p.edges.size();
    expand_hop(ctx.hierarchy(), r.hops[i].level, r.hops[i].edge, r.hops[i].reversed, p.edges);
  }
  if (relay_len && r.relay_hops == r.hops.size()) *relay_len = p.edges.size();
  return p;
}

inline bool resample_worthy(ErrorKind k) {
  return k == ErrorKind::NoNeighborInTargetComponent || k == ErrorKind::ComponentNotComplete ||
         k == ErrorKind::RelayLoadExceeded;
}

inline double relay_load_bound(const RoutingConfig& cfg, std::size_t n) {
  return cfg.load_cap * std::max(1.0, std::log2(static_cast<double>(n)));
}

// Multicommodity routing of real-node pairs. Each real node routes through
// its avatar (v, 1). Failed high-probability events resample the hierarchy
// with fresh seeds, at most max_resamples times.
inline PathSolution route(const RoutingInstance& inst, RoutingContext& ctx) {
  const NetworkGraph& g = ctx.graph();
  const std::size_t n = g.node_count();
  if (inst.width > ctx.config().width_cap)
    throw Error(ErrorKind::WidthExceeded, "width " + std::to_string(inst.width) + " > cap " +
                                              std::to_string(ctx.config().width_cap));
  std::vector<DemandPair> vpairs;
  vpairs.reserve(inst.pairs.size());
  for (const auto& p : inst.pairs) {
    if (p.s >= n || p.t >= n) throw Error(ErrorKind::InvalidArgument, "pair endpoint out of range");
    vpairs.push_back({ctx.avatar(p.s), ctx.avatar(p.t)});
  }
  const double bound = relay_load_bound(ctx.config(), n);
  const std::uint64_t seed = ctx.next_call_seed();
  for (std::size_t attempt = 0;; ++attempt) {
    try {
      VirtualRouting vr = route_virtual(ctx, vpairs, derive_seed({seed, attempt}));
      PathSolution sol;
      sol.levels = vr.levels;
      sol.resamples = attempt;
      sol.relay_load.assign(n, 0);
      for (NodeId x = 0; x < vr.relay_load.size(); ++x) sol.relay_load[ctx.host(x)] += vr.relay_load[x];
      for (auto l : sol.relay_load) sol.max_relay_load = std::max<std::size_t>(sol.max_relay_load, l);
      if (static_cast<double>(sol.max_relay_load) > bound)
        throw Error(ErrorKind::RelayLoadExceeded, "relay load " + std::to_string(sol.max_relay_load));
      sol.paths.reserve(vpairs.size());
      sol.relay_len.reserve(vpairs.size());
      for (std::size_t i = 0; i < vpairs.size(); ++i) {
        std::size_t rl = 0;
        sol.paths.push_back(expand_route(ctx, vpairs[i].s, vr.routes[i], &rl));
        sol.relay_len.push_back(rl);
        sol.dilation_without_relays = std::max(sol.dilation_without_relays, sol.paths.back().length() - rl);
        (vr.routes[i].direct ? sol.final_direct : sol.final_searched) += 1;
      }
      const PathMetrics m = recount(g, sol.paths);
      sol.congestion = m.congestion;
      sol.dilation = m.dilation;
      return sol;
    } catch (const Error& e) {
      if (!resample_worthy(e.kind()) || attempt >= ctx.config().max_resamples) throw;
      ctx.resample();
    }
  }
}

struct GeneralRouting {
  PathSolution solution;
  std::size_t tau = 0;
  std::size_t levels = 0;
  std::size_t level_zero_congestion = 0;
  std::size_t level_zero_dilation = 0;
};

// Arbitrary connected graph: mixing time, level-zero walks of that length,
// hierarchy, route. Metrics scale with the mixing time.
inline GeneralRouting route_general(std::shared_ptr<const NetworkGraph> g, const RoutingInstance& inst,
                                    RoutingConfig cfg = {}, std::uint64_t seed = 0) {
  RoutingContext ctx(std::move(g), cfg, seed);
  GeneralRouting out;
  out.solution = route(inst, ctx);
  out.tau = ctx.tau();
  out.levels = ctx.hierarchy().depth();
  out.level_zero_congestion = ctx.level_zero().congestion();
  out.level_zero_dilation = ctx.level_zero().dilation();
  return out;
}

}  // namespace congestlab
