#pragma once

#include <functional>
#include <unordered_map>

#include "congestlab/routing/deliver.hpp"
#include "congestlab/routing/route.hpp"

namespace congestlab {

// Routing among virtual nodes, as used when the level-zero graph itself is
// the network (processor-to-processor traffic).
struct VirtualPaths {
  std::vector<Path> paths;  // base-graph paths from host(s) to host(t)
  std::size_t width = 0;
  std::size_t max_relay_load = 0;  // per virtual node
  std::size_t resamples = 0;
};

inline VirtualPaths route_virtual_paths(RoutingContext& ctx, const std::vector<DemandPair>& vpairs) {
  const std::size_t nv = ctx.virtual_count();
  VirtualPaths out;
  out.width = instance_width(vpairs, nv);
  if (out.width > ctx.config().width_cap)
    throw Error(ErrorKind::WidthExceeded, "width " + std::to_string(out.width) + " > cap " +
                                              std::to_string(ctx.config().width_cap));
  const double bound = relay_load_bound(ctx.config(), nv);
  const std::uint64_t seed = ctx.next_call_seed();
  for (std::size_t attempt = 0;; ++attempt) {
    try {
      VirtualRouting vr = route_virtual(ctx, vpairs, derive_seed({seed, attempt}));
      out.max_relay_load = 0;
      for (auto l : vr.relay_load) out.max_relay_load = std::max<std::size_t>(out.max_relay_load, l);
      if (static_cast<double>(out.max_relay_load) > bound)
        throw Error(ErrorKind::RelayLoadExceeded, "relay load " + std::to_string(out.max_relay_load));
      out.paths.clear();
      out.paths.reserve(vpairs.size());
      for (std::size_t i = 0; i < vpairs.size(); ++i) out.paths.push_back(expand_route(ctx, vpairs[i].s, vr.routes[i]));
      out.resamples = attempt;
      return out;
    } catch (const Error& e) {
      if (!resample_worthy(e.kind()) || attempt >= ctx.config().max_resamples) throw;
      ctx.resample();
    }
  }
}

struct ExchangeResult {
  std::vector<std::vector<Word>> delivered;
  std::vector<std::vector<Word>> replies;  // round trips only
  RoundReport report;
  std::size_t calls = 0;  // routing calls made
  std::size_t width = 0;
  std::size_t max_relay_load = 0;
  std::size_t congestion = 0;
  std::size_t dilation = 0;
  double kappa = 0.0;
};

// One routing call: route the pairs, then deliver each pair's words.
inline ExchangeResult exchange(RoutingContext& ctx, const std::vector<DemandPair>& vpairs,
                               const std::vector<std::vector<Word>>& payloads) {
  ExchangeResult out;
  if (vpairs.empty()) return out;
  VirtualPaths vp = route_virtual_paths(ctx, vpairs);
  DeliveryConfig dc;
  dc.seed = ctx.next_call_seed();
  DeliveryResult dr = deliver(ctx.graph(), vp.paths, payloads, dc);
  out.delivered = std::move(dr.delivered);
  out.report = dr.report;
  out.calls = 1;
  out.width = vp.width;
  out.max_relay_load = vp.max_relay_load;
  out.congestion = dr.congestion;
  out.dilation = dr.dilation;
  out.kappa = dr.kappa_measured;
  return out;
}

// Request/reply: requests travel s -> t, then respond(i, request words) is
// evaluated at t and the reply travels back along the reversed path.
inline ExchangeResult round_trip(RoutingContext& ctx, const std::vector<DemandPair>& vpairs,
                                 const std::vector<std::vector<Word>>& requests,
                                 const std::function<std::vector<Word>(std::size_t, const std::vector<Word>&)>& respond) {
  ExchangeResult out;
  if (vpairs.empty()) return out;
  VirtualPaths vp = route_virtual_paths(ctx, vpairs);
  DeliveryConfig dc;
  dc.seed = ctx.next_call_seed();
  DeliveryResult there = deliver(ctx.graph(), vp.paths, requests, dc);
  std::vector<std::vector<Word>> answers(vpairs.size());
  std::vector<Path> back;
  back.reserve(vp.paths.size());
  for (std::size_t i = 0; i < vpairs.size(); ++i) {
    answers[i] = respond(i, there.delivered[i]);
    back.push_back(reversed(ctx.graph(), vp.paths[i]));
  }
  dc.seed = ctx.next_call_seed();
  DeliveryResult back_res = deliver(ctx.graph(), back, answers, dc);
  out.delivered = std::move(there.delivered);
  out.replies = std::move(back_res.delivered);
  out.report = there.report;
  out.report += back_res.report;
  out.calls = 2;
  out.width = vp.width;
  out.max_relay_load = vp.max_relay_load;
  out.congestion = std::max(there.congestion, back_res.congestion);
  out.dilation = std::max(there.dilation, back_res.dilation);
  out.kappa = std::max(there.kappa_measured, back_res.kappa_measured);
  return out;
}

// Greedy split of pairs into batches whose width stays within cap.
inline std::vector<std::vector<std::size_t>> width_batches(const std::vector<DemandPair>& pairs, std::size_t cap) {
  struct Batch {
    std::unordered_map<NodeId, std::size_t> s, t;
    std::vector<std::size_t> members;
  };
  std::vector<Batch> batches;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::size_t b = 0;
    for (; b < batches.size(); ++b) {
      auto is = batches[b].s.find(pairs[i].s);
      auto it = batches[b].t.find(pairs[i].t);
      if ((is == batches[b].s.end() || is->second < cap) && (it == batches[b].t.end() || it->second < cap)) break;
    }
    if (b == batches.size()) batches.emplace_back();
    ++batches[b].s[pairs[i].s];
    ++batches[b].t[pairs[i].t];
    batches[b].members.push_back(i);
  }
  std::vector<std::vector<std::size_t>> out;
  out.reserve(batches.size());
  for (auto& b : batches) out.push_back(std::move(b.members));
  return out;
}

namespace detail {

inline void absorb(ExchangeResult& into, ExchangeResult&& part, const std::vector<std::size_t>& members) {
  for (std::size_t k = 0; k < members.size(); ++k) {
    into.delivered[members[k]] = std::move(part.delivered[k]);
    if (!part.replies.empty()) into.replies[members[k]] = std::move(part.replies[k]);
  }
  into.report += part.report;
  into.calls += part.calls;
  into.width = std::max(into.width, part.width);
  into.max_relay_load = std::max(into.max_relay_load, part.max_relay_load);
  into.congestion = std::max(into.congestion, part.congestion);
  into.dilation = std::max(into.dilation, part.dilation);
  into.kappa = std::max(into.kappa, part.kappa);
}

template <typename Call>
ExchangeResult batched(RoutingContext& ctx, const std::vector<DemandPair>& vpairs, bool replies, Call&& call) {
  ExchangeResult out;
  out.delivered.resize(vpairs.size());
  if (replies) out.replies.resize(vpairs.size());
  for (const auto& members : width_batches(vpairs, ctx.config().width_cap)) {
    std::vector<DemandPair> sub;
    sub.reserve(members.size());
    for (auto i : members) sub.push_back(vpairs[i]);
    absorb(out, call(sub, members), members);
  }
  return out;
}

}  // namespace detail

// exchange / round_trip over any number of pairs: pairs are split into
// routing calls of width at most width_cap.
inline ExchangeResult exchange_all(RoutingContext& ctx, const std::vector<DemandPair>& vpairs,
                                   const std::vector<std::vector<Word>>& payloads) {
  return detail::batched(ctx, vpairs, false, [&](const std::vector<DemandPair>& sub, const std::vector<std::size_t>& members) {
    std::vector<std::vector<Word>> pl;
    pl.reserve(members.size());
    for (auto i : members) pl.push_back(payloads[i]);
    return exchange(ctx, sub, pl);
  });
}

inline ExchangeResult round_trip_all(RoutingContext& ctx, const std::vector<DemandPair>& vpairs,
                                     const std::vector<std::vector<Word>>& requests,
                                     const std::function<std::vector<Word>(std::size_t, const std::vector<Word>&)>& respond) {
  return detail::batched(ctx, vpairs, true, [&](const std::vector<DemandPair>& sub, const std::vector<std::size_t>& members) {
    std::vector<std::vector<Word>> rq;
    rq.reserve(members.size());
    for (auto i : members) rq.push_back(requests[i]);
    return round_trip(ctx, sub, rq, [&](std::size_t k, const std::vector<Word>& w) { return respond(members[k], w); });
  });
}

}  // namespace congestlab
