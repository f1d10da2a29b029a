#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "congestlab/randgraph/generate.hpp"
#include "congestlab/routing/exchange.hpp"

using namespace congestlab;

namespace {

std::shared_ptr<const NetworkGraph> share(NetworkGraph g) { return std::make_shared<const NetworkGraph>(std::move(g)); }

std::shared_ptr<const NetworkGraph> random_graph(std::size_t n, std::uint64_t seed) {
  return share(generate({n, auto_degree(n), seed}));
}

void expect_valid_paths(const NetworkGraph& g, const RoutingInstance& inst, const PathSolution& sol) {
  ASSERT_EQ(sol.paths.size(), inst.pairs.size());
  for (std::size_t i = 0; i < inst.pairs.size(); ++i)
    EXPECT_TRUE(path_connects(g, sol.paths[i], inst.pairs[i].s, inst.pairs[i].t)) << "pair " << i;
  const PathMetrics m = recount(g, sol.paths);
  EXPECT_EQ(m.congestion, sol.congestion);
  EXPECT_EQ(m.dilation, sol.dilation);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(Types, WidthAndInstanceIo) {
  auto inst = RoutingInstance::from_pairs({{0, 1}, {0, 2}, {3, 0}}, 4);
  EXPECT_EQ(inst.width, 2u);
  EXPECT_EQ(RoutingInstance::from_pairs({{0, 1}, {0, 2}, {0, 0}}, 4).width, 3u);
  EXPECT_EQ(RoutingInstance::permutation(50, 3).width, 1u);
  std::stringstream ss;
  write_instance(ss, inst);
  auto back = read_instance(ss, 4);
  EXPECT_EQ(back.pairs, inst.pairs);
  std::stringstream bad("0 9\n");
  EXPECT_EQ(kind_of([&] { read_instance(bad, 4); }), ErrorKind::ParseError);
}

TEST(Types, ReversedPath) {
  auto g = graphs::path(4);
  Path p{0, {0, 1, 2}};
  auto r = reversed(g, p);
  EXPECT_TRUE(path_connects(g, r, 3, 0));
  EXPECT_EQ(reversed(g, r), p);
}

// ---------------------------------------------------------------------------
// Embeddings and composition
// ---------------------------------------------------------------------------

TEST(Compose, IdentityInnerReturnsOuter) {
  auto base = share(generate({20, 3, 1}));
  auto outer = random_walk_embedding(base, 3, 6, 2);
  auto id = identity_embedding(outer.virtual_graph);
  auto out = compose(outer, id);
  EXPECT_EQ(out.paths, outer.paths);
  EXPECT_EQ(out.host, outer.host);
  EXPECT_EQ(out.congestion, outer.congestion);
  EXPECT_EQ(out.dilation, outer.dilation);
}

TEST(Compose, DilationTwoTimesTwo) {
  auto base = share(generate({24, 4, 5}));
  auto outer = random_walk_embedding(base, 2, 4, 6);
  auto inner = random_walk_embedding(outer.virtual_graph, 2, 4, 7);
  ASSERT_LE(outer.dilation, 4u);
  auto out = compose(outer, inner);
  EXPECT_LE(out.dilation, outer.dilation * inner.dilation);
  EXPECT_LE(out.congestion, outer.congestion * inner.congestion);
}

TEST(Compose, MismatchedGraphs) {
  auto a = random_walk_embedding(share(graphs::ring(6)), 1, 2, 0);
  auto b = random_walk_embedding(share(graphs::ring(7)), 1, 2, 0);
  EXPECT_EQ(kind_of([&] { compose(a, b); }), ErrorKind::GraphMismatch);
}

// Three-level compositions on small graphs: the recount never exceeds the
// product bounds, and every composed path joins the hosts of its endpoints.
TEST(Compose, ThreeLevelProductBoundsProperty) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(seed);
    const std::size_t n = 4 + rng.below(29);
    auto base = share(generate({n, 1 + rng.below(4), seed}));
    auto e1 = random_walk_embedding(base, 1 + rng.below(3), rng.below(6), seed + 1);
    auto e2 = random_walk_embedding(e1.virtual_graph, 1 + rng.below(3), rng.below(6), seed + 2);
    auto e3 = random_walk_embedding(e2.virtual_graph, 1 + rng.below(3), rng.below(6), seed + 3);
    auto e12 = compose(e1, e2);
    auto all = compose(e12, e3);
    const PathMetrics m = verify_embedding(all);
    EXPECT_EQ(m.congestion, all.congestion);
    EXPECT_EQ(m.dilation, all.dilation);
    EXPECT_LE(e12.congestion, e1.congestion * e2.congestion);
    EXPECT_LE(e12.dilation, e1.dilation * e2.dilation);
    EXPECT_LE(all.congestion, e1.congestion * e2.congestion * e3.congestion);
    EXPECT_LE(all.dilation, e1.dilation * e2.dilation * e3.dilation);
  }
}

// ---------------------------------------------------------------------------
// Level zero
// ---------------------------------------------------------------------------

// Stays and self-loop moves cross no edge, so a tau-step walk has at most tau
// edges; on K_4 with tau = 2 every path is 0, 1 or 2 edges and a walk that
// moved twice has exactly 2.
TEST(LevelZero, CompleteGraphK4) {
  auto g = share(graphs::complete(4));
  auto l0 = embed_level_zero(g, 4, 2, 9);
  EXPECT_EQ(l0.virtual_count(), 12u);
  EXPECT_EQ(l0.edge_count(), 48u);
  std::size_t two = 0;
  for (std::size_t e = 0; e < l0.edge_count(); ++e) {
    Path p = l0.path(e);
    EXPECT_LE(p.length(), 2u);
    EXPECT_TRUE(path_connects(*g, p, l0.host(l0.source(e)), l0.host(l0.target(e))));
    two += p.length() == 2;
  }
  EXPECT_GT(two, 0u);
  EXPECT_LE(l0.dilation(), 2u);
  auto emb = l0.to_embedding();
  EXPECT_EQ(verify_embedding(emb), (PathMetrics{l0.congestion(), l0.dilation()}));
}

TEST(LevelZero, VirtualNodesAreSlots) {
  auto g = share(generate({30, 4, 2}));
  auto l0 = embed_level_zero(g, 8, 10, 1);
  EXPECT_EQ(l0.virtual_count(), g->volume());
  for (NodeId v = 0; v < g->node_count(); ++v)
    for (std::size_t j = 0; j < g->degree(v); ++j) EXPECT_EQ(l0.host(static_cast<NodeId>(g->slot_offset(v) + j)), v);
}

// 10^5 pooled walks on K_8: the end slot is uniform over the 56 virtual nodes.
TEST(LevelZero, K8EndpointsUniform) {
  auto g = share(graphs::complete(8));
  const std::size_t tau = mixing_time_exact(*g).tau;
  const std::size_t nv = g->volume();
  const std::size_t d0 = (100000 + nv - 1) / nv;
  auto l0 = embed_level_zero(g, d0, tau, 4);
  std::vector<double> count(nv, 0.0);
  for (std::size_t e = 0; e < l0.edge_count(); ++e) count[l0.target(e)] += 1.0;
  const double total = static_cast<double>(l0.edge_count());
  const double p = 1.0 / static_cast<double>(nv);
  const double sigma = std::sqrt(total * p * (1 - p));
  for (std::size_t x = 0; x < nv; ++x) EXPECT_LE(std::abs(count[x] - total * p), 3 * sigma) << "slot " << x;
}

// Congestion recount on G(64, 8 ln 64) with d0 = 32 and tau = tau_mix; the
// fitted constant is reported, and the recount matches the stored value.
TEST(LevelZero, RecountedCongestionOnRandomGraph) {
  auto g = random_graph(64, 3);
  const std::size_t tau = mixing_time_exact(*g).tau;
  auto l0 = embed_level_zero(g, 32, tau, 3);
  auto emb = l0.to_embedding();
  const PathMetrics m = verify_embedding(emb);
  EXPECT_EQ(m.congestion, l0.congestion());
  EXPECT_EQ(m.dilation, l0.dilation());
  EXPECT_LE(l0.dilation(), tau);
  const double kappa = static_cast<double>(m.congestion) /
                       (static_cast<double>(tau * 32) * std::log2(static_cast<double>(l0.virtual_count())));
  RecordProperty("kappa", std::to_string(kappa));
  EXPECT_LT(kappa, 1.0);
}

TEST(LevelZero, ScreenRejectsShortWalks) {
  auto g = share(graphs::ring(64));
  EXPECT_EQ(kind_of([&] { embed_level_zero(g, 16, 2, 0); }), ErrorKind::TauTooSmall);
}

TEST(LevelZero, PathsRegenerateWithoutCache) {
  auto g = random_graph(64, 1);
  LevelZeroConfig a;
  a.d0 = 16;
  a.tau = 12;
  a.seed = 5;
  LevelZeroConfig b = a;
  b.cache_limit = 0;
  LevelZero cached(g, a), fresh(g, b);
  for (std::size_t e = 0; e < cached.edge_count(); e += 7) EXPECT_EQ(cached.path(e), fresh.path(e));
  EXPECT_EQ(cached.congestion(), fresh.congestion());
}

// ---------------------------------------------------------------------------
// Hierarchy
// ---------------------------------------------------------------------------

TEST(Hierarchy, SmallGraphHasNoLevels) {
  auto g = share(graphs::complete(4));
  auto l0 = std::make_shared<const LevelZero>(embed_level_zero(g, 8, 2, 0));
  auto h = build_hierarchy(l0, 4, 16, 0);
  EXPECT_EQ(h.depth(), 0u);
}

// About 4096 virtual nodes, beta = 4, stop size 512: two levels, each
// embedded into its parent with congestion 1 and dilation 2, and component
// sizes near N / beta^k.
TEST(Hierarchy, LevelDisciplineAndComponentSizes) {
  auto g = share(generate({128, 16, 2}));
  const std::size_t tau = mixing_time_exact(*g).tau;
  auto l0 = std::make_shared<const LevelZero>(embed_level_zero(g, 512, tau, 2));
  const std::size_t nv = l0->virtual_count();
  auto h = build_hierarchy(l0, 4, 512, 11);
  ASSERT_EQ(h.depth(), 2u);
  EXPECT_LE(h.depth(), static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(nv) / 512.0))));
  for (std::size_t k = 1; k <= h.depth(); ++k) {
    const auto& lv = h.level(k);
    EXPECT_EQ(lv.degree, 512u >> (2 * k));
    EXPECT_EQ(h.recount_level(k), (PathMetrics{1, 2}));
    EXPECT_LE(lv.congestion, 1u);
    EXPECT_LE(lv.dilation, 2u);
    const double expect = static_cast<double>(nv) / std::pow(4.0, static_cast<double>(k));
    for (auto sz : lv.comp_size) {
      EXPECT_LE(sz, 2 * expect);
      EXPECT_GE(sz, expect / 2);
    }
    // Every edge stays inside one component and its 2-path meets in the parent.
    for (NodeId x = 0; x < nv; ++x) {
      auto [b, f] = h.out_edges(k, x);
      if (b == f) continue;
      EXPECT_EQ(f - b, lv.degree);
      for (std::size_t e = b; e < f; ++e) {
        const NodeId y = h.target(k, e);
        EXPECT_EQ(h.comp(k, x), h.comp(k, y));
        EXPECT_EQ(h.target(k - 1, lv.parent_a[e]), x);
        EXPECT_EQ(h.target(k - 1, lv.parent_b[e]), y);
        EXPECT_EQ(h.source_of(k - 1, lv.parent_a[e]), h.source_of(k - 1, lv.parent_b[e]));
      }
    }
  }
}

TEST(Hierarchy, DegreeUnderflowAfterRetries) {
  auto g = share(generate({64, 6, 1}));
  auto l0 = std::make_shared<const LevelZero>(embed_level_zero(g, 4, 20, 1));
  EXPECT_EQ(kind_of([&] { build_hierarchy(l0, 4, 16, 0); }), ErrorKind::DegreeUnderflow);
}

TEST(Hierarchy, DefaultsAtDeskScale) {
  auto g = random_graph(256, 7);
  RoutingContext ctx(g, {}, 7);
  const auto& h = ctx.hierarchy();
  EXPECT_EQ(h.depth(), 1u);
  EXPECT_EQ(h.recount_level(1), (PathMetrics{1, 2}));
  EXPECT_LE(ctx.tau(), 80u);
}

// ---------------------------------------------------------------------------
// Routing
// ---------------------------------------------------------------------------

class RoutingOnG256 : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    graph_ = random_graph(256, 21);
    ctx_ = new RoutingContext(graph_, {}, 21);
  }
  static void TearDownTestSuite() {
    delete ctx_;
    ctx_ = nullptr;
  }
  static std::shared_ptr<const NetworkGraph> graph_;
  static RoutingContext* ctx_;
};
std::shared_ptr<const NetworkGraph> RoutingOnG256::graph_;
RoutingContext* RoutingOnG256::ctx_ = nullptr;

TEST_F(RoutingOnG256, SameEndpointsGiveEmptyPath) {
  auto inst = RoutingInstance::from_pairs({{17, 17}}, 256);
  auto sol = route(inst, *ctx_);
  ASSERT_EQ(sol.paths.size(), 1u);
  EXPECT_TRUE(sol.paths[0].edges.empty());
  EXPECT_EQ(sol.paths[0].start, 17u);
  EXPECT_EQ(sol.dilation, 0u);
}

// A single pair: the path is valid, and its length is bounded by the
// level-zero dilation times the level-zero walks its hops expand into.
TEST_F(RoutingOnG256, SinglePair) {
  auto inst = RoutingInstance::from_pairs({{3, 200}}, 256);
  auto sol = route(inst, *ctx_);
  expect_valid_paths(*graph_, inst, sol);
  auto vr = route_virtual(*ctx_, {{ctx_->avatar(3), ctx_->avatar(200)}}, 1);
  const auto& r = vr.routes[0];
  std::size_t walks = 0;
  for (const Hop& hop : r.hops) walks += std::size_t{1} << hop.level;
  EXPECT_LE(expand_route(*ctx_, ctx_->avatar(3), r).length(), walks * ctx_->level_zero().dilation());
  EXPECT_LE(sol.dilation, (1 + 2 * 8) * ctx_->level_zero().dilation());
}

TEST_F(RoutingOnG256, PermutationSolvedWithBoundedRelayLoad) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto inst = RoutingInstance::permutation(256, seed);
    auto sol = route(inst, *ctx_);
    expect_valid_paths(*graph_, inst, sol);
    EXPECT_LE(static_cast<double>(sol.max_relay_load), 4.0 * 8.0);
    std::size_t total = 0;
    for (auto l : sol.relay_load) total += l;
    EXPECT_LE(total, 256u * sol.levels);
    for (std::size_t i = 0; i < inst.pairs.size(); ++i) {
      EXPECT_LE(sol.relay_len[i], sol.paths[i].length());
    }
  }
}

TEST_F(RoutingOnG256, StrictCompletenessFailsAtDeskScale) {
  RoutingConfig cfg;
  cfg.strict_complete = true;
  cfg.max_resamples = 1;
  RoutingContext strict(graph_, cfg, 21);
  auto inst = RoutingInstance::permutation(256, 0);
  EXPECT_EQ(kind_of([&] { route(inst, strict); }), ErrorKind::ComponentNotComplete);
}

TEST_F(RoutingOnG256, WidthCap) {
  std::vector<DemandPair> pairs;
  for (NodeId i = 0; i < 40; ++i) pairs.push_back({0, i});
  auto inst = RoutingInstance::from_pairs(pairs, 256);
  EXPECT_EQ(kind_of([&] { route(inst, *ctx_); }), ErrorKind::WidthExceeded);
}

TEST_F(RoutingOnG256, PermutationDelivery) {
  auto inst = RoutingInstance::permutation(256, 9);
  auto sol = route(inst, *ctx_);
  std::vector<std::vector<Word>> payloads;
  for (std::size_t i = 0; i < 256; ++i) payloads.push_back({derive_seed({9, i})});
  DeliveryConfig dc;
  dc.seed = 9;
  dc.record_transcript = true;
  auto dr = deliver(*graph_, sol.paths, payloads, dc);
  EXPECT_EQ(dr.delivered, payloads);
  EXPECT_EQ(dr.report.violations, 0u);
  EXPECT_LE(dr.kappa_measured, 4.0);
  EXPECT_LE(dr.report.rounds_elapsed, dr.round_cap);
  EXPECT_EQ(dr.report.messages_sent, dr.report.messages_delivered);
}

TEST_F(RoutingOnG256, RoundTripBetweenVirtualNodes) {
  std::vector<DemandPair> vp;
  const std::size_t nv = ctx_->virtual_count();
  Rng rng(3);
  for (std::size_t i = 0; i < 64; ++i) vp.push_back({static_cast<NodeId>(rng.below(nv)), static_cast<NodeId>(rng.below(nv))});
  std::vector<std::vector<Word>> req(64);
  for (std::size_t i = 0; i < 64; ++i) req[i] = {i, i * 7};
  auto res = round_trip(*ctx_, vp, req, [](std::size_t, const std::vector<Word>& w) {
    return std::vector<Word>{w[0] + w[1]};
  });
  for (std::size_t i = 0; i < 64; ++i) {
    EXPECT_EQ(res.delivered[i], req[i]);
    ASSERT_EQ(res.replies[i].size(), 1u);
    EXPECT_EQ(res.replies[i][0], i * 8);
  }
  EXPECT_EQ(res.calls, 2u);
}

// ---------------------------------------------------------------------------
// Delivery
// ---------------------------------------------------------------------------

TEST(Deliver, SinglePacketPipeline) {
  auto g = graphs::path(6);
  Path p{0, {0, 1, 2, 3, 4}};
  auto dr = deliver(g, {p}, {{0xabcdef}});
  ASSERT_EQ(dr.delivered[0], (std::vector<Word>{0xabcdef}));
  // one pair: c = 1, so the delay range [0, 1) is {0}
  EXPECT_EQ(dr.arrival_round[0], 5u);
  EXPECT_EQ(dr.report.rounds_elapsed, 5u);
}

TEST(Deliver, TwoPacketsShareEdges) {
  // 0 - 1 - 2 - 3 with 4 hanging off 1; both paths use edges 1 and 2.
  NetworkGraph g(5, {{0, 1}, {1, 2}, {2, 3}, {4, 1}});
  Path a{0, {0, 1, 2}}, b{4, {3, 1, 2}};
  DeliveryConfig dc;
  dc.random_delay = false;
  auto dr = deliver(g, {a, b}, {{1}, {2}}, dc);
  EXPECT_EQ(dr.delivered[0], (std::vector<Word>{1}));
  EXPECT_EQ(dr.delivered[1], (std::vector<Word>{2}));
  const std::size_t last = std::max(dr.arrival_round[0], dr.arrival_round[1]);
  EXPECT_LE(last, 3u + 2u);
  EXPECT_EQ(std::min(dr.arrival_round[0], dr.arrival_round[1]), 3u);
  EXPECT_EQ(last, 4u);
}

TEST(Deliver, BothDirectionsAndMultiWord) {
  auto g = graphs::path(4);
  Path fwd{0, {0, 1, 2}};
  auto back = reversed(g, fwd);
  auto dr = deliver(g, {fwd, back}, {{1, 2, 3}, {4, 5}});
  EXPECT_EQ(dr.delivered[0], (std::vector<Word>{1, 2, 3}));
  EXPECT_EQ(dr.delivered[1], (std::vector<Word>{4, 5}));
  EXPECT_EQ(dr.report.violations, 0u);
}

TEST(Deliver, EmptyPathDeliversInPlace) {
  auto g = graphs::path(2);
  auto dr = deliver(g, {Path{1, {}}}, {{77}});
  EXPECT_EQ(dr.delivered[0], (std::vector<Word>{77}));
}

TEST(Deliver, RoundCapReportsKappa) {
  auto g = graphs::path(3);
  Path p{0, {0, 1}};
  DeliveryConfig dc;
  dc.kappa_sched = 0.1;
  std::vector<Word> many(20, 5);
  EXPECT_EQ(kind_of([&] { deliver(g, {p}, {many}, dc); }), ErrorKind::RoundCapExceeded);
}

// ---------------------------------------------------------------------------
// General graphs
// ---------------------------------------------------------------------------

TEST(RouteGeneral, CompleteGraph) {
  auto g = share(graphs::complete(64));
  auto inst = RoutingInstance::permutation(64, 1);
  auto res = route_general(g, inst, {}, 1);
  expect_valid_paths(*g, inst, res.solution);
  EXPECT_LE(res.tau, 20u);
  RecordProperty("congestion", std::to_string(res.solution.congestion));
  RecordProperty("dilation", std::to_string(res.solution.dilation));
}

// The bridge carries every crossing pair; the mixing time is in the
// thousands, so the default cap is raised.
TEST(RouteGeneral, DumbbellHonestCongestion) {
  auto g = share(graphs::dumbbell(32));
  auto inst = RoutingInstance::permutation(64, 2);
  RoutingConfig cfg;
  cfg.mixing_cap = 100000;
  auto res = route_general(g, inst, cfg, 2);
  expect_valid_paths(*g, inst, res.solution);
  EXPECT_GT(res.tau, 1000u);
  const EdgeId bridge = static_cast<EdgeId>(g->edge_count() - 1);
  std::size_t crossing = 0, on_bridge = 0;
  for (std::size_t i = 0; i < inst.pairs.size(); ++i) {
    crossing += (inst.pairs[i].s < 32) != (inst.pairs[i].t < 32);
    for (EdgeId e : res.solution.paths[i].edges) on_bridge += e == bridge;
  }
  EXPECT_GE(on_bridge, crossing);
  EXPECT_GE(res.solution.congestion, crossing);
  RecordProperty("tau", std::to_string(res.tau));
  RecordProperty("bridge_load", std::to_string(on_bridge));
}

TEST(RouteGeneral, RingExceedsMixingBudget) {
  auto g = share(graphs::ring(64));
  auto inst = RoutingInstance::permutation(64, 3);
  EXPECT_EQ(kind_of([&] { route_general(g, inst, {}, 3); }), ErrorKind::BudgetExceeded);
}

TEST(RouteGeneral, Disconnected) {
  auto g = share(NetworkGraph(4, {{0, 1}, {2, 3}}));
  auto inst = RoutingInstance::from_pairs({{0, 3}}, 4);
  EXPECT_EQ(kind_of([&] { route_general(g, inst, {}, 0); }), ErrorKind::NotConnected);
}
