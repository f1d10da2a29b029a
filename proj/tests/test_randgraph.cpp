#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "congestlab/randgraph/generate.hpp"
#include "congestlab/randgraph/mixing.hpp"

using namespace congestlab;

TEST(Generate, SingleNodeHasOnlyLoops) {
  auto g = generate({1, 3, 5});
  EXPECT_EQ(g.edge_count(), 3u);
  for (const Edge& e : g.edges()) EXPECT_EQ(e, (Edge{0, 0}));
  EXPECT_EQ(g.degree(0), 3u);
}

TEST(Generate, EdgeCountAndPickerOrientation) {
  auto g = generate({100, 7, 1});
  EXPECT_EQ(g.edge_count(), 700u);
  for (EdgeId e = 0; e < g.edge_count(); ++e) EXPECT_EQ(g.edge(e).u, e / 7);
  for (NodeId v = 0; v < 100; ++v) EXPECT_EQ(g.outgoing(v).size(), 7u);
}

TEST(Generate, Deterministic) {
  EXPECT_EQ(generate({300, 9, 42}), generate({300, 9, 42}));
  EXPECT_FALSE(generate({300, 9, 42}) == generate({300, 9, 43}));
}

TEST(Generate, RejectsZero) {
  EXPECT_THROW(generate({0, 3, 0}), Error);
  EXPECT_THROW(generate({5, 0, 0}), Error);
}

TEST(Generate, AutoDegree) {
  EXPECT_EQ(auto_degree(256), 45u);   // ceil(8 * 5.545)
  EXPECT_EQ(auto_degree(1024), 56u);  // ceil(8 * 6.931)
}

// Degree of each node is d (own picks) plus Binomial(nd, 1/n) incoming.
TEST(Generate, DegreeConcentration) {
  const std::size_t n = 1024, d = auto_degree(n);
  auto g = generate({n, d, 3});
  double sum = 0;
  std::size_t lo = SIZE_MAX, hi = 0;
  for (NodeId v = 0; v < n; ++v) {
    sum += static_cast<double>(g.degree(v));
    lo = std::min(lo, g.degree(v));
    hi = std::max(hi, g.degree(v));
  }
  EXPECT_NEAR(sum / n, 2.0 * d, 0.5);
  EXPECT_GE(lo, d + d / 4);
  EXPECT_LE(hi, 3 * d);
  EXPECT_TRUE(g.connected());
}

TEST(Mixing, TransitionRowsAndStationary) {
  auto g = generate({60, 4, 8});
  auto p = LazyTransition::build(g);
  for (NodeId u = 0; u < 60; ++u) {
    double s = 0;
    for (std::size_t k = p.offsets[u]; k < p.offsets[u + 1]; ++k) s += p.probs[k];
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  // pi P = pi
  std::vector<double> out(60, 0.0);
  for (NodeId u = 0; u < 60; ++u)
    for (std::size_t k = p.offsets[u]; k < p.offsets[u + 1]; ++k) out[p.cols[k]] += p.stationary[u] * p.probs[k];
  for (NodeId v = 0; v < 60; ++v) EXPECT_NEAR(out[v], p.stationary[v], 1e-12);
  EXPECT_NEAR(std::accumulate(p.stationary.begin(), p.stationary.end(), 0.0), 1.0, 1e-12);
}

TEST(Mixing, SingleNodeWithLoopsIsZero) {
  auto g = generate({1, 4, 0});
  EXPECT_EQ(mixing_time_exact(g).tau, 0u);
}

// Lazy walk on one edge: P = [[1/2,1/2],[1/2,1/2]] is stationary after one step.
TEST(Mixing, TwoNodeOracle) {
  auto g = graphs::path(2);
  auto est = mixing_time_exact(g);
  EXPECT_EQ(est.tau, 1u);
  EXPECT_DOUBLE_EQ(est.max_deviation, 0.0);
}

// Lazy walk on K_3: the non-stationary eigenvalue is 1/2 - 1/4 = 1/4, so the
// deviation from start u at u is (2/3) * 4^{-t} / (1/3) = 2 * 4^{-t}; it
// must reach 1/3, giving t = 2 (2/16 = 0.125 <= 1/3, 2/4 > 1/3).
TEST(Mixing, TriangleOracle) {
  auto g = graphs::complete(3);
  auto est = mixing_time_exact(g);
  EXPECT_EQ(est.tau, 2u);
  EXPECT_NEAR(est.max_deviation, 2.0 / 16.0, 1e-12);
}

TEST(Mixing, Disconnected) {
  NetworkGraph g(4, {{0, 1}, {2, 3}});
  try {
    mixing_time_exact(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotConnected);
  }
}

TEST(Mixing, RingExceedsSmallCap) {
  auto g = graphs::ring(64);
  MixingOptions opt;
  opt.cap = 50;
  try {
    mixing_time_exact(g, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BudgetExceeded);
  }
}

TEST(Mixing, RandomGraphWithinLogBound) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto g = generate({256, auto_degree(256), seed});
    auto est = mixing_time_exact(g);
    EXPECT_LE(est.tau, 10u * 8u);
    EXPECT_GE(est.tau, 1u);
    EXPECT_TRUE(est.monotone_at_next);
  }
}

// Sampling noise dwarfs the pi/n tolerance, so the estimate can only err low.
TEST(Mixing, SampledNeverOvershootsExact) {
  auto g = generate({128, auto_degree(128), 4});
  auto ex = mixing_time_exact(g);
  MixingOptions opt;
  opt.seed = 1;
  auto sa = mixing_time_sampled(g, opt);
  EXPECT_EQ(sa.method, MixingMethod::Sampled);
  EXPECT_FALSE(sa.caveat.empty());
  EXPECT_LE(sa.tau, ex.tau + 1);
  EXPECT_GE(sa.tau, 2u);
}

// Empirical one-step distribution of the lazy walk matches P.
TEST(Mixing, LazyStepMatchesTransition) {
  auto g = NetworkGraph(3, {{0, 1}, {0, 2}, {0, 0}, {1, 2}});
  auto p = LazyTransition::build(g);
  Rng rng(17);
  std::vector<std::size_t> c(3, 0);
  const std::size_t trials = 200000;
  for (std::size_t i = 0; i < trials; ++i) ++c[lazy_step(g, 0, rng)];
  for (std::size_t k = p.offsets[0]; k < p.offsets[1]; ++k)
    EXPECT_NEAR(static_cast<double>(c[p.cols[k]]) / trials, p.probs[k], 0.01);
  // slots(0) = {0,1,2}: stay 1/2 + loop 1/6 = 2/3, each neighbor 1/6
  EXPECT_NEAR(static_cast<double>(c[0]) / trials, 2.0 / 3.0, 0.01);
}
