#pragma once

#include <algorithm>
#include <memory>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "congestlab/routing/embedding.hpp"

namespace congestlab {

struct LevelZeroConfig {
  std::size_t d0 = 0;
  std::size_t tau = 0;
  std::uint64_t seed = 0;
  bool screen = true;  // chi-square check of walk endpoints
  double screen_alpha = 1e-3;
  std::size_t screen_starts = 4;
  // Walks are kept explicitly when the total number of walk steps fits.
  std::size_t cache_limit = std::size_t{1} << 25;
};

// Virtual random graph G(N, d0) on the N = volume(G) edge slots of G. Virtual
// node x is slot x, hosted by the real node owning it; (v, j) has rank
// slot_offset(v) + j. Virtual edge e = x * d0 + i is x's i-th outgoing pick,
// embedded along a lazy walk of tau steps from host(x). Lazy stays and
// self-loop moves cross no edge, so a path has at most tau edges.
//
// Walks are reproducible from (seed, e), so paths can be regenerated on demand
// instead of stored.
class LevelZero {
 public:
  LevelZero() = default;

  LevelZero(std::shared_ptr<const NetworkGraph> g, const LevelZeroConfig& cfg) : g_(std::move(g)), cfg_(cfg) {
    if (cfg_.d0 == 0) throw Error(ErrorKind::InvalidArgument, "d0 must be >= 1");
    const NetworkGraph& g0 = *g_;
    if (g0.volume() == 0) throw Error(ErrorKind::NotConnected, "graph has no edges");
    n_virtual_ = g0.volume();
    host_.resize(n_virtual_);
    for (NodeId v = 0; v < g0.node_count(); ++v)
      for (std::size_t j = 0; j < g0.degree(v); ++j) host_[g0.slot_offset(v) + j] = v;

    const std::size_t edges = n_virtual_ * cfg_.d0;
    target_.resize(edges);
    const bool cache = edges * std::max<std::size_t>(cfg_.tau, 1) / 2 <= cfg_.cache_limit;
    if (cache) walk_off_.assign(edges + 1, 0);
    std::vector<std::uint32_t> load(g0.edge_count(), 0);
    std::vector<EdgeId> buf;
    for (std::size_t e = 0; e < edges; ++e) {
      buf.clear();
      target_[e] = walk(e, &buf);
      dilation_ = std::max(dilation_, buf.size());
      for (EdgeId b : buf) congestion_ = std::max<std::size_t>(congestion_, ++load[b]);
      if (cache) {
        walk_edges_.insert(walk_edges_.end(), buf.begin(), buf.end());
        walk_off_[e + 1] = walk_edges_.size();
      }
    }
    if (cfg_.screen) screen();
  }

  const NetworkGraph& base() const noexcept { return *g_; }
  std::shared_ptr<const NetworkGraph> base_ptr() const noexcept { return g_; }
  std::size_t virtual_count() const noexcept { return n_virtual_; }
  std::size_t degree() const noexcept { return cfg_.d0; }
  std::size_t tau() const noexcept { return cfg_.tau; }
  std::uint64_t seed() const noexcept { return cfg_.seed; }
  std::size_t edge_count() const noexcept { return target_.size(); }

  NodeId host(NodeId x) const { return host_[x]; }
  NodeId source(std::size_t e) const noexcept { return static_cast<NodeId>(e / cfg_.d0); }
  NodeId target(std::size_t e) const noexcept { return target_[e]; }
  std::size_t first_edge(NodeId x) const noexcept { return static_cast<std::size_t>(x) * cfg_.d0; }

  // Measured while generating.
  std::size_t congestion() const noexcept { return congestion_; }
  std::size_t dilation() const noexcept { return dilation_; }
  double screen_p_value() const noexcept { return screen_p_; }

  // Base edges of virtual edge e, appended in walk order or reversed.
  void append_path(std::size_t e, bool reverse, std::vector<EdgeId>& out) const {
    if (!walk_off_.empty()) {
      const auto b = walk_edges_.begin() + static_cast<std::ptrdiff_t>(walk_off_[e]);
      const auto f = walk_edges_.begin() + static_cast<std::ptrdiff_t>(walk_off_[e + 1]);
      if (reverse)
        out.insert(out.end(), std::make_reverse_iterator(f), std::make_reverse_iterator(b));
      else
        out.insert(out.end(), b, f);
      return;
    }
    if (!reverse) {
      walk(e, &out);
      return;
    }
    std::vector<EdgeId> tmp;
    walk(e, &tmp);
    out.insert(out.end(), tmp.rbegin(), tmp.rend());
  }

  Path path(std::size_t e) const {
    Path p{host_[source(e)], {}};
    append_path(e, false, p.edges);
    return p;
  }

  // Explicit form for small instances: virtual graph with edges (x, target).
  Embedding to_embedding() const {
    std::vector<Edge> ve;
    ve.reserve(target_.size());
    for (std::size_t e = 0; e < target_.size(); ++e) ve.push_back({source(e), target_[e]});
    Embedding emb;
    emb.base = g_;
    emb.virtual_graph = std::make_shared<const NetworkGraph>(n_virtual_, std::move(ve));
    emb.host = host_;
    emb.paths.reserve(target_.size());
    for (std::size_t e = 0; e < target_.size(); ++e) emb.paths.push_back(path(e));
    emb.measure();
    return emb;
  }

 private:
  // Regenerates walk e; appends crossed edges to *out and returns the
  // endpoint virtual node (a uniform slot of the final node).
  NodeId walk(std::size_t e, std::vector<EdgeId>* out) const {
    const NetworkGraph& g = *g_;
    Rng rng(derive_seed({cfg_.seed, 0x6c766c30ULL, e}));
    NodeId x = host_[source(e)];
    for (std::size_t s = 0; s < cfg_.tau; ++s) {
      const std::uint64_t r = rng.next();
      if ((r >> 63) == 0) continue;
      const auto sl = g.slots(x);
      const EdgeId b = sl[static_cast<std::size_t>((static_cast<unsigned __int128>(r << 1) * sl.size()) >> 64)];
      const NodeId y = g.other_end(b, x);
      if (y == x) continue;
      out->push_back(b);
      x = y;
    }
    return static_cast<NodeId>(g.slot_offset(x) + rng.below(g.degree(x)));
  }

  // Pools the walks leaving a few real nodes and tests their end nodes
  // against the degree-proportional distribution. A walk shorter than the
  // mixing time leaves its start region visibly over-represented.
  void screen() {
    const NetworkGraph& g = *g_;
    const std::size_t n = g.node_count();
    if (n < 2) return;
    const std::size_t starts = std::min(cfg_.screen_starts, n);
    Rng pick(derive_seed({cfg_.seed, 0x7363726eULL}));
    std::vector<double> observed(n);
    double worst = 1.0;
    for (std::size_t s = 0; s < starts; ++s) {
      const NodeId v = host_[pick.below(n_virtual_)];
      std::fill(observed.begin(), observed.end(), 0.0);
      std::size_t total = 0;
      for (std::size_t j = 0; j < g.degree(v); ++j) {
        const std::size_t x = g.slot_offset(v) + j;
        for (std::size_t i = 0; i < cfg_.d0; ++i) {
          observed[host_[target_[x * cfg_.d0 + i]]] += 1.0;
          ++total;
        }
      }
      double stat = 0.0;
      std::size_t bins = 0;
      for (NodeId w = 0; w < n; ++w) {
        const double expect = static_cast<double>(total) * static_cast<double>(g.degree(w)) /
                              static_cast<double>(n_virtual_);
        if (expect <= 0.0) continue;
        stat += (observed[w] - expect) * (observed[w] - expect) / expect;
        ++bins;
      }
      if (bins < 2) continue;
      boost::math::chi_squared dist(static_cast<double>(bins - 1));
      const double p = boost::math::cdf(boost::math::complement(dist, stat));
      worst = std::min(worst, p);
    }
    screen_p_ = worst;
    if (worst < cfg_.screen_alpha / static_cast<double>(starts))
      throw Error(ErrorKind::TauTooSmall, "walk endpoints fail the uniformity screen (p = " + std::to_string(worst) +
                                              ") at tau = " + std::to_string(cfg_.tau));
  }

  std::shared_ptr<const NetworkGraph> g_;
  LevelZeroConfig cfg_;
  std::size_t n_virtual_ = 0;
  std::vector<NodeId> host_;
  std::vector<NodeId> target_;
  std::vector<std::size_t> walk_off_;
  std::vector<EdgeId> walk_edges_;
  std::size_t congestion_ = 0;
  std::size_t dilation_ = 0;
  double screen_p_ = 1.0;
};

inline LevelZero embed_level_zero(std::shared_ptr<const NetworkGraph> g, std::size_t d0, std::size_t tau,
                                  std::uint64_t seed) {
  LevelZeroConfig cfg;
  cfg.d0 = d0;
  cfg.tau = tau;
  cfg.seed = seed;
  return LevelZero(std::move(g), cfg);
}

}  // namespace congestlab
