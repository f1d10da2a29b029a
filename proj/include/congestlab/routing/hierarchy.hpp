#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "congestlab/hashing.hpp"
#include "congestlab/routing/level_zero.hpp"

namespace congestlab {

inline constexpr std::uint32_t kNoComp = 0xffffffffU;

// One level G_k (k >= 1): a disjoint union of random graphs, one per child
// set of a non-terminal level-(k-1) component. Every edge (v1 -> v2) was made
// by a node u pairing two of its level-(k-1) out-edges u->v1 and u->v2, and is
// embedded along v1 <- u -> v2.
struct HierarchyLevel {
  std::size_t k = 0;
  std::size_t degree = 0;  // d_k, out-degree of every node taking part
  std::uint64_t partition_seed = 0;
  SeededHash hash;

  std::vector<std::uint32_t> comp;  // kNoComp where the parent component was terminal
  std::vector<std::uint32_t> comp_size;
  std::vector<char> terminal;  // per component: size <= stop_size

  std::vector<std::uint32_t> offsets;  // out-edges of x: [offsets[x], offsets[x+1])
  std::vector<NodeId> target;
  std::vector<std::uint32_t> parent_a;  // level k-1 edge u -> v1
  std::vector<std::uint32_t> parent_b;  // level k-1 edge u -> v2

  std::size_t attempts = 1;
  std::size_t max_comp_size = 0;
  std::size_t congestion = 0;  // into level k-1, measured
  std::size_t dilation = 0;

  std::size_t edge_count() const noexcept { return target.size(); }
};

struct HierarchyConfig {
  std::size_t beta = 4;
  std::size_t stop_size = 0;  // 0: default_stop_size
  std::uint64_t seed = 0;
  PartitionHashKind hash = PartitionHashKind::Prf;
  unsigned hash_independence = 8;
  std::size_t max_retries = 5;
};

// max(16, ceil(2^(5 sqrt(log2 n)))) capped at 2N/beta, the high-probability
// size bound of a first-level component.
inline std::size_t default_stop_size(std::size_t n, std::size_t n_virtual, std::size_t beta) {
  const double lg = std::log2(static_cast<double>(std::max<std::size_t>(n, 2)));
  const double raw = std::ceil(std::exp2(5.0 * std::sqrt(lg)));
  const double cap = std::ceil(2.0 * static_cast<double>(n_virtual) / static_cast<double>(beta));
  return std::max<std::size_t>(16, static_cast<std::size_t>(std::min(raw, cap)));
}

// Default level-zero degree: enough that a first-level node keeps d0/4
// out-neighbors w.h.p. at desk scale, and no less than max(ceil(8 ln n), 32).
inline std::size_t default_d0(std::size_t n, std::size_t n_virtual) {
  const double ln_n = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
  const double ln_v = std::log(static_cast<double>(std::max<std::size_t>(n_virtual, 2)));
  const auto base = std::max<std::size_t>(32, static_cast<std::size_t>(std::ceil(8.0 * ln_n)));
  return std::max<std::size_t>(base, 4 * static_cast<std::size_t>(std::ceil(3.0 * ln_v)));
}

class Hierarchy {
 public:
  Hierarchy() = default;

  Hierarchy(std::shared_ptr<const LevelZero> l0, const HierarchyConfig& cfg) : l0_(std::move(l0)), cfg_(cfg) {
    if (cfg_.beta < 2 || cfg_.beta > 256) throw Error(ErrorKind::InvalidArgument, "beta must be in [2, 256]");
    const std::size_t n_virtual = l0_->virtual_count();
    if (cfg_.stop_size == 0) cfg_.stop_size = default_stop_size(l0_->base().node_count(), n_virtual, cfg_.beta);
    terminal0_ = n_virtual <= cfg_.stop_size;
    bool open = !terminal0_;
    std::size_t d = l0_->degree();
    while (open) {
      d /= 4;
      if (d == 0) break;
      const std::size_t k = levels_.size() + 1;
      for (std::size_t attempt = 0;; ++attempt) {
        try {
          levels_.push_back(build_level(k, d, attempt));
          levels_.back().attempts = attempt + 1;
          retries_ += attempt;
          break;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::DegreeUnderflow || attempt >= cfg_.max_retries) throw;
        }
      }
      auto& lv = levels_.back();
      const PathMetrics m = recount_level(k);
      lv.congestion = m.congestion;
      lv.dilation = m.dilation;
      open = std::any_of(lv.terminal.begin(), lv.terminal.end(), [](char t) { return t == 0; });
    }
  }

  const LevelZero& level_zero() const noexcept { return *l0_; }
  const HierarchyConfig& config() const noexcept { return cfg_; }
  std::size_t depth() const noexcept { return levels_.size(); }  // K
  const std::vector<HierarchyLevel>& levels() const noexcept { return levels_; }
  const HierarchyLevel& level(std::size_t k) const { return levels_.at(k - 1); }
  std::size_t retries() const noexcept { return retries_; }
  std::size_t stop_size() const noexcept { return cfg_.stop_size; }
  std::size_t virtual_count() const noexcept { return l0_->virtual_count(); }

  // Component of x at level k; level 0 is a single component.
  std::uint32_t comp(std::size_t k, NodeId x) const { return k == 0 ? 0U : levels_[k - 1].comp[x]; }
  bool terminal(std::size_t k, std::uint32_t c) const { return k == 0 ? terminal0_ : levels_[k - 1].terminal[c] != 0; }

  // Component of x at level k computed from the level's partition seed and
  // x's component one level up; what a node can evaluate for any t locally.
  std::uint32_t predicted_comp(std::size_t k, NodeId x) const {
    const std::uint32_t up = comp(k - 1, x);
    if (up == kNoComp || terminal(k - 1, up)) return kNoComp;
    return static_cast<std::uint32_t>(up * cfg_.beta + levels_[k - 1].hash.bucket(x, cfg_.beta));
  }

  // Out-edges of x at level k as a half-open id range.
  std::pair<std::size_t, std::size_t> out_edges(std::size_t k, NodeId x) const {
    if (k == 0) return {l0_->first_edge(x), l0_->first_edge(x) + l0_->degree()};
    const auto& lv = levels_[k - 1];
    return {lv.offsets[x], lv.offsets[x + 1]};
  }
  NodeId target(std::size_t k, std::size_t e) const { return k == 0 ? l0_->target(e) : levels_[k - 1].target[e]; }
  std::size_t edge_count(std::size_t k) const { return k == 0 ? l0_->edge_count() : levels_[k - 1].edge_count(); }

  // In-edges of level k, built on first use: (edge id, source) pairs.
  struct InEdge {
    std::uint32_t edge;
    NodeId source;
  };
  std::pair<const InEdge*, const InEdge*> in_edges(std::size_t k, NodeId x) const {
    if (in_.size() <= k) in_.resize(k + 1);
    auto& idx = in_[k];
    if (idx.offsets.empty()) build_in(k);
    return {idx.edges.data() + idx.offsets[x], idx.edges.data() + idx.offsets[x + 1]};
  }

  // Independent recount of a level's embedding into its parent: every path
  // is v1 <- u -> v2 through two parent edges out of one node u; congestion
  // counts how often a parent edge is used.
  PathMetrics recount_level(std::size_t k) const {
    const auto& lv = levels_.at(k - 1);
    std::vector<std::uint32_t> use(edge_count(k - 1), 0);
    PathMetrics m;
    const std::size_t nv = virtual_count();
    for (NodeId v1 = 0; v1 < nv; ++v1) {
      for (std::size_t e = lv.offsets[v1]; e < lv.offsets[v1 + 1]; ++e) {
        const std::size_t a = lv.parent_a[e], b = lv.parent_b[e];
        if (source_of(k - 1, a) != source_of(k - 1, b) || target(k - 1, a) != v1 || target(k - 1, b) != lv.target[e])
          throw Error(ErrorKind::GraphMismatch, "level " + std::to_string(k) + " edge " + std::to_string(e) +
                                                    " is not embedded along a 2-path");
        m.congestion = std::max<std::size_t>(m.congestion, ++use[a]);
        m.congestion = std::max<std::size_t>(m.congestion, ++use[b]);
        m.dilation = 2;
      }
    }
    return m;
  }

  NodeId source_of(std::size_t k, std::size_t e) const {
    if (k == 0) return l0_->source(e);
    const auto& off = levels_[k - 1].offsets;
    return static_cast<NodeId>(std::upper_bound(off.begin(), off.end(), static_cast<std::uint32_t>(e)) - off.begin() - 1);
  }

 private:
  struct InIndex {
    std::vector<std::uint32_t> offsets;
    std::vector<InEdge> edges;
  };

  void build_in(std::size_t k) const {
    const std::size_t nv = virtual_count();
    auto& idx = in_[k];
    idx.offsets.assign(nv + 1, 0);
    for (NodeId x = 0; x < nv; ++x) {
      auto [b, f] = out_edges(k, x);
      for (std::size_t e = b; e < f; ++e) ++idx.offsets[target(k, e) + 1];
    }
    for (std::size_t x = 0; x < nv; ++x) idx.offsets[x + 1] += idx.offsets[x];
    idx.edges.resize(idx.offsets[nv]);
    std::vector<std::uint32_t> fill(idx.offsets.begin(), idx.offsets.end() - 1);
    for (NodeId x = 0; x < nv; ++x) {
      auto [b, f] = out_edges(k, x);
      for (std::size_t e = b; e < f; ++e) idx.edges[fill[target(k, e)]++] = {static_cast<std::uint32_t>(e), x};
    }
  }

  // Pairs u's out-edges whose targets share a child set. Calls
  // emit(edge_a, edge_b) for each ordered pair.
  template <typename Emit>
  void pair_out_edges(std::size_t k, NodeId u, const std::vector<std::uint8_t>& bucket, std::uint64_t seed,
                      std::vector<std::vector<std::uint32_t>>& groups, Emit&& emit) const {
    for (auto& gp : groups) gp.clear();
    auto [b, f] = out_edges(k - 1, u);
    for (std::size_t e = b; e < f; ++e) groups[bucket[target(k - 1, e)]].push_back(static_cast<std::uint32_t>(e));
    Rng rng(derive_seed({seed, 0x70616972ULL, u}));
    for (auto& gp : groups) {
      for (std::size_t i = gp.size(); i > 1; --i) std::swap(gp[i - 1], gp[rng.below(i)]);
      for (std::size_t i = 0; i + 1 < gp.size(); i += 2) emit(gp[i], gp[i + 1]);
    }
  }

  HierarchyLevel build_level(std::size_t k, std::size_t d, std::size_t attempt) const {
    const std::size_t nv = virtual_count();
    const std::size_t beta = cfg_.beta;
    HierarchyLevel lv;
    lv.k = k;
    lv.degree = d;
    lv.partition_seed = derive_seed({cfg_.seed, 0x6c6576656cULL, k, attempt});
    lv.hash = SeededHash(lv.partition_seed, cfg_.hash, cfg_.hash_independence);

    // Child sets.
    std::uint32_t parent_comps = 1;
    if (k > 1) parent_comps = static_cast<std::uint32_t>(levels_[k - 2].comp_size.size());
    lv.comp.assign(nv, kNoComp);
    lv.comp_size.assign(static_cast<std::size_t>(parent_comps) * beta, 0);
    std::vector<std::uint8_t> bucket(nv, 0);
    std::vector<char> active(nv, 0);
    for (NodeId x = 0; x < nv; ++x) {
      const std::uint32_t up = comp(k - 1, x);
      if (up == kNoComp || terminal(k - 1, up)) continue;
      active[x] = 1;
      bucket[x] = static_cast<std::uint8_t>(lv.hash.bucket(x, beta));
      lv.comp[x] = static_cast<std::uint32_t>(up * beta + bucket[x]);
      ++lv.comp_size[lv.comp[x]];
    }
    lv.terminal.resize(lv.comp_size.size());
    for (std::size_t c = 0; c < lv.comp_size.size(); ++c) {
      lv.terminal[c] = lv.comp_size[c] <= cfg_.stop_size ? 1 : 0;
      lv.max_comp_size = std::max<std::size_t>(lv.max_comp_size, lv.comp_size[c]);
    }

    // Candidate child edges grouped by their first node v1, in two passes so
    // only the parent edge ids are stored.
    std::vector<std::vector<std::uint32_t>> groups(beta);
    std::vector<std::uint32_t> cand_off(nv + 1, 0);
    for (NodeId u = 0; u < nv; ++u) {
      if (!active[u]) continue;
      pair_out_edges(k, u, bucket, lv.partition_seed, groups,
                     [&](std::uint32_t a, std::uint32_t) { ++cand_off[target(k - 1, a) + 1]; });
    }
    for (std::size_t x = 0; x < nv; ++x) cand_off[x + 1] += cand_off[x];
    std::vector<std::uint32_t> cand_a(cand_off[nv]), cand_b(cand_off[nv]);
    {
      std::vector<std::uint32_t> fill(cand_off.begin(), cand_off.end() - 1);
      for (NodeId u = 0; u < nv; ++u) {
        if (!active[u]) continue;
        pair_out_edges(k, u, bucket, lv.partition_seed, groups, [&](std::uint32_t a, std::uint32_t b) {
          const std::uint32_t slot = fill[target(k - 1, a)]++;
          cand_a[slot] = a;
          cand_b[slot] = b;
        });
      }
    }

    // Each node keeps exactly d of its candidates, chosen at random.
    lv.offsets.assign(nv + 1, 0);
    for (NodeId x = 0; x < nv; ++x) {
      if (!active[x]) {
        lv.offsets[x + 1] = lv.offsets[x];
        continue;
      }
      const std::size_t have = cand_off[x + 1] - cand_off[x];
      if (have < d)
        throw Error(ErrorKind::DegreeUnderflow, "level " + std::to_string(k) + " node " + std::to_string(x) + " has " +
                                                    std::to_string(have) + " < " + std::to_string(d) + " out-neighbors");
      lv.offsets[x + 1] = static_cast<std::uint32_t>(lv.offsets[x] + d);
    }
    const std::size_t total = lv.offsets[nv];
    lv.target.resize(total);
    lv.parent_a.resize(total);
    lv.parent_b.resize(total);
    std::vector<std::uint32_t> order;
    for (NodeId x = 0; x < nv; ++x) {
      if (!active[x]) continue;
      const std::size_t base = cand_off[x], have = cand_off[x + 1] - base;
      order.resize(have);
      for (std::size_t i = 0; i < have; ++i) order[i] = static_cast<std::uint32_t>(base + i);
      Rng rng(derive_seed({lv.partition_seed, 0x6b656570ULL, x}));
      for (std::size_t i = 0; i < d; ++i) std::swap(order[i], order[i + rng.below(have - i)]);
      for (std::size_t i = 0; i < d; ++i) {
        const std::size_t e = lv.offsets[x] + i;
        lv.parent_a[e] = cand_a[order[i]];
        lv.parent_b[e] = cand_b[order[i]];
        lv.target[e] = target(k - 1, cand_b[order[i]]);
      }
    }
    return lv;
  }

  std::shared_ptr<const LevelZero> l0_;
  HierarchyConfig cfg_;
  bool terminal0_ = true;
  std::vector<HierarchyLevel> levels_;
  std::size_t retries_ = 0;
  mutable std::vector<InIndex> in_;
};

inline Hierarchy build_hierarchy(std::shared_ptr<const LevelZero> level0, std::size_t beta, std::size_t stop_size, std::uint64_t seed,
                                 HierarchyConfig cfg = {}) {
  cfg.beta = beta;
  cfg.stop_size = stop_size;
  cfg.seed = seed;
  return Hierarchy(std::move(level0), cfg);
}

}  // namespace congestlab
