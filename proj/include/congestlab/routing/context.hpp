#pragma once

#include <memory>
#include <optional>

#include "congestlab/randgraph/mixing.hpp"
#include "congestlab/routing/hierarchy.hpp"

namespace congestlab {

struct RoutingConfig {
  std::size_t beta = 4;
  std::size_t d0 = 0;         // 0: default_d0
  std::size_t stop_size = 0;  // 0: default_stop_size
  std::size_t tau = 0;        // 0: measured mixing time of the graph
  std::size_t width_cap = 0;  // 0: 4 ceil(log2 n)
  double load_cap = 4.0;      // relay hand-offs per node <= load_cap * log2 n
  std::size_t max_resamples = 5;
  PartitionHashKind hash = PartitionHashKind::Prf;
  bool strict_complete = false;  // final components must be complete graphs
  bool screen = true;
  std::size_t exact_mixing_limit = 2048;  // exact mixing time up to this n, sampled above
  std::size_t mixing_cap = 0;             // 0: default_mixing_cap
};

inline std::size_t default_width_cap(std::size_t n) { return 4 * std::max<std::size_t>(1, ceil_log2(n)); }

// Everything the routing layer keeps about one network: the level-zero
// embedding and the current hierarchy over it.
class RoutingContext {
 public:
  RoutingContext(std::shared_ptr<const NetworkGraph> g, RoutingConfig cfg, std::uint64_t seed)
      : g_(std::move(g)), cfg_(cfg), seed_(seed) {
    const NetworkGraph& graph = *g_;
    if (graph.node_count() == 0) throw Error(ErrorKind::InvalidArgument, "empty graph");
    if (!graph.connected()) throw Error(ErrorKind::NotConnected, "graph is not connected");
    if (cfg_.width_cap == 0) cfg_.width_cap = default_width_cap(graph.node_count());
    if (cfg_.tau == 0) {
      if (graph.volume() == 0 || graph.node_count() == 1) {
        cfg_.tau = 1;
      } else {
        MixingOptions mo;
        mo.seed = derive_seed({seed_, 0x6d6978ULL});
        mo.cap = cfg_.mixing_cap;
        const MixingMethod method =
            graph.node_count() <= cfg_.exact_mixing_limit ? MixingMethod::Exact : MixingMethod::Sampled;
        mixing_ = mixing_time(graph, method, mo);
        cfg_.tau = std::max<std::size_t>(1, mixing_->tau);
      }
    }
    if (cfg_.d0 == 0) cfg_.d0 = default_d0(graph.node_count(), graph.volume());
    LevelZeroConfig lz;
    lz.d0 = cfg_.d0;
    lz.tau = cfg_.tau;
    lz.seed = derive_seed({seed_, 0x6c30ULL});
    lz.screen = cfg_.screen;
    l0_ = std::make_shared<const LevelZero>(g_, lz);
    rebuild(derive_seed({seed_, 0x68696572ULL, 0}));
  }

  const NetworkGraph& graph() const noexcept { return *g_; }
  std::shared_ptr<const NetworkGraph> graph_ptr() const noexcept { return g_; }
  const RoutingConfig& config() const noexcept { return cfg_; }
  const LevelZero& level_zero() const noexcept { return *l0_; }
  const Hierarchy& hierarchy() const noexcept { return *hier_; }
  const std::optional<MixingEstimate>& mixing() const noexcept { return mixing_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t tau() const noexcept { return cfg_.tau; }
  std::size_t virtual_count() const noexcept { return l0_->virtual_count(); }

  // Routing avatar of real node v: its first slot (v, 1).
  NodeId avatar(NodeId v) const { return static_cast<NodeId>(g_->slot_offset(v)); }
  NodeId host(NodeId x) const { return l0_->host(x); }

  // Fresh partition seeds after a failed high-probability event.
  void resample() {
    ++resamples_;
    rebuild(derive_seed({seed_, 0x68696572ULL, resamples_}));
  }
  std::size_t resamples() const noexcept { return resamples_; }

  // Per-call stream for routing decisions.
  std::uint64_t next_call_seed() { return derive_seed({seed_, 0x63616c6cULL, calls_++}); }

 private:
  void rebuild(std::uint64_t hseed) {
    HierarchyConfig hc;
    hc.beta = cfg_.beta;
    hc.stop_size = cfg_.stop_size;
    hc.seed = hseed;
    hc.hash = cfg_.hash;
    hier_ = std::make_shared<const Hierarchy>(l0_, hc);
  }

  std::shared_ptr<const NetworkGraph> g_;
  RoutingConfig cfg_;
  std::uint64_t seed_;
  std::optional<MixingEstimate> mixing_;
  std::shared_ptr<const LevelZero> l0_;
  std::shared_ptr<const Hierarchy> hier_;
  std::size_t resamples_ = 0;
  std::uint64_t calls_ = 0;
};

}  // namespace congestlab
