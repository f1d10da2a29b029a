#pragma once

#include <cmath>
#include <vector>

#include "congestlab/netcore/graph.hpp"

namespace congestlab {

struct RandomGraphSpec {
  std::size_t n = 0;
  std::size_t d = 1;  // outgoing picks per node
  std::uint64_t seed = 0;
};

// d = ceil(8 ln n), the default degree used throughout the experiments.
inline std::size_t auto_degree(std::size_t n) {
  return n <= 1 ? 1 : static_cast<std::size_t>(std::ceil(8.0 * std::log(static_cast<double>(n))));
}

// G(n, d): every node picks d nodes uniformly with replacement. Edge v*d + i
// is node v's i-th pick, stored with endpoint u = v, so outgoing picks are
// recoverable from the graph alone. Self-loops and parallels are kept.
inline NetworkGraph generate(const RandomGraphSpec& spec) {
  if (spec.n == 0) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
  if (spec.d == 0) throw Error(ErrorKind::InvalidArgument, "d must be >= 1");
  std::vector<Edge> edges;
  edges.reserve(spec.n * spec.d);
  for (NodeId v = 0; v < spec.n; ++v) {
    Rng rng(derive_seed({spec.seed, 0x67656eULL, v}));
    for (std::size_t i = 0; i < spec.d; ++i) edges.push_back({v, static_cast<NodeId>(rng.below(spec.n))});
  }
  return NetworkGraph(spec.n, std::move(edges));
}

}  // namespace congestlab
