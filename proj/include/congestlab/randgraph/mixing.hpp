#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "congestlab/netcore/graph.hpp"

namespace congestlab {

// One lazy random-walk step: stay with probability 1/2, otherwise cross a
// uniformly chosen slot. A self-loop slot is a valid move that stays put.
inline NodeId lazy_step(const NetworkGraph& g, NodeId v, Rng& rng) {
  const std::uint64_t r = rng.next();
  if ((r >> 63) == 0) return v;
  const auto s = g.slots(v);
  const std::uint64_t idx = static_cast<std::uint64_t>((static_cast<unsigned __int128>(r << 1) * s.size()) >> 64);
  return g.other_end(s[idx], v);
}

// Sparse lazy transition operator, parallel edges merged.
struct LazyTransition {
  std::vector<std::size_t> offsets;
  std::vector<NodeId> cols;
  std::vector<double> probs;
  std::vector<double> stationary;  // deg(v) / volume

  static LazyTransition build(const NetworkGraph& g) {
    const std::size_t n = g.node_count();
    LazyTransition t;
    t.offsets.assign(n + 1, 0);
    t.stationary.resize(n);
    const double vol = static_cast<double>(g.volume());
    std::vector<double> row(n, 0.0);
    std::vector<NodeId> touched;
    for (NodeId u = 0; u < n; ++u) {
      const double deg = static_cast<double>(g.degree(u));
      t.stationary[u] = deg / vol;
      row[u] += 0.5;
      touched.push_back(u);
      for (EdgeId e : g.slots(u)) {
        const NodeId w = g.other_end(e, u);
        if (row[w] == 0.0) touched.push_back(w);
        row[w] += 0.5 / deg;
      }
      std::sort(touched.begin(), touched.end());
      for (NodeId w : touched) {
        t.cols.push_back(w);
        t.probs.push_back(row[w]);
        row[w] = 0.0;
      }
      touched.clear();
      t.offsets[u + 1] = t.cols.size();
    }
    return t;
  }

  std::size_t size() const noexcept { return stationary.size(); }
};

enum class MixingMethod { Exact, Sampled };

inline std::string to_string(MixingMethod m) { return m == MixingMethod::Exact ? "exact" : "sampled"; }

struct MixingEstimate {
  std::size_t tau = 0;
  MixingMethod method = MixingMethod::Exact;
  // max over (u, v) of |P_u^tau(v) - pi(v)| / pi(v); the criterion is <= 1/n.
  double max_deviation = 0.0;
  bool monotone_at_next = true;  // criterion still holds at tau + 1
  std::string caveat;
};

struct MixingOptions {
  std::size_t cap = 0;  // 0: 64 * ceil(log2 n)
  std::uint64_t seed = 0;
  std::size_t sampled_starts = 16;
  std::size_t sampled_walks = 0;  // per start; 0: min(8n, 2^18)
};

inline std::size_t default_mixing_cap(std::size_t n) { return 64 * std::max<std::size_t>(1, ceil_log2(n)); }

namespace detail {

inline void check_mixing_preconditions(const NetworkGraph& g) {
  if (g.node_count() == 0 || g.volume() == 0) throw Error(ErrorKind::NotConnected, "graph has no edges");
  if (!g.connected()) throw Error(ErrorKind::NotConnected, "graph is not connected");
}

// max relative deviation of the rows of a dense n x n distribution matrix
inline double max_relative_deviation(const std::vector<double>& dist, const std::vector<double>& pi) {
  const std::size_t n = pi.size();
  double worst = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    const double* row = dist.data() + u * n;
    for (std::size_t v = 0; v < n; ++v) worst = std::max(worst, std::abs(row[v] - pi[v]) / pi[v]);
  }
  return worst;
}

inline bool within_mixing_bound(double deviation, std::size_t n) {
  return deviation <= (1.0 / static_cast<double>(n)) * (1.0 + 1e-12);
}

}  // namespace detail

// Exact tau_mix: iterate P^t (P^{t+1} = P * P^t over dense rows) from every
// start until every entry is within pi(v)/n of stationary.
inline MixingEstimate mixing_time_exact(const NetworkGraph& g, const MixingOptions& opt = {}) {
  detail::check_mixing_preconditions(g);
  const std::size_t n = g.node_count();
  if (n > 4096) throw Error(ErrorKind::InvalidArgument, "exact mixing time limited to n <= 4096");
  const std::size_t cap = opt.cap ? opt.cap : default_mixing_cap(n);
  const LazyTransition p = LazyTransition::build(g);

  std::vector<double> cur(n * n, 0.0), next(n * n, 0.0);
  for (std::size_t u = 0; u < n; ++u) cur[u * n + u] = 1.0;

  auto step = [&] {
    for (std::size_t u = 0; u < n; ++u) {
      double* out = next.data() + u * n;
      std::fill(out, out + n, 0.0);
      for (std::size_t k = p.offsets[u]; k < p.offsets[u + 1]; ++k) {
        const double w = p.probs[k];
        const double* in = cur.data() + static_cast<std::size_t>(p.cols[k]) * n;
        for (std::size_t v = 0; v < n; ++v) out[v] += w * in[v];
      }
    }
    cur.swap(next);
  };

  std::size_t t = 0;
  double dev = detail::max_relative_deviation(cur, p.stationary);
  while (!detail::within_mixing_bound(dev, n)) {
    if (t >= cap)
      throw Error(ErrorKind::BudgetExceeded, "mixing time exceeds cap " + std::to_string(cap));
    step();
    ++t;
    dev = detail::max_relative_deviation(cur, p.stationary);
  }
  MixingEstimate est;
  est.tau = t;
  est.method = MixingMethod::Exact;
  est.max_deviation = dev;
  step();
  est.monotone_at_next = detail::within_mixing_bound(detail::max_relative_deviation(cur, p.stationary), n);
  return est;
}

// Sampled estimate for graphs too large for the dense method: empirical walk
// distributions from a sample of starts, accepted when every bin is within
// pi(v)/n plus z binomial standard errors, z Bonferroni-corrected over all
// (start, bin) cells at family-wise level 1%.
inline MixingEstimate mixing_time_sampled(const NetworkGraph& g, const MixingOptions& opt = {}) {
  detail::check_mixing_preconditions(g);
  const std::size_t n = g.node_count();
  const std::size_t cap = opt.cap ? opt.cap : default_mixing_cap(n);
  const LazyTransition p = LazyTransition::build(g);
  const std::size_t starts = std::min(n, std::max<std::size_t>(1, opt.sampled_starts));
  const std::size_t walks = opt.sampled_walks ? opt.sampled_walks : std::min<std::size_t>(8 * n, std::size_t{1} << 18);

  std::vector<NodeId> start_nodes;
  {
    Rng rng(derive_seed({opt.seed, 0x737461727473ULL}));
    for (std::size_t i = 0; i < starts; ++i) start_nodes.push_back(static_cast<NodeId>(rng.below(n)));
  }
  const double z = boost::math::quantile(boost::math::complement(
      boost::math::normal(), 0.01 / (2.0 * static_cast<double>(starts) * static_cast<double>(n))));
  std::vector<std::size_t> counts(n);
  auto deviation_at = [&](std::size_t t, bool& ok) {
    ok = true;
    double worst = 0.0;
    for (std::size_t si = 0; si < starts; ++si) {
      std::fill(counts.begin(), counts.end(), 0);
      Rng rng(derive_seed({opt.seed, t, si}));
      for (std::size_t w = 0; w < walks; ++w) {
        NodeId x = start_nodes[si];
        for (std::size_t s = 0; s < t; ++s) x = lazy_step(g, x, rng);
        ++counts[x];
      }
      for (std::size_t v = 0; v < n; ++v) {
        const double pi = p.stationary[v];
        const double diff = std::abs(static_cast<double>(counts[v]) / static_cast<double>(walks) - pi);
        worst = std::max(worst, diff / pi);
        const double slack = pi / static_cast<double>(n) + z * std::sqrt(pi * (1.0 - pi) / static_cast<double>(walks));
        if (diff > slack) ok = false;
      }
    }
    return worst;
  };

  bool ok = false;
  double dev = deviation_at(0, ok);
  std::size_t hi = 0;
  if (!ok) {
    hi = 1;
    while (true) {
      if (hi > cap) throw Error(ErrorKind::BudgetExceeded, "mixing time exceeds cap " + std::to_string(cap));
      dev = deviation_at(hi, ok);
      if (ok) break;
      hi *= 2;
    }
    std::size_t lo = hi / 2;  // fails at lo (or lo == 0 failed above)
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      bool mid_ok = false;
      const double d = deviation_at(mid, mid_ok);
      if (mid_ok) {
        hi = mid;
        dev = d;
      } else {
        lo = mid;
      }
    }
  }
  MixingEstimate est;
  est.tau = hi;
  est.method = MixingMethod::Sampled;
  est.max_deviation = dev;
  bool next_ok = false;
  deviation_at(hi + 1, next_ok);
  est.monotone_at_next = next_ok;
  est.caveat = "sampled from " + std::to_string(starts) + " starts x " + std::to_string(walks) +
               " walks; bins accepted within pi/n + " + std::to_string(z).substr(0, 4) + " standard errors, so tau may be underestimated";
  return est;
}

inline MixingEstimate mixing_time(const NetworkGraph& g, MixingMethod method, const MixingOptions& opt = {}) {
  return method == MixingMethod::Exact ? mixing_time_exact(g, opt) : mixing_time_sampled(g, opt);
}

}  // namespace congestlab
