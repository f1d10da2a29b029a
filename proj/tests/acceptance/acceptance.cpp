// Acceptance runner: one PASS/FAIL line per criterion with measured values
// and the tolerances they are held to. `acceptance --criterion N` runs one.
#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <sstream>

#include "congestlab/cli/commands.hpp"

using namespace congestlab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::shared_ptr<const NetworkGraph> random_graph(std::size_t n, std::uint64_t seed) {
  return std::make_shared<const NetworkGraph>(generate({n, auto_degree(n), seed}));
}

double log2d(std::size_t n) { return std::log2(static_cast<double>(n)); }

// ---- 1: composition law ----
Outcome compose_law() {
  std::size_t bad = 0, max_ratio_c = 0, cases = 0;
  double worst_c = 0, worst_d = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(derive_seed({seed, 0x63316cULL}));
    const std::size_t n = 2 + rng.below(31);
    auto base = std::make_shared<const NetworkGraph>(generate({n, 1 + rng.below(4), seed}));
    if (!base->connected()) base = std::make_shared<const NetworkGraph>(graphs::complete(n));
    const Embedding e1 = random_walk_embedding(base, 1 + rng.below(3), 1 + rng.below(6), seed + 1);
    const Embedding e2 = random_walk_embedding(e1.virtual_graph, 1 + rng.below(3), 1 + rng.below(6), seed + 2);
    const Embedding e12 = compose(e1, e2);
    const PathMetrics m = verify_embedding(e12);
    const PathMetrics m1 = recount(*e1.base, e1.paths), m2 = recount(*e2.base, e2.paths);
    ++cases;
    const std::size_t cb = m1.congestion * m2.congestion, db = m1.dilation * m2.dilation;
    if (m.congestion > cb || m.dilation > db) ++bad;
    if (cb) worst_c = std::max(worst_c, static_cast<double>(m.congestion) / static_cast<double>(cb));
    if (db) worst_d = std::max(worst_d, static_cast<double>(m.dilation) / static_cast<double>(db));
    max_ratio_c = std::max(max_ratio_c, m.congestion);
  }
  std::ostringstream os;
  os << "embeddings=" << cases << " violations=" << bad << " (tol 0) max c/(c1c2)=" << worst_c
     << " max d/(d1d2)=" << worst_d << " max c=" << max_ratio_c;
  return {bad == 0 && cases == 200, os.str()};
}

// ---- 2: level discipline ----
Outcome level_discipline() {
  std::size_t levels = 0, bad = 0, max_c = 0, max_d = 0;
  for (std::size_t n : {256, 1024}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      RoutingContext ctx(random_graph(n, seed), {}, seed);
      const Hierarchy& h = ctx.hierarchy();
      for (std::size_t k = 1; k <= h.depth(); ++k) {
        const PathMetrics m = h.recount_level(k);
        ++levels;
        max_c = std::max(max_c, m.congestion);
        max_d = std::max(max_d, m.dilation);
        if (m.congestion > 1 || m.dilation > 2) ++bad;
      }
    }
  }
  std::ostringstream os;
  os << "levels=" << levels << " over 20 hierarchies, max congestion=" << max_c << " (tol 1) max dilation=" << max_d
     << " (tol 2) exceptions=" << bad;
  return {bad == 0 && levels > 0, os.str()};
}

// ---- 3 and 4: routing and delivery of permutations ----
struct PermRun {
  std::size_t n = 0;
  PathSolution sol;
  bool valid = true;
  DeliveryResult dr;
  bool exact = false;
};

PermRun route_permutation(std::size_t n, std::uint64_t seed, bool deliver_too) {
  PermRun r;
  r.n = n;
  auto g = random_graph(n, seed);
  RoutingContext ctx(g, {}, seed);
  const RoutingInstance inst = RoutingInstance::permutation(n, seed);
  r.sol = route(inst, ctx);
  r.valid = r.sol.paths.size() == n && recount(*g, r.sol.paths) == PathMetrics{r.sol.congestion, r.sol.dilation};
  for (std::size_t i = 0; i < inst.pairs.size() && r.valid; ++i)
    r.valid = path_connects(*g, r.sol.paths[i], inst.pairs[i].s, inst.pairs[i].t);
  if (deliver_too) {
    std::vector<std::vector<Word>> payloads;
    for (std::size_t i = 0; i < n; ++i) payloads.push_back({derive_seed({seed, 0x776f7264ULL, i})});
    DeliveryConfig dc;
    dc.seed = derive_seed({seed, 0x64656cULL});
    r.dr = deliver(*g, r.sol.paths, payloads, dc);
    r.exact = r.dr.delivered == payloads;
  }
  return r;
}

Outcome routing_completeness() {
  std::size_t runs = 0, invalid = 0, max_resamples = 0;
  double worst_load = 0;
  std::ostringstream os;
  for (std::size_t n : {256, 1024}) {
    std::size_t max_load = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const PermRun r = route_permutation(n, seed, false);
      ++runs;
      if (!r.valid) ++invalid;
      max_resamples = std::max(max_resamples, r.sol.resamples);
      max_load = std::max(max_load, r.sol.max_relay_load);
    }
    worst_load = std::max(worst_load, static_cast<double>(max_load) / log2d(n));
    os << "n=" << n << " max relay load=" << max_load << " (tol " << 4 * log2d(n) << ") ";
  }
  os << "runs=" << runs << " invalid=" << invalid << " (tol 0) max resamples=" << max_resamples << " (tol 2)";
  return {invalid == 0 && worst_load <= 4.0 && max_resamples <= 2, os.str()};
}

Outcome delivery() {
  std::size_t runs = 0, inexact = 0, violations = 0;
  double max_kappa = 0;
  std::ostringstream os;
  for (std::size_t n : {256, 1024}) {
    double kn = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const PermRun r = route_permutation(n, seed, true);
      ++runs;
      if (!r.exact) ++inexact;
      violations += r.dr.report.violations;
      kn = std::max(kn, r.dr.kappa_measured);
    }
    max_kappa = std::max(max_kappa, kn);
    os << "n=" << n << " max kappa=" << kn << " ";
  }
  os << "runs=" << runs << " inexact=" << inexact << " (tol 0) violations=" << violations
     << " (tol 0) kappa tol 4";
  return {inexact == 0 && violations == 0 && max_kappa <= 4.0, os.str()};
}

// ---- 5: mixing time ----
Outcome mixing() {
  bool ok = true;
  std::ostringstream os;
  for (std::size_t n : {128, 256, 512, 1024}) {
    std::size_t lo = SIZE_MAX, hi = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      MixingOptions mo;
      mo.seed = derive_seed({seed, 0x6d6978ULL});
      const MixingEstimate est = mixing_time_exact(*random_graph(n, seed), mo);
      lo = std::min(lo, est.tau);
      hi = std::max(hi, est.tau);
      if (static_cast<double>(est.tau) > 10 * log2d(n)) ok = false;
    }
    os << "n=" << n << " tau in [" << lo << "," << hi << "] (tol " << 10 * log2d(n) << ") ";
  }
  os << "seeds=20";
  return {ok, os.str()};
}

// ---- 6: PRAM oracle equivalence ----
struct SimTally {
  std::size_t runs = 0, mismatches = 0, mst_mismatches = 0;
};

void simulate_one(const std::string& program, std::size_t n, const ProgramParams& params, std::uint64_t seed,
                  SimTally& t) {
  auto g = random_graph(n, seed);
  RoutingContext ctx(g, {}, seed);
  const ProgramInstance pi = find_program(program).build(*g, params, seed);
  const SimulationResult sr = simulate(ctx, *pi.program);
  const PramRun ref = run_pram(*pi.program);
  ++t.runs;
  if (sr.memory != ref.memory || sr.output != ref.output || sr.output != pi.expected) ++t.mismatches;
  if (pi.mst && edge_pairs(sr.output) != pi.mst->pairs) ++t.mst_mismatches;
}

Outcome pram_equivalence(std::size_t boruvka_n) {
  SimTally prefix, sorted, mst;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    simulate_one("prefix_sum", 128, {{"len", "4096"}}, seed, prefix);
    simulate_one("sort", 128, {{"len", "1024"}}, seed, sorted);
    simulate_one("boruvka_mst", boruvka_n, {}, seed, mst);
  }
  std::ostringstream os;
  os << "prefix_sum len 4096: " << prefix.mismatches << "/" << prefix.runs << " mismatched; sort len 1024: "
     << sorted.mismatches << "/" << sorted.runs << " mismatched; boruvka_mst n=" << boruvka_n << ": " << mst.mismatches
     << "/" << mst.runs << " mismatched, " << mst.mst_mismatches << " differ from Kruskal (tol 0 each)";
  return {prefix.mismatches + sorted.mismatches + mst.mismatches + mst.mst_mismatches == 0, os.str()};
}

// ---- 7: fan-trees ----
Outcome fan_trees() {
  std::size_t missing = 0, wrong = 0, max_load = 0, resamples = 0;
  double max_kappa = 0, bound = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RoutingContext ctx(random_graph(256, seed), {}, seed);
    const std::size_t nv = ctx.virtual_count();
    // Adversarial round: every virtual node asks for one of 8 blocks.
    Rng rng(derive_seed({seed, 0x66616eULL}));
    std::vector<NodeId> perm(nv);
    std::iota(perm.begin(), perm.end(), NodeId{0});
    for (std::size_t i = nv; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    std::vector<FanTreeSession> ss(8);
    for (std::size_t s = 0; s < 8; ++s) ss[s].root = perm[s];
    for (std::size_t i = 8; i < nv; ++i) ss[rng.below(8)].leaves.push_back(perm[i]);
    auto block = [seed](std::size_t s) { return std::vector<Word>{derive_seed({seed, s}), s}; };
    const FanOutResult fo = fanin_fanout(ctx, ss, block);
    for (std::size_t s = 0; s < 8; ++s) {
      if (fo.received[s].size() != ss[s].leaves.size()) ++missing;
      for (const auto& got : fo.received[s])
        if (got != block(s)) ++wrong;
    }
    max_load = std::max(max_load, fo.stats.max_load);
    max_kappa = std::max(max_kappa, fo.stats.kappa_measured);
    bound = fo.stats.load_bound;
    resamples += fo.stats.resamples;
  }
  std::ostringstream os;
  os << "sessions=8 n=256 seeds=10 missing=" << missing << " wrong=" << wrong << " (tol 0) max load=" << max_load
     << " (tol " << bound << ") kappa_tree=" << max_kappa << " (tol 4) resamples=" << resamples;
  return {missing == 0 && wrong == 0 && max_kappa <= 4.0, os.str()};
}

// ---- 8: phi bijection ----
Outcome phi_bijection() {
  std::size_t slots = 0, bad = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Rng rng(derive_seed({seed, 0x706869ULL}));
    const std::size_t n = 2 + rng.below(127);
    const NetworkGraph g = generate({n, 1 + rng.below(auto_degree(n)), seed});
    const PhiTable t = PhiTable::of(g);
    if (t.total != g.volume()) ++bad;
    for (std::uint64_t k = 0; k < t.total; ++k, ++slots) {
      const SlotRef s = lookup_phi(t, k);
      if (rank(t, s) != k || s.slot >= g.degree(s.vertex)) ++bad;
    }
  }
  std::ostringstream os;
  os << "graphs=50 slots=" << slots << " mismatches=" << bad << " (tol 0)";
  return {bad == 0, os.str()};
}

// ---- 9: growth ----
Outcome growth(std::size_t seeds) {
  const std::vector<std::size_t> grid{256, 512, 1024, 2048, 4096};
  std::vector<cli::GrowthRow> rows;
  std::size_t failures = 0;
  for (auto n : grid) {
    rows.push_back(cli::growth_row(n, "auto", seeds, 1, {}));
    failures += rows.back().failures;
  }
  std::ostringstream csv;
  cli::write_growth_csv(csv, rows);
  std::cout << csv.str();
  bool decreasing = true;
  std::ostringstream os;
  os << "rounds/sqrt(n):";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double r = rows[i].rounds / std::sqrt(static_cast<double>(rows[i].n));
    os << ' ' << r;
    if (i > 0 && r >= rows[i - 1].rounds / std::sqrt(static_cast<double>(rows[i - 1].n))) decreasing = false;
  }
  os << " soft check decreasing=" << (decreasing ? "yes" : "no") << " (recorded only); seeds=" << seeds
     << " failed runs=" << failures << " (tol 0)";
  return {failures == 0, os.str()};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  std::size_t boruvka_n = 48, growth_seeds = 5;
  app.add_option("--criterion", only, "run one criterion (1-9); default all");
  app.add_option("--boruvka-n", boruvka_n, "graph size for the simulated MST runs")->capture_default_str();
  app.add_option("--growth-seeds", growth_seeds, "seeds per growth grid point")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "composition law", 60, compose_law},
      {2, "level discipline", 120, level_discipline},
      {3, "routing completeness", 300, routing_completeness},
      {4, "delivery", 300, delivery},
      {5, "mixing time", 180, mixing},
      {6, "PRAM oracle equivalence", 600, [&] { return pram_equivalence(boruvka_n); }},
      {7, "fan-trees", 120, fan_trees},
      {8, "phi bijection", 60, phi_bijection},
      {9, "growth report", 1200, [&] { return growth(growth_seeds); }},
  };
  if (only < 0 || only > 9) {
    std::cerr << "--criterion must be in 1..9\n";
    return 2;
  }

  bool all_pass = true;
  for (const auto& c : all) {
    if (only && c.id != only) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    all_pass = all_pass && pass;
    std::printf("%s criterion %d (%s): %s; runtime %.1fs (budget %.0fs)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_s);
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
