#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <string>

#include "congestlab/algolib/registry.hpp"
#include "congestlab/netcore/graph_io.hpp"
#include "congestlab/pramsim/output.hpp"
#include "congestlab/randgraph/generate.hpp"
#include "congestlab/routing/exchange.hpp"

namespace congestlab::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2 };

// Bad flags or values; mapped to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::uint64_t default_seed() {
  if (const char* s = std::getenv("CONGESTLAB_SEED"); s && *s) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (*end != '\0') throw UsageError(std::string("CONGESTLAB_SEED is not a number: ") + s);
    return v;
  }
  return 1;
}

// "auto" or a positive count.
inline std::size_t parse_degree(const std::string& d, std::size_t n) {
  if (d == "auto") return auto_degree(n);
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(d, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != d.size() || d.empty() || d[0] == '-' || v == 0) throw UsageError("--d must be 'auto' or a positive integer");
  return static_cast<std::size_t>(v);
}

struct GraphOptions {
  std::size_t n = 0;
  std::string d = "auto";
  std::uint64_t seed = 1;
  std::size_t seeds = 1;

  void validate() const {
    if (n == 0) throw UsageError("--n must be >= 1");
    if (seeds == 0) throw UsageError("--seeds must be >= 1");
    parse_degree(d, n);
  }
  std::size_t degree() const { return parse_degree(d, n); }
  std::uint64_t seed_at(std::size_t i) const { return seed + i; }
};

struct RoutingKnobs {
  std::size_t beta = 4;
  std::size_t d0 = 0;
  std::size_t stop_size = 0;
  std::size_t width_cap = 0;

  RoutingConfig config() const {
    if (beta < 2) throw UsageError("--beta must be >= 2");
    RoutingConfig c;
    c.beta = beta;
    c.d0 = d0;
    c.stop_size = stop_size;
    c.width_cap = width_cap;
    return c;
  }
};

// ---- gen ----

inline int cmd_gen(const GraphOptions& o, const std::string& out_path, std::ostream& out) {
  o.validate();
  const NetworkGraph g = generate({o.n, o.degree(), o.seed});
  if (out_path.empty()) {
    write_graph(out, g);
    return kOk;
  }
  save_graph(out_path, g);
  nlohmann::ordered_json j{{"n", g.node_count()}, {"d", o.degree()},         {"seed", o.seed},
                           {"edges", g.edge_count()}, {"volume", g.volume()}, {"connected", g.connected()},
                           {"path", out_path}};
  out << j.dump() << '\n';
  return kOk;
}

// ---- mixing ----

inline int cmd_mixing(const GraphOptions& o, const std::string& method, std::ostream& out) {
  o.validate();
  if (method != "exact" && method != "sampled" && method != "auto") throw UsageError("--method must be exact, sampled or auto");
  const MixingMethod m = method == "sampled" || (method == "auto" && o.n > 2048) ? MixingMethod::Sampled : MixingMethod::Exact;
  int code = kOk;
  for (std::size_t i = 0; i < o.seeds; ++i) {
    const std::uint64_t seed = o.seed_at(i);
    const NetworkGraph g = generate({o.n, o.degree(), seed});
    MixingOptions mo;
    mo.seed = derive_seed({seed, 0x6d6978ULL});
    const MixingEstimate est = mixing_time(g, m, mo);
    const double lg = std::log2(static_cast<double>(std::max<std::size_t>(2, o.n)));
    nlohmann::ordered_json j{{"n", o.n},
                             {"seed", seed},
                             {"tau", est.tau},
                             {"method", to_string(est.method)},
                             {"max_deviation", est.max_deviation},
                             {"tau_over_log2n", static_cast<double>(est.tau) / lg},
                             {"monotone_at_next", est.monotone_at_next}};
    if (!est.caveat.empty()) j["caveat"] = est.caveat;
    out << j.dump() << '\n';
    if (!est.monotone_at_next) code = kVerifyFailed;
  }
  return code;
}

// ---- route ----

struct RouteRecord {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t pairs = 0;
  std::size_t congestion = 0;
  std::size_t dilation = 0;
  std::size_t levels = 0;
  std::size_t rounds = 0;
  std::size_t retries = 0;
  std::size_t tau = 0;
  std::size_t max_relay_load = 0;
  double kappa = 0.0;
  std::size_t violations = 0;
  bool paths_valid = false;
  bool delivered = false;

  bool ok() const { return paths_valid && delivered && violations == 0; }
  nlohmann::ordered_json json() const {
    return {{"n", n},           {"seed", seed},     {"congestion", congestion}, {"dilation", dilation},
            {"levels", levels}, {"rounds", rounds}, {"retries", retries},       {"pairs", pairs},
            {"tau", tau},       {"max_relay_load", max_relay_load},             {"kappa", kappa},
            {"violations", violations},             {"paths_valid", paths_valid}, {"delivered", delivered}};
  }
};

// Permutation instance, or, without perm, every node sends to a uniform target.
inline RoutingInstance make_instance(std::size_t n, bool perm, std::uint64_t seed) {
  if (perm) return RoutingInstance::permutation(n, seed);
  Rng rng(derive_seed({seed, 0x7061697273ULL}));
  std::vector<DemandPair> pairs;
  for (NodeId s = 0; s < n; ++s) pairs.push_back({s, static_cast<NodeId>(rng.below(n))});
  return RoutingInstance::from_pairs(std::move(pairs), n);
}

// generate -> level-zero embedding -> hierarchy -> route -> deliver, for one seed.
inline RouteRecord route_once(std::size_t n, std::size_t d, bool perm, const RoutingKnobs& knobs, std::uint64_t seed) {
  auto g = std::make_shared<const NetworkGraph>(generate({n, d, seed}));
  RoutingContext ctx(g, knobs.config(), seed);
  const RoutingInstance inst = make_instance(n, perm, seed);
  const PathSolution sol = route(inst, ctx);
  RouteRecord r;
  r.n = n;
  r.seed = seed;
  r.pairs = inst.pairs.size();
  r.congestion = sol.congestion;
  r.dilation = sol.dilation;
  r.levels = sol.levels;
  r.retries = sol.resamples;
  r.tau = ctx.tau();
  r.max_relay_load = sol.max_relay_load;
  r.paths_valid = sol.paths.size() == inst.pairs.size() && recount(*g, sol.paths) == PathMetrics{sol.congestion, sol.dilation};
  for (std::size_t i = 0; i < inst.pairs.size() && r.paths_valid; ++i)
    r.paths_valid = path_connects(*g, sol.paths[i], inst.pairs[i].s, inst.pairs[i].t);

  std::vector<std::vector<Word>> payloads;
  for (std::size_t i = 0; i < inst.pairs.size(); ++i) payloads.push_back({derive_seed({seed, 0x776f7264ULL, i})});
  DeliveryConfig dc;
  dc.seed = derive_seed({seed, 0x64656cULL});
  const DeliveryResult dr = deliver(*g, sol.paths, payloads, dc);
  r.rounds = dr.report.rounds_elapsed;
  r.kappa = dr.kappa_measured;
  r.violations = dr.report.violations;
  r.delivered = dr.delivered == payloads;
  return r;
}

inline int cmd_route(const GraphOptions& o, bool perm, const RoutingKnobs& knobs, std::ostream& out) {
  o.validate();
  knobs.config();
  int code = kOk;
  for (std::size_t i = 0; i < o.seeds; ++i) {
    const RouteRecord r = route_once(o.n, o.degree(), perm, knobs, o.seed_at(i));
    out << r.json().dump() << '\n';
    if (!r.ok()) code = kVerifyFailed;
  }
  return code;
}

// ---- simulate ----

struct SimulateRecord {
  nlohmann::ordered_json json;
  bool equal = false;
};

inline SimulateRecord simulate_once(const std::string& program, std::size_t n, std::size_t d, const ProgramParams& params,
                                    bool distribute, std::uint64_t seed) {
  const RegisteredProgram& reg = find_program(program);
  auto g = std::make_shared<const NetworkGraph>(generate({n, d, seed}));
  const ProgramInstance pi = reg.build(*g, params, seed);
  RoutingContext ctx(g, {}, seed);
  const auto ids = processor_identities(*g);
  const PramRun pr = run_pram(*pi.program, &ids);
  const SimulationResult sr = simulate(ctx, *pi.program);

  SimulateRecord rec;
  const bool oracle = pr.output == pi.expected;
  rec.equal = sr.memory == pr.memory && oracle;
  auto& j = rec.json;
  j["program"] = program;
  j["n"] = n;
  j["seed"] = seed;
  j["equal"] = rec.equal;
  j["memory_equal"] = sr.memory == pr.memory;
  j["oracle_equal"] = oracle;
  j["processors"] = pi.program->processor_count();
  j["memory_words"] = pi.program->memory_size();
  j["block_words"] = sr.layout.block_words;
  j["pram_rounds"] = sr.pram_rounds;
  j["network_rounds"] = sr.report.rounds_elapsed;
  j["setup_rounds"] = sr.setup.rounds_elapsed;
  j["max_round_cost"] = sr.max_round_cost;
  j["routing_calls"] = sr.routing_calls;
  j["fan_tree_sessions"] = sr.fan_tree_sessions();
  j["fantree_resamples"] = sr.fantree_resamples;
  j["max_kappa"] = sr.max_kappa;
  j["max_tree_kappa"] = sr.max_tree_kappa;
  j["violations"] = sr.report.violations;
  if (pi.mst) {
    const auto pairs = edge_pairs(sr.output);
    const bool same = pairs == pi.mst->pairs;
    j["mst_weight"] = same ? pi.mst->weight : pair_weight(*g, pi.weights, pairs);
    j["kruskal_weight"] = pi.mst->weight;
    j["mst_edges"] = pairs.size();
    if (distribute) {
      const OutputDistribution od = distribute_output_subgraph(ctx, sr.output);
      std::set<std::pair<NodeId, NodeId>> got;
      for (NodeId x = 0; x < n; ++x)
        for (NodeId y : od.incident[x]) got.insert({std::min(x, y), std::max(x, y)});
      const bool dist_ok = od.sort_matches && got == std::set<std::pair<NodeId, NodeId>>(pairs.begin(), pairs.end());
      j["distributed"] = dist_ok;
      j["distribution_rounds"] = od.report.rounds_elapsed;
      rec.equal = rec.equal && dist_ok;
      j["equal"] = rec.equal;
    }
  }
  if (sr.report.violations != 0) rec.equal = false;
  return rec;
}

inline int cmd_simulate(const GraphOptions& o, const std::string& program, const std::vector<std::string>& kv,
                        bool distribute, std::ostream& out) {
  o.validate();
  ProgramParams params;
  for (const auto& s : kv) {
    try {
      params.insert(parse_param(s));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  int code = kOk;
  for (std::size_t i = 0; i < o.seeds; ++i) {
    const SimulateRecord r = simulate_once(program, o.n, o.degree(), params, distribute, o.seed_at(i));
    out << r.json.dump() << '\n';
    if (!r.equal) code = kVerifyFailed;
  }
  return code;
}

// ---- growth ----

struct GrowthRow {
  std::size_t n = 0;
  double congestion = 0, dilation = 0, rounds = 0;
  std::size_t failures = 0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : (v[h - 1] + v[h]) / 2.0;
}

inline GrowthRow growth_row(std::size_t n, const std::string& d, std::size_t seeds, std::uint64_t seed0,
                            const RoutingKnobs& knobs) {
  GrowthRow row;
  row.n = n;
  std::vector<double> c, dl, r;
  for (std::size_t i = 0; i < seeds; ++i) {
    const RouteRecord rec = route_once(n, parse_degree(d, n), true, knobs, seed0 + i);
    c.push_back(static_cast<double>(rec.congestion));
    dl.push_back(static_cast<double>(rec.dilation));
    r.push_back(static_cast<double>(rec.rounds));
    if (!rec.ok()) ++row.failures;
  }
  row.congestion = median(c);
  row.dilation = median(dl);
  row.rounds = median(r);
  return row;
}

inline void write_growth_csv(std::ostream& os, const std::vector<GrowthRow>& rows) {
  os << "n,congestion,dilation,rounds\n";
  for (const auto& r : rows) os << r.n << ',' << r.congestion << ',' << r.dilation << ',' << r.rounds << '\n';
}

inline int cmd_growth(const std::vector<std::size_t>& grid, const std::string& d, std::size_t seeds, std::uint64_t seed0,
                      const RoutingKnobs& knobs, std::ostream& out) {
  if (grid.empty()) throw UsageError("--grid is empty");
  if (seeds == 0) throw UsageError("--seeds must be >= 1");
  for (auto n : grid) {
    if (n < 2) throw UsageError("grid sizes must be >= 2");
    parse_degree(d, n);
  }
  knobs.config();
  std::vector<GrowthRow> rows;
  int code = kOk;
  for (auto n : grid) {
    rows.push_back(growth_row(n, d, seeds, seed0, knobs));
    if (rows.back().failures) code = kVerifyFailed;
  }
  write_growth_csv(out, rows);
  return code;
}

}  // namespace congestlab::cli
