#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "congestlab/algolib/boruvka.hpp"
#include "congestlab/algolib/prefix_sum.hpp"
#include "congestlab/algolib/sort.hpp"

namespace congestlab {

using ProgramParams = std::map<std::string, std::string>;

// A built program together with what its sequential oracle expects.
struct ProgramInstance {
  std::unique_ptr<PramProgram> program;
  std::vector<Word> expected;  // oracle output tape
  bool subgraph_output = false;
  std::vector<Word> weights;  // per edge, MST only
  std::optional<MstOracle> mst;
};

struct RegisteredProgram {
  std::string name;
  std::string params;  // accepted keys, for help text
  std::function<ProgramInstance(const NetworkGraph&, const ProgramParams&, std::uint64_t seed)> build;
};

// "key=value" -> (key, value); throws InvalidArgument on anything else.
inline std::pair<std::string, std::string> parse_param(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw Error(ErrorKind::InvalidArgument, "parameter '" + kv + "' is not key=value");
  return {kv.substr(0, eq), kv.substr(eq + 1)};
}

namespace detail {

inline std::size_t param_size(const ProgramParams& ps, const std::string& key, std::size_t fallback) {
  auto it = ps.find(key);
  if (it == ps.end()) return fallback;
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != it->second.size() || it->second.empty() || it->second[0] == '-')
    throw Error(ErrorKind::InvalidArgument, "parameter " + key + "=" + it->second + " is not a count");
  return static_cast<std::size_t>(v);
}

inline void check_keys(const ProgramParams& ps, std::initializer_list<const char*> allowed) {
  for (const auto& [k, v] : ps)
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
      throw Error(ErrorKind::InvalidArgument, "unknown parameter '" + k + "'");
}

inline std::vector<Word> random_words(std::size_t len, Word range, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Word> w(len);
  for (auto& x : w) x = rng.below(std::max<Word>(1, range));
  return w;
}

}  // namespace detail

inline const std::vector<RegisteredProgram>& program_registry() {
  static const std::vector<RegisteredProgram> reg{
      {"prefix_sum", "len=<words, default min(1024, 2m)> max=<value range, default 2^20>",
       [](const NetworkGraph& g, const ProgramParams& ps, std::uint64_t seed) {
         detail::check_keys(ps, {"len", "max"});
         const std::size_t len = detail::param_size(ps, "len", std::min<std::size_t>(1024, g.volume()));
         const auto in = detail::random_words(len, detail::param_size(ps, "max", 1U << 20), derive_seed({seed, 0x707366ULL}));
         ProgramInstance pi;
         pi.expected = prefix_sum_oracle(in);
         pi.program = std::make_unique<PrefixSumProgram>(in);
         return pi;
       }},
      {"sort", "len=<words, default min(1024, 2m)> max=<value range, default len/2>",
       [](const NetworkGraph& g, const ProgramParams& ps, std::uint64_t seed) {
         detail::check_keys(ps, {"len", "max"});
         const std::size_t len = detail::param_size(ps, "len", std::min<std::size_t>(1024, g.volume()));
         const auto in = detail::random_words(len, detail::param_size(ps, "max", std::max<std::size_t>(1, len / 2)),
                                              derive_seed({seed, 0x736f7274ULL}));
         ProgramInstance pi;
         pi.expected = in;
         std::sort(pi.expected.begin(), pi.expected.end());
         pi.program = std::make_unique<SortProgram>(in);
         return pi;
       }},
      {"boruvka_mst", "maxw=<weight range, default 2^20>",
       [](const NetworkGraph& g, const ProgramParams& ps, std::uint64_t seed) {
         detail::check_keys(ps, {"maxw"});
         ProgramInstance pi;
         pi.subgraph_output = true;
         pi.weights = random_weights(g, seed, std::max<std::size_t>(1, detail::param_size(ps, "maxw", 1U << 20)));
         pi.mst = kruskal(g, pi.weights);
         // The program compacts marked edges in weight order, as Kruskal accepts them.
         for (EdgeId e : pi.mst->edges) {
           const Edge& ed = g.edge(e);
           pi.expected.insert(pi.expected.end(), {std::min(ed.u, ed.v), std::max(ed.u, ed.v)});
         }
         pi.program = std::make_unique<BoruvkaProgram>(g, pi.weights);
         return pi;
       }},
  };
  return reg;
}

inline std::string registry_listing() {
  std::string s;
  for (const auto& r : program_registry()) s += "  " + r.name + "  " + r.params + "\n";
  return s;
}

inline const RegisteredProgram& find_program(const std::string& name) {
  for (const auto& r : program_registry())
    if (r.name == name) return r;
  throw Error(ErrorKind::UnknownProgram, "unknown program '" + name + "'; registered:\n" + registry_listing());
}

}  // namespace congestlab
