#pragma once

#include <algorithm>
#include <string>

#include "congestlab/pramsim/program.hpp"

namespace congestlab {

struct PramRun {
  std::vector<Word> memory;
  std::vector<Word> output;
  std::size_t rounds = 0;
  std::size_t reads = 0;
  std::size_t writes = 0;
  std::size_t write_conflicts = 0;  // writes that lost arbitration
};

namespace detail {

inline void check_address(std::uint64_t addr, std::size_t memory, std::size_t pid, std::size_t round) {
  if (addr >= memory)
    throw Error(ErrorKind::AddressOutOfRange, "processor " + std::to_string(pid) + " round " + std::to_string(round) +
                                                  " address " + std::to_string(addr) + " >= " + std::to_string(memory));
}

inline std::vector<Word> initial_memory(const PramProgram& prog) {
  std::vector<Word> mem(prog.memory_size(), 0);
  const std::vector<Word> tape = prog.input_tape();
  if (tape.size() > mem.size()) throw Error(ErrorKind::InvalidArgument, "input tape larger than memory");
  std::copy(tape.begin(), tape.end(), mem.begin());
  return mem;
}

}  // namespace detail

// Sequential reference executor over a flat memory. `ids` gives processor
// identities for graph-input programs; without it only pid is set.
inline PramRun run_pram(const PramProgram& prog, const std::vector<ProcessorIdentity>* ids = nullptr) {
  const std::size_t p = prog.processor_count();
  const std::size_t lw = prog.local_words();
  if (ids && ids->size() < p) throw Error(ErrorKind::InvalidArgument, "fewer identities than processors");
  PramRun out;
  out.memory = detail::initial_memory(prog);
  std::vector<Word> local(p * lw, 0);
  for (std::size_t pid = 0; pid < p; ++pid)
    prog.init(pid, ids ? (*ids)[pid] : ProcessorIdentity{}, std::span<Word>(local.data() + pid * lw, lw));

  std::vector<std::optional<Word>> values(p);
  std::vector<std::pair<std::uint64_t, std::pair<std::size_t, Word>>> writes;  // addr -> (pid, value)
  for (std::size_t r = 0; r < prog.round_count(); ++r) {
    for (std::size_t pid = 0; pid < p; ++pid) {
      values[pid].reset();
      if (auto a = prog.read(pid, r, std::span<const Word>(local.data() + pid * lw, lw))) {
        detail::check_address(*a, out.memory.size(), pid, r);
        values[pid] = out.memory[*a];
        ++out.reads;
      }
    }
    writes.clear();
    for (std::size_t pid = 0; pid < p; ++pid) {
      if (auto w = prog.step(pid, r, std::span<Word>(local.data() + pid * lw, lw), values[pid])) {
        detail::check_address(w->addr, out.memory.size(), pid, r);
        writes.push_back({w->addr, {pid, w->value}});
      }
    }
    // Processors were visited in pid order, so the first write per address wins.
    std::stable_sort(writes.begin(), writes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < writes.size(); ++i) {
      if (i > 0 && writes[i].first == writes[i - 1].first) {
        ++out.write_conflicts;
        continue;
      }
      out.memory[writes[i].first] = writes[i].second.second;
    }
    out.writes += writes.size();
    ++out.rounds;
  }
  const auto [b, e] = prog.output_region();
  out.output.assign(out.memory.begin() + static_cast<std::ptrdiff_t>(b), out.memory.begin() + static_cast<std::ptrdiff_t>(e));
  return out;
}

}  // namespace congestlab
