#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "congestlab/netcore/graph.hpp"

namespace congestlab {

// What a processor knows about itself before round 0. For graph-input
// programs processor p is the virtual node (v, j) of rank p; the fields
// describe that edge slot. Programs on plain arrays see only pid.
struct ProcessorIdentity {
  NodeId vertex = kNoNode;
  std::uint32_t slot = 0;
  NodeId neighbor = kNoNode;
  std::uint32_t degree = 0;
  EdgeId edge = kNoEdge;
};

struct WriteRequest {
  std::uint64_t addr;
  Word value;
  friend bool operator==(const WriteRequest&, const WriteRequest&) = default;
};

// A CRCW PRAM program. Each round every processor may issue one read, sees
// its value (from the memory as it was at the start of the round), updates
// its local words and may issue one write. Concurrent writes to one address
// resolve to the lowest processor id.
class PramProgram {
 public:
  virtual ~PramProgram() = default;

  virtual std::size_t processor_count() const = 0;
  virtual std::size_t round_count() const = 0;
  virtual std::size_t memory_size() const = 0;
  virtual std::size_t local_words() const { return 4; }
  // [begin, end) of the output tape inside memory.
  virtual std::pair<std::size_t, std::size_t> output_region() const = 0;
  // Input tape, placed at address 0; the rest of memory starts zeroed.
  virtual std::vector<Word> input_tape() const = 0;

  virtual void init(std::size_t /*pid*/, const ProcessorIdentity& /*id*/, std::span<Word> /*local*/) const {}
  virtual std::optional<std::uint64_t> read(std::size_t pid, std::size_t round, std::span<const Word> local) const = 0;
  virtual std::optional<WriteRequest> step(std::size_t pid, std::size_t round, std::span<Word> local,
                                           std::optional<Word> value) const = 0;
};

// Identities of the 2m processors of a graph-input program, by rank.
inline std::vector<ProcessorIdentity> processor_identities(const NetworkGraph& g) {
  std::vector<ProcessorIdentity> ids;
  ids.reserve(g.volume());
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const auto sl = g.slots(v);
    for (std::uint32_t j = 0; j < sl.size(); ++j)
      ids.push_back({v, j, g.other_end(sl[j], v), static_cast<std::uint32_t>(sl.size()), sl[j]});
  }
  return ids;
}

// Adjacency-list input tape: an index array of n entries (address of each
// vertex record), then per vertex "deg(v), neighbor_1, ..., neighbor_deg".
inline std::vector<Word> adjacency_tape(const NetworkGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<Word> tape(n);
  for (NodeId v = 0; v < n; ++v) {
    tape[v] = tape.size();
    tape.push_back(g.degree(v));
    for (EdgeId e : g.slots(v)) tape.push_back(g.other_end(e, v));
  }
  return tape;
}

}  // namespace congestlab
