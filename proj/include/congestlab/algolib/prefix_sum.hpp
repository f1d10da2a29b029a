#pragma once

#include <string>

#include "congestlab/pramsim/program.hpp"

namespace congestlab {

// Hillis-Steele scan in place: processor i reads its own entry, then for
// s = 1, 2, 4, ... reads entry i - s and writes back its running sum.
// 1 + ceil(log2 len) rounds.
class PrefixSumProgram final : public PramProgram {
 public:
  PrefixSumProgram(std::vector<Word> input, std::size_t memory = 0)
      : input_(std::move(input)), memory_(memory == 0 ? std::max<std::size_t>(1, input_.size()) : memory) {
    if (input_.size() > memory_)
      throw Error(ErrorKind::LengthExceedsMemory, "length " + std::to_string(input_.size()) + " > memory " +
                                                      std::to_string(memory_));
  }

  std::size_t processor_count() const override { return input_.size(); }
  std::size_t round_count() const override { return input_.empty() ? 0 : 1 + ceil_log2(input_.size()); }
  std::size_t memory_size() const override { return memory_; }
  std::size_t local_words() const override { return 1; }
  std::pair<std::size_t, std::size_t> output_region() const override { return {0, input_.size()}; }
  std::vector<Word> input_tape() const override { return input_; }

  std::optional<std::uint64_t> read(std::size_t pid, std::size_t round, std::span<const Word>) const override {
    if (round == 0) return pid;
    const std::size_t s = std::size_t{1} << (round - 1);
    if (pid < s) return std::nullopt;
    return pid - s;
  }
  std::optional<WriteRequest> step(std::size_t pid, std::size_t round, std::span<Word> local,
                                   std::optional<Word> value) const override {
    if (round == 0) {
      local[0] = *value;
      return std::nullopt;
    }
    if (!value) return std::nullopt;
    local[0] += *value;
    return WriteRequest{pid, local[0]};
  }

 private:
  std::vector<Word> input_;
  std::size_t memory_;
};

inline std::vector<Word> prefix_sum_oracle(const std::vector<Word>& in) {
  std::vector<Word> out(in.size());
  Word acc = 0;
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = acc += in[i];
  return out;
}

}  // namespace congestlab
