#pragma once

#include <limits>

#include "congestlab/pramsim/program.hpp"

namespace congestlab {

// Bitonic sorting network, one compare-exchange stage per round. Input is
// padded to a power of two with max-word sentinels; processor i holds entry
// i in local state, reads its stage partner and writes its own new entry.
class SortProgram final : public PramProgram {
 public:
  explicit SortProgram(std::vector<Word> input) : input_(std::move(input)) {
    padded_ = std::size_t{1} << ceil_log2(std::max<std::size_t>(1, input_.size()));
    for (std::size_t k = 2; k <= padded_; k *= 2)
      for (std::size_t j = k / 2; j > 0; j /= 2) stages_.push_back({k, j});
  }

  std::size_t length() const noexcept { return input_.size(); }
  std::size_t processor_count() const override { return input_.empty() ? 0 : padded_; }
  std::size_t round_count() const override { return input_.empty() ? 0 : 1 + stages_.size(); }
  std::size_t memory_size() const override { return padded_; }
  std::size_t local_words() const override { return 1; }
  std::pair<std::size_t, std::size_t> output_region() const override { return {0, input_.size()}; }
  std::vector<Word> input_tape() const override {
    std::vector<Word> t = input_;
    t.resize(padded_, std::numeric_limits<Word>::max());
    return t;
  }

  std::optional<std::uint64_t> read(std::size_t pid, std::size_t round, std::span<const Word>) const override {
    if (round == 0) return pid;
    return pid ^ stages_[round - 1].second;
  }
  std::optional<WriteRequest> step(std::size_t pid, std::size_t round, std::span<Word> local,
                                   std::optional<Word> value) const override {
    if (round == 0) {
      local[0] = *value;
      return std::nullopt;
    }
    const auto [k, j] = stages_[round - 1];
    const bool ascending = (pid & k) == 0;
    const bool lower = (pid & j) == 0;
    const Word mine = local[0], other = *value;
    local[0] = (lower == ascending) ? std::min(mine, other) : std::max(mine, other);
    if (local[0] == mine) return std::nullopt;
    return WriteRequest{pid, local[0]};
  }

 private:
  std::vector<Word> input_;
  std::size_t padded_ = 1;
  std::vector<std::pair<std::size_t, std::size_t>> stages_;  // (block size k, distance j)
};

}  // namespace congestlab
