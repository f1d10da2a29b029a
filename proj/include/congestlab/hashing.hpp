#pragma once

#include <cstdint>
#include <vector>

#include "congestlab/common.hpp"

namespace congestlab {

// Polynomial hash over GF(p), p = 2^61 - 1. A uniformly random polynomial of
// degree k-1 is a k-wise independent family on [0, p).
class PolynomialHash {
 public:
  static constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

  PolynomialHash() = default;

  // Coefficients are drawn from a single broadcast seed, so every node that
  // knows the seed evaluates the same function.
  static PolynomialHash from_seed(std::uint64_t seed, unsigned k) {
    PolynomialHash h;
    Rng rng(seed);
    h.coeffs_.resize(k == 0 ? 1 : k);
    for (auto& c : h.coeffs_) c = rng.next() % kPrime;
    return h;
  }

  unsigned independence() const noexcept { return static_cast<unsigned>(coeffs_.size()); }

  std::uint64_t operator()(std::uint64_t x) const noexcept {
    const std::uint64_t xr = x % kPrime;
    std::uint64_t acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = add(mul(acc, xr), *it);
    return acc;
  }

  // Maps into [0, range) by scaling, which keeps the family's independence.
  std::uint64_t bucket(std::uint64_t x, std::uint64_t range) const noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)(x)) * range) >> 61);
  }

 private:
  static std::uint64_t mul(std::uint64_t a, std::uint64_t b) noexcept {
    const unsigned __int128 prod = static_cast<unsigned __int128>(a) * b;
    std::uint64_t lo = static_cast<std::uint64_t>(prod & kPrime);
    std::uint64_t hi = static_cast<std::uint64_t>(prod >> 61);
    return add(lo, hi);
  }
  static std::uint64_t add(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t s = a + b;
    s = (s & kPrime) + (s >> 61);
    return s >= kPrime ? s - kPrime : s;
  }

  std::vector<std::uint64_t> coeffs_{0};
};

enum class PartitionHashKind { Prf, KWise };

// Seeded function used for set membership and connection points. Either a
// splitmix-based pseudorandom function or an exact k-wise independent family.
class SeededHash {
 public:
  SeededHash() = default;
  SeededHash(std::uint64_t seed, PartitionHashKind kind, unsigned k = 8)
      : seed_(seed), kind_(kind) {
    if (kind_ == PartitionHashKind::KWise) poly_ = PolynomialHash::from_seed(seed, k);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  PartitionHashKind kind() const noexcept { return kind_; }

  std::uint64_t bucket(std::uint64_t x, std::uint64_t range) const noexcept {
    if (kind_ == PartitionHashKind::KWise) return poly_.bucket(x, range);
    const std::uint64_t h = splitmix64(seed_ ^ splitmix64(x));
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(h) * range) >> 64);
  }

 private:
  std::uint64_t seed_ = 0;
  PartitionHashKind kind_ = PartitionHashKind::Prf;
  PolynomialHash poly_;
};

}  // namespace congestlab
