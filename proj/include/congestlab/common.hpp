#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace congestlab {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;
using Word = std::uint64_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();
inline constexpr EdgeId kNoEdge = std::numeric_limits<EdgeId>::max();

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class ErrorKind {
  InvalidArgument,
  ParseError,
  BandwidthViolation,
  NonIncidentEdge,
  RoundLimitExceeded,
  DisconnectedGraph,
  NotConnected,
  BudgetExceeded,
  TauTooSmall,
  GraphMismatch,
  DegreeUnderflow,
  NoNeighborInTargetComponent,
  ComponentNotComplete,
  WidthExceeded,
  RelayLoadExceeded,
  RoundCapExceeded,
  AddressOutOfRange,
  OwnershipMiss,
  OutOfRange,
  RelayOverload,
  LengthExceedsMemory,
  MemoryCapExceeded,
  Disconnected,
  UnknownProgram,
};

constexpr std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::BandwidthViolation: return "BandwidthViolation";
    case ErrorKind::NonIncidentEdge: return "NonIncidentEdge";
    case ErrorKind::RoundLimitExceeded: return "RoundLimitExceeded";
    case ErrorKind::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorKind::NotConnected: return "NotConnected";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::TauTooSmall: return "TauTooSmall";
    case ErrorKind::GraphMismatch: return "GraphMismatch";
    case ErrorKind::DegreeUnderflow: return "DegreeUnderflow";
    case ErrorKind::NoNeighborInTargetComponent: return "NoNeighborInTargetComponent";
    case ErrorKind::ComponentNotComplete: return "ComponentNotComplete";
    case ErrorKind::WidthExceeded: return "WidthExceeded";
    case ErrorKind::RelayLoadExceeded: return "RelayLoadExceeded";
    case ErrorKind::RoundCapExceeded: return "RoundCapExceeded";
    case ErrorKind::AddressOutOfRange: return "AddressOutOfRange";
    case ErrorKind::OwnershipMiss: return "OwnershipMiss";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::RelayOverload: return "RelayOverload";
    case ErrorKind::LengthExceedsMemory: return "LengthExceedsMemory";
    case ErrorKind::MemoryCapExceeded: return "MemoryCapExceeded";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::UnknownProgram: return "UnknownProgram";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_name(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return error_name(kind_); }

 private:
  ErrorKind kind_;
};

// ---------------------------------------------------------------------------
// Deterministic randomness
// ---------------------------------------------------------------------------

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Folds a tuple of words into one seed. Order matters.
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

// SplitMix64 stream. Cheap to construct, so every node, walk and pair can own
// an independent stream derived from (global seed, identity).
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Rng(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept { return next(); }

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  bool coin() noexcept { return (next() >> 63) != 0; }

  double unit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Small integer helpers
// ---------------------------------------------------------------------------

// ceil(log2 x) for x >= 1; 0 for x <= 1.
constexpr unsigned ceil_log2(std::uint64_t x) noexcept {
  return x <= 1 ? 0U : static_cast<unsigned>(std::bit_width(x - 1));
}

constexpr std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) noexcept { return (a + b - 1) / b; }

}  // namespace congestlab
