#pragma once

#include <cstdint>
#include <random>

namespace osilab {

struct RngSeed {
  std::uint64_t value = 0;

  friend bool operator==(RngSeed, RngSeed) = default;
};

/// SplitMix64 finalizer. Fixed and published so seed streams are stable
/// across releases.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for trial `index` under `master`. Independent of scheduling, so a
/// trial list is the same whether it ran on one thread or many.
constexpr RngSeed derive_seed(RngSeed master, std::uint64_t index) noexcept {
  return RngSeed{mix64(mix64(master.value) ^ mix64(index + 0x632be59bd9b4e019ULL))};
}

using Engine = std::mt19937_64;

inline Engine make_engine(RngSeed seed) { return Engine(mix64(seed.value)); }

}  // namespace osilab
