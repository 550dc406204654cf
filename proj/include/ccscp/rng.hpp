#pragma once

// Counter-based random numbers: every draw is a pure function of
// (key, counter), so sample streams can be split into shards and merged in any
// order without changing results.

#include <cstdint>

namespace ccscp::rng {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent key for sub-stream `index` of `seed`.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t draw(std::uint64_t key, std::uint64_t counter) noexcept {
  return mix64(key ^ mix64(counter));
}

/// Uniform on (0, 1]; never returns zero so it is safe under log().
constexpr double uniform_open_closed(std::uint64_t bits) noexcept {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Uniform on [0, 1).
constexpr double uniform_closed_open(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace ccscp::rng
