#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ecoap {

using Rng = std::mt19937_64;

/// splitmix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a parent seed and a stream index.
///
///   derive(parent, i) = splitmix64(splitmix64(parent) + i)
///
/// For a fixed parent the map i -> child is injective: addition modulo 2^64
/// and splitmix64 are both bijections. Children never depend on call order,
/// so parallel callers can derive their streams independently.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(parent) + index);
}

/// Stream ids used inside one pipeline run. Keeping them named avoids two
/// stages accidentally sharing a random stream.
enum class Stream : std::uint64_t {
  ApLayout = 1,
  Zones = 2,
  Ues = 3,
  Shadowing = 4,
  Samples = 5,
};

inline std::uint64_t derive_seed(std::uint64_t parent, Stream stream) noexcept {
  return derive_seed(parent, static_cast<std::uint64_t>(stream));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// FNV-1a 64-bit hash, used for config fingerprints embedded in outputs.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace ecoap
