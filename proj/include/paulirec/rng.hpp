#pragma once

#include <cstdint>
#include <random>

namespace paulirec {

// splitmix64 step. All seed derivation goes through this so that derived
// seeds are identical across platforms and runs (std::hash is not).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  return splitmix64(s);
}

// Stable per-trial seed scheme: master -> stream -> cell -> trial.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t cell = 0, std::uint64_t trial = 0) {
  return mix_seed(mix_seed(mix_seed(master, stream), cell), trial);
}

// Stream tags keep the random draws of different pipeline stages independent
// even when they share (master, cell, trial).
namespace seed_stream {
inline constexpr std::uint64_t state = 1;
inline constexpr std::uint64_t op = 2;
inline constexpr std::uint64_t noise = 3;
inline constexpr std::uint64_t u2 = 4;
inline constexpr std::uint64_t rip_sampled = 5;
inline constexpr std::uint64_t rip_ascent = 6;
inline constexpr std::uint64_t lipschitz = 7;
inline constexpr std::uint64_t commuting = 8;
inline constexpr std::uint64_t nnq = 9;
}  // namespace seed_stream

inline std::mt19937_64 make_engine(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace paulirec
