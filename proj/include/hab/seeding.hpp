#pragma once

#include <cstdint>

namespace hab {

/// SplitMix64 step: advances `state` and returns the next output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of the `index`-th member of the stream rooted at `root`.
/// Independent of evaluation order, so parallel consumers agree.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t state = root ^ (0xD1B54A32D192ED03ULL * (index + 1));
  splitmix64(state);
  return splitmix64(state);
}

}  // namespace hab
