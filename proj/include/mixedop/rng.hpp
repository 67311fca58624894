#pragma once

#include <cstdint>
#include <random>

namespace mixedop {

/// Independent, reproducible stream `stream` of a run seeded with `seed`.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x6d6f7073u};
  return std::mt19937_64(seq);
}

}  // namespace mixedop
