#pragma once

#include <cstdint>
#include <random>

namespace arboreal {

// All seeded randomness in the library flows through std::mt19937_64 plus the
// two helpers below, so streams are bit-identical across platforms (the
// standard pins the engine; it does not pin the distributions).

inline std::uint64_t rng_below(std::mt19937_64& rng, std::uint64_t n) {
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    std::uint64_t threshold = (-n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(rng()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

inline double rng_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace arboreal
