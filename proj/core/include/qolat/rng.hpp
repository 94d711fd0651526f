#pragma once

#include <cstdint>
#include <random>

namespace qolat {

// Independent engine for stream `stream` of master seed `seed`; trajectory i
// of an ensemble always draws from stream i.
inline std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

// Uniform double in the open interval (0, 1), identical on every platform.
inline double uniform_open(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace qolat
