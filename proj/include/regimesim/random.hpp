#pragma once

#include <cstdint>
#include <random>

namespace regimesim {

using Rng = std::mt19937_64;

// Stream tags used to split one experiment seed into independent generators.
enum class Stream : std::uint64_t {
  Regime = 1,
  Diffusion = 2,
  Agent = 3,
  Trial = 4,
  Day = 5,
  Oracle = 6,
  InitialRegime = 7,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seed for (base, stream, index). Distinct tuples give statistically
// independent generators; the mapping is fixed across platforms.
constexpr std::uint64_t derive_seed(std::uint64_t base, Stream stream,
                                    std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  return splitmix64(h ^ (index * 0xd6e8feb86659fd93ULL));
}

inline Rng make_rng(std::uint64_t base, Stream stream, std::uint64_t index = 0) {
  return Rng{derive_seed(base, stream, index)};
}

}  // namespace regimesim
