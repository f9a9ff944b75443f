#pragma once

#include <cstdint>

namespace pricepanel {

// xoshiro256++ seeded via splitmix64. Self-contained so that streams are
// bit-identical across platforms and standard-library versions, which the
// seed-determinism guarantees depend on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 random bits.
  double uniform();

  // Uniform integer in [0, n).
  std::uint64_t uniform_below(std::uint64_t n);

  // Standard normal via Box-Muller (one value per call).
  double normal();

 private:
  std::uint64_t s_[4];
};

// Stable key mixing for counter-based substreams: the draw for entity (a, b)
// never depends on how many draws other entities consumed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                       std::uint64_t c = 0);

}  // namespace pricepanel
