#pragma once

#include <cstdint>
#include <string_view>

namespace chronoqa {

// SplitMix64. Fully specified, so sequences are identical across standard
// libraries (std::uniform_int_distribution is not).
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

  // Uniform in [0, bound); bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  bool coin() { return (next() >> 63) != 0; }

 private:
  std::uint64_t state_;
};

std::uint64_t fnv1a64(std::string_view s);

// Derives an independent stream for (seed, key) pairs, e.g. per-item draws.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view key);

}  // namespace chronoqa
