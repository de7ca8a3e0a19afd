#pragma once

#include <cstdint>
#include <string_view>

namespace erpm {

// Counter-based generator: every draw is a pure function of (key, counter),
// so values can be produced in any order or in parallel and stay identical.
// Bits come from the SplitMix64 finalizer applied to a key/counter mix;
// normals use the cosine branch of Box-Muller on two 53-bit uniforms.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t bits(std::uint64_t counter) const;
  // Uniform in (0, 1].
  double uniform(std::uint64_t counter) const;
  // Standard normal.
  double normal(std::uint64_t counter) const;

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t x);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view s);

// Seed for a named pipeline stage derived from the top-level seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage);
// Seed for an indexed item (e.g. frame t) within a stage.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace erpm
