#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace gecforge {

/// Seeded generator whose output sequence is identical on every platform.
/// The engine's sequence is fixed by the standard; the transforms below are
/// ours because std::*_distribution results are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t fnv1a64(std::string_view bytes);

std::uint64_t splitmix64(std::uint64_t x);

/// Stable per-item seed: hash of (seed, key). Independent of process,
/// worker count and iteration order.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

/// Indices [0, n) in a seeded random order; the first k entries are a
/// uniform sample without replacement of size k.
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

}  // namespace gecforge
