#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace fsmc {

/// Seeded engine used everywhere randomness enters the library. The raw seed
/// is passed through splitmix64 first so that consecutive seeds (base + i)
/// start from well-separated engine states.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Uniform on [0, 1) with 53 random bits. Bit-exact across standard
  /// libraries, unlike std::uniform_real_distribution.
  double uniform();

  /// Index i drawn with probability weights[i]; weights must sum to ~1.
  std::size_t categorical(std::span<const double> weights);

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace fsmc
