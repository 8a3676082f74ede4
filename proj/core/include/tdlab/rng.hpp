#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace tdlab {

/// Mixes a list of integers into a single 64-bit seed (splitmix64 finalizer
/// chained over the inputs). Stable across platforms and compilers.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

/**
 * Random stream used for all sampling in the library.
 *
 * Wraps std::mt19937_64 and draws its own uniforms so that every sequence is
 * a pure function of the seed, independent of the standard library's
 * distribution implementations.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Requires n > 0.
  std::size_t uniform_index(std::size_t n);

  /// Index drawn with the given (nonnegative, summing to ~1) probabilities.
  /// Entries with zero probability are never returned.
  std::size_t categorical(std::span<const double> probabilities);

  /// `k` distinct indices from [0, n) in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tdlab
