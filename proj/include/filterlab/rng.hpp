#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace filterlab {

std::uint64_t splitmix64(std::uint64_t x);

/// Seeded generator. Children derived by split() depend only on (seed, key),
/// never on how much the parent has been used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0,1) with 53 bits.
  double uniform();
  /// Uniform on {0,...,n-1}; n > 0.
  std::size_t uniform_index(std::size_t n);
  /// Draw from a (possibly unnormalized) nonnegative weight vector.
  std::size_t categorical(std::span<const double> weights);
  bool bernoulli(double p) { return uniform() < p; }

  Rng split(std::uint64_t key) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace filterlab
