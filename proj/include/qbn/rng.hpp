#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace qbn {

// Seedable, splittable random source. Child streams are derived from the
// construction seed and a stream id only, so they do not depend on how many
// values the parent has already produced.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  Rng split(std::uint64_t stream) const;

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Index drawn with probability proportional to weights[i].
  std::size_t categorical(std::span<const double> weights);
  double gamma(double shape);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace qbn
