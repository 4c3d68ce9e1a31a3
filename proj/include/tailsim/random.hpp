#pragma once

#include <cstdint>

namespace tailsim {

// Splitmix64 generator (Steele, Lea & Flood; Vigna's fixed-increment form).
// Chosen because it is trivially seedable, splittable into independent
// substreams, and produces identical output on every platform, which the
// CSV reproducibility contract relies on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in the open interval (0, 1): 53-bit mantissa offset by
  /// half an ulp so neither endpoint can be returned.
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Derives an independent substream from the *root seed* (not the current
  /// state), so split(k) is the same generator no matter how much of this
  /// stream has already been consumed. Used to give every draw its own
  /// stream: results are then independent of worker count and draw order.
  Rng split(std::uint64_t stream) const {
    return Rng(mix(seed_ + mix(stream + 0x9E3779B97F4A7C15ull)));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace tailsim
