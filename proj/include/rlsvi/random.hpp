#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rlsvi {

// Seeded random stream with platform-stable variates.
//
// The standard <random> distributions are implementation-defined, so seeded
// runs would differ between libstdc++ and libc++. Only the engine is taken
// from the standard library (std::mt19937_64 is bit-specified); every variate
// is produced by a fixed procedure:
//   uniform()     53 high bits of one engine output, scaled to [0, 1)
//   normal()      Box-Muller on two uniforms, second value cached
//   gamma(shape)  Marsaglia-Tsang, with the shape < 1 boost
//   index(n)      rejection sampling on engine outputs, exactly uniform
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Derives an independent stream from a list of integer keys by folding
  // them through SplitMix64. Used for (seed, agent, episode, purpose) keys.
  static Rng derive(std::initializer_list<std::uint64_t> keys);

  double uniform();
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  double gamma(double shape);
  double beta(double a, double b);
  bool bernoulli(double p) { return uniform() < p; }
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace rlsvi
