#pragma once

#include <cmath>
#include <cstdint>

namespace pdet {

// splitmix64. The standard <random> distributions are implementation-defined,
// so everything that must reproduce across platforms draws from this directly.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return double(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Knuth multiplication method; the rates used here are all small.
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    double limit = std::exp(-mean);
    double p = 1.0;
    int k = 0;
    do {
      ++k;
      p *= next_double();
    } while (p > limit);
    return k - 1;
  }

 private:
  uint64_t state_;
};

// Derives an independent stream for (seed, a, b) so per-frame randomness does
// not depend on the order frames are visited.
inline uint64_t derive_stream(uint64_t seed, uint64_t a, uint64_t b) {
  SplitMix64 g0(seed);
  SplitMix64 g1(g0.next() ^ a);
  SplitMix64 g2(g1.next() ^ b);
  return g2.next();
}

}  // namespace pdet
