#pragma once

#include <cassert>
#include <cstdint>

namespace curvecount {

// splitmix64 generator.  All randomness in the library flows through this
// class so every run is reproducible from a single seed on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform draw from [0, bound) by masked rejection; unbiased and
  // platform-independent (unlike std::uniform_int_distribution).
  std::uint64_t below(std::uint64_t bound) {
    assert(bound > 0);
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      std::uint64_t v = next() & mask;
      if (v < bound) return v;
    }
  }

  // Child stream identified by `tag`.  Depends only on the original seed and
  // the tag, never on how much of this stream was already consumed, so
  // parallel workers can fork deterministically.
  Rng fork(std::uint64_t tag) const {
    Rng child(seed_ ^ (0x9e3779b97f4a7c15ull * (tag + 0x51ed2701a34fbb01ull)));
    child.next();
    return child;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace curvecount
