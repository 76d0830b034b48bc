#ifndef CRASHSEARCH_RNG_HPP
#define CRASHSEARCH_RNG_HPP

#include <cstdint>

namespace crashsearch {

/// SplitMix64. One 64-bit word of state, trivially serializable, and
/// splittable: a child stream seeded from next() is independent of the
/// parent's continuation. No platform generators anywhere in the engine.
class SplitMix64 {
 public:
  SplitMix64() = default;
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform integer in [0, n). n must be positive.
  uint64_t uniform_int(uint64_t n) { return next() % n; }

  /// Uniform integer in [lo, hi] inclusive.
  int64_t uniform_range(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(uniform_int(static_cast<uint64_t>(hi - lo + 1)));
  }

  /// Derives an independent child generator.
  SplitMix64 split() { return SplitMix64(next()); }

  uint64_t state() const { return state_; }
  void set_state(uint64_t s) { state_ = s; }

  bool operator==(const SplitMix64& o) const { return state_ == o.state_; }

 private:
  uint64_t state_ = 0;
};

} // namespace crashsearch

#endif // CRASHSEARCH_RNG_HPP
