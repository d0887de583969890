// Counter-based splittable random streams. Every sampler in the library is a
// pure function of a SeedSpec, so replications can fan out across stream ids
// and still reproduce bit-for-bit.
#pragma once

#include <cmath>
#include <cstdint>

namespace bipstab {

struct SeedSpec {
  std::uint64_t root_seed = 0;
  std::uint64_t stream_id = 0;

  // Derive a child stream; distinct offsets give statistically independent
  // streams under the same root.
  SeedSpec stream(std::uint64_t offset) const {
    return SeedSpec{root_seed, stream_id * 0x10001ull + offset + 1};
  }
};

// SplitMix64-style counter generator: output k is a hash of (base + k * gamma),
// so the sequence is a pure function of the seed and the counter.
class CounterRng {
 public:
  explicit CounterRng(SeedSpec spec)
      : base_(mix(spec.root_seed + kGamma) ^ mix((spec.stream_id + 1) * kGamma)) {}

  std::uint64_t next_u64() { return mix(base_ + (++counter_) * kGamma); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1], safe as a log argument.
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; two uniforms per normal draw.
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  static constexpr double kPi = 3.14159265358979323846;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace bipstab
