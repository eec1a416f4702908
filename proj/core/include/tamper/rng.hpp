#pragma once

#include <cstdint>

namespace tamper {

namespace detail {

inline constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline constexpr uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based pseudo-random stream (SplitMix64 core): the i-th output is
/// mix(state0 + i*golden), so streams derived from distinct keys are
/// independent and a stream can be replayed from its construction arguments
/// alone. One stream per (seed, purpose, trial, step) keeps independent
/// trials reproducible regardless of scheduling.
class RandomStream {
 public:
  explicit RandomStream(uint64_t state0 = 0) : state_(state0) {}

  /// Derives a stream key from a master seed plus up to three context values.
  static RandomStream derive(uint64_t seed, uint64_t tag, uint64_t a = 0,
                             uint64_t b = 0) {
    uint64_t h = detail::mix64(seed ^ detail::kGolden);
    h = detail::mix64(h ^ (tag + detail::kGolden));
    h = detail::mix64(h ^ (a + 2 * detail::kGolden));
    h = detail::mix64(h ^ (b + 3 * detail::kGolden));
    return RandomStream(h);
  }

  uint64_t next_u64() {
    state_ += detail::kGolden;
    return detail::mix64(state_);
  }

  /// Uniform double in [0, 1).
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  uint32_t next_bit() { return static_cast<uint32_t>(next_u64() >> 63); }

  /// Unbiased uniform integer in [0, n). Lemire's multiply-shift with
  /// rejection; n must be nonzero.
  uint32_t next_below(uint32_t n) {
    uint64_t x = next_u64() & 0xFFFFFFFFULL;
    uint64_t m = x * n;
    uint32_t lo = static_cast<uint32_t>(m);
    if (lo < n) {
      uint32_t floor = (0u - n) % n;
      while (lo < floor) {
        x = next_u64() & 0xFFFFFFFFULL;
        m = x * n;
        lo = static_cast<uint32_t>(m);
      }
    }
    return static_cast<uint32_t>(m >> 32);
  }

  uint64_t state() const { return state_; }
  /// Bulk-skip: equivalent to k next_u64() calls left unread. Bulk samplers
  /// use the counter form out = mix(state + j*golden) directly.
  void skip(uint64_t k) { state_ += k * detail::kGolden; }

 private:
  uint64_t state_;
};

/// Stream purposes; kept distinct so no two uses of the same master seed
/// ever read the same underlying sequence.
namespace stream_tag {
inline constexpr uint64_t kTrial = 1;        // one attack trial
inline constexpr uint64_t kMuEstimate = 2;   // initial-mean estimation
inline constexpr uint64_t kFreshSample = 3;  // fresh instance draws
inline constexpr uint64_t kTestData = 4;     // risk-estimator test sets
inline constexpr uint64_t kSelfTest = 5;     // test-suite local streams
}  // namespace stream_tag

}  // namespace tamper
