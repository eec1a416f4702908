#pragma once

#include <cstdint>

#include "tamper/objective.hpp"
#include "tamper/rng.hpp"
#include "tamper/space.hpp"

namespace tamper {

/// Number of random continuations per conditional-mean estimate:
/// ceil(-12 * (ln(g/2) + ln(ln(1+g)) - ln(-ln(g/2))) / g^2), floored at 1.
/// Never exceeds ceil(24/g^3).
uint64_t gain_sample_count(double gamma);

/// Number of candidate blocks per max-gain estimate:
/// ceil(-ln(g/2) / ln(1+g)), floored at 1. Never exceeds ceil(1/g^2).
uint64_t max_candidate_count(double gamma);

/// Accuracy parameter gamma plus the derived sample counts.
struct EstimatorParams {
  double gamma = 0.0;
  uint64_t k_gain = 0;
  uint64_t k_max = 0;

  static EstimatorParams from_gamma(double gamma) {
    return EstimatorParams{gamma, gain_sample_count(gamma),
                           max_candidate_count(gamma)};
  }
};

/// Empirical conditional mean of the objective given a fixed prefix, over k
/// fresh continuations. Consumes exactly k objective calls.
double estimate_avg(const ProductSpace& space, const Objective& objective,
                    Prefix prefix, uint64_t k, RandomStream& rng);

/// Estimated gain of the last block of `prefix`: the difference of two
/// independent empirical means (k_gain continuations each, so the second
/// family resamples the last block too). Consumes exactly 2*k_gain calls.
double estimate_gain(const ProductSpace& space, const Objective& objective,
                     Prefix prefix, const EstimatorParams& params,
                     RandomStream& rng);

struct GainEstimate {
  double gain;
  Value block;
};

/// Draws k_max candidate blocks i.i.d. from the next block's marginal,
/// estimates each candidate's gain with fresh randomness, and returns the
/// max estimate with its lowest-index argmax candidate. Consumes exactly
/// 2*k_gain*k_max objective calls.
GainEstimate estimate_max_gain(const ProductSpace& space,
                               const Objective& objective, Prefix prefix,
                               const EstimatorParams& params,
                               RandomStream& rng);

}  // namespace tamper
