#include "tamper/estimator.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "tamper/exact.hpp"

namespace tamper {
namespace {

TEST(SampleCounts, FrozenFormulaValues) {
  EXPECT_EQ(gain_sample_count(0.1), 7733u);
  EXPECT_EQ(gain_sample_count(0.5), 126u);
  EXPECT_EQ(max_candidate_count(0.1), 32u);
  EXPECT_EQ(max_candidate_count(0.5), 4u);
  EXPECT_EQ(gain_sample_count(0.05), 38470u);
  EXPECT_EQ(max_candidate_count(0.05), 76u);
}

TEST(SampleCounts, CeilingCaps) {
  for (double g : {0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 0.99}) {
    EXPECT_LE(gain_sample_count(g),
              static_cast<uint64_t>(std::ceil(24.0 / (g * g * g))))
        << g;
    EXPECT_LE(max_candidate_count(g),
              static_cast<uint64_t>(std::ceil(1.0 / (g * g))))
        << g;
    EXPECT_GE(gain_sample_count(g), 1u);
    EXPECT_GE(max_candidate_count(g), 1u);
  }
}

TEST(SampleCounts, GammaRangeChecked) {
  EXPECT_THROW(gain_sample_count(0.0), std::invalid_argument);
  EXPECT_THROW(gain_sample_count(1.0), std::invalid_argument);
  EXPECT_THROW(max_candidate_count(-0.1), std::invalid_argument);
  EXPECT_THROW(EstimatorParams::from_gamma(1.5), std::invalid_argument);
}

TEST(EstimateGain, ConstantFunctionIsExactlyZero) {
  auto space = ProductSpace::uniform_bits(6);
  auto one = make_const(true);
  auto params = EstimatorParams::from_gamma(0.3);
  RandomStream rng(1);
  Tuple prefix{1, 0};
  for (int i = 0; i < 20; ++i)
    EXPECT_DOUBLE_EQ(estimate_gain(space, *one, prefix, params, rng), 0.0);
}

TEST(EstimateGain, ConsumesExactlyTwoKGainCalls) {
  auto space = ProductSpace::uniform_bits(6);
  auto f = make_majority(6);
  auto params = EstimatorParams::from_gamma(0.2);
  RandomStream rng(2);
  Tuple prefix{1};
  uint64_t before = f->call_count();
  estimate_gain(space, *f, prefix, params, rng);
  EXPECT_EQ(f->call_count() - before, 2 * params.k_gain);
}

TEST(EstimateGain, RequiresNonEmptyPrefix) {
  auto space = ProductSpace::uniform_bits(4);
  auto f = make_majority(4);
  auto params = EstimatorParams::from_gamma(0.2);
  RandomStream rng(3);
  EXPECT_THROW(estimate_gain(space, *f, {}, params, rng),
               std::invalid_argument);
}

TEST(EstimateGain, AndPrefixOneAccurateOnMostCalls) {
  // exact gain is +0.25; the deviation guarantee allows failure rate <= g/2
  auto space = ProductSpace::uniform_bits(2);
  auto f = make_and(2, 2);
  auto params = EstimatorParams::from_gamma(0.1);
  RandomStream rng = RandomStream::derive(4, stream_tag::kSelfTest);
  Tuple prefix{1};
  const int calls = 10000;
  int good = 0;
  for (int i = 0; i < calls; ++i)
    good += std::abs(estimate_gain(space, *f, prefix, params, rng) - 0.25) <
            0.1;
  EXPECT_GE(good, static_cast<int>(calls * 0.95));
}

TEST(EstimateGain, DictatorNegativePrefix) {
  // exact gain of fixing a 0 first bit is -0.5
  auto space = ProductSpace::uniform_bits(5);
  auto f = make_dictator(5, 0);
  auto params = EstimatorParams::from_gamma(0.2);
  RandomStream rng = RandomStream::derive(5, stream_tag::kSelfTest);
  Tuple prefix{0};
  const int calls = 10000;
  int good = 0;
  for (int i = 0; i < calls; ++i)
    good +=
        std::abs(estimate_gain(space, *f, prefix, params, rng) + 0.5) < 0.2;
  EXPECT_GE(good, static_cast<int>(calls * 0.90));
}

TEST(EstimateGain, PackedAndGenericPathsBitIdentical) {
  // the fused packed loop must consume the stream exactly like eval_raw
  auto space = ProductSpace::uniform_bits(67);
  auto fast = make_majority(67);
  auto slow = make_function_objective("majority_ref", [](const TupleView& t) {
    uint32_t ones = 0;
    for (uint32_t i = 0; i < t.n; ++i) ones += t.bit(i);
    return 2 * ones >= t.n;
  });
  auto params = EstimatorParams::from_gamma(0.4);
  Tuple prefix{1, 0, 1};
  RandomStream r1 = RandomStream::derive(6, stream_tag::kSelfTest);
  RandomStream r2 = RandomStream::derive(6, stream_tag::kSelfTest);
  for (int i = 0; i < 50; ++i) {
    double a = estimate_gain(space, *fast, prefix, params, r1);
    double b = estimate_gain(space, *slow, prefix, params, r2);
    ASSERT_DOUBLE_EQ(a, b);
    ASSERT_EQ(r1.state(), r2.state());
  }
}

TEST(EstimateMaxGain, ConstantFunctionZero) {
  auto space = ProductSpace::uniform_bits(4);
  auto one = make_const(true);
  auto params = EstimatorParams::from_gamma(0.3);
  RandomStream rng(7);
  auto got = estimate_max_gain(space, *one, {}, params, rng);
  EXPECT_DOUBLE_EQ(got.gain, 0.0);
}

TEST(EstimateMaxGain, ConsumesExactlyTwoKGainKMaxCalls) {
  auto space = ProductSpace::uniform_bits(6);
  auto f = make_majority(6);
  auto params = EstimatorParams::from_gamma(0.3);
  RandomStream rng(8);
  uint64_t before = f->call_count();
  estimate_max_gain(space, *f, {}, params, rng);
  EXPECT_EQ(f->call_count() - before, 2 * params.k_gain * params.k_max);
}

TEST(EstimateMaxGain, DictatorFindsTheInfluentialValue) {
  auto space = ProductSpace::uniform_bits(5);
  auto f = make_dictator(5, 0);
  auto params = EstimatorParams::from_gamma(0.2);
  RandomStream rng = RandomStream::derive(9, stream_tag::kSelfTest);
  const int calls = 10000;
  int good = 0;
  for (int i = 0; i < calls; ++i) {
    auto got = estimate_max_gain(space, *f, {}, params, rng);
    good += got.gain >= 0.3 && got.block == 1;
  }
  EXPECT_GE(good, static_cast<int>(calls * 0.90));
}

TEST(EstimateMaxGain, RarelyFarBelowZero) {
  // P[max-gain estimate <= -2 gamma] <= gamma, tested with 3 sigma slack
  auto space = ProductSpace::uniform_bits(6);
  auto f = make_and(6, 3);
  double gamma = 0.3;
  auto params = EstimatorParams::from_gamma(gamma);
  RandomStream rng = RandomStream::derive(10, stream_tag::kSelfTest);
  Tuple prefix{1, 0};
  const int calls = 10000;
  int low = 0;
  for (int i = 0; i < calls; ++i)
    low += estimate_max_gain(space, *f, prefix, params, rng).gain <=
           -2.0 * gamma;
  double ceiling =
      gamma + 3.0 * std::sqrt(gamma * (1.0 - gamma) / calls);
  EXPECT_LE(low / static_cast<double>(calls), ceiling);
}

TEST(EstimateMaxGain, RarelyFarBelowGoodLevels) {
  // for any level lambda hit with probability >= gamma by a fresh block's
  // exact gain, the estimate rarely lands below lambda - gamma
  auto space = ProductSpace::uniform_bits(7);
  auto f = make_majority(7);
  double gamma = 0.3;
  auto params = EstimatorParams::from_gamma(gamma);
  ExactOracle oracle(space, *f);
  Tuple prefix{1, 0, 1};
  // exact gains of the two candidate values
  std::vector<double> gains;
  for (Value v : {0u, 1u}) {
    Tuple ext = prefix;
    ext.push_back(v);
    gains.push_back(oracle.gain(ext));
  }
  // each candidate value has probability 0.5 >= gamma, so the larger exact
  // gain is a level reached with probability >= gamma
  double lambda = std::max(gains[0], gains[1]);
  RandomStream rng = RandomStream::derive(11, stream_tag::kSelfTest);
  const int calls = 10000;
  int low = 0;
  for (int i = 0; i < calls; ++i)
    low += estimate_max_gain(space, *f, prefix, params, rng).gain <=
           lambda - gamma;
  double ceiling = gamma + 3.0 * std::sqrt(gamma * (1.0 - gamma) / calls);
  EXPECT_LE(low / static_cast<double>(calls), ceiling);
}

TEST(Estimators, FreshCallsAreUncorrelated) {
  auto space = ProductSpace::uniform_bits(8);
  auto f = make_majority(8);
  auto params = EstimatorParams::from_gamma(0.4);
  RandomStream rng = RandomStream::derive(12, stream_tag::kSelfTest);
  Tuple prefix{1, 1};
  const int pairs = 2000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < pairs; ++i) {
    double x = estimate_gain(space, *f, prefix, params, rng);
    double y = estimate_gain(space, *f, prefix, params, rng);
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  double n = pairs;
  double cov = sxy / n - (sx / n) * (sy / n);
  double vx = sxx / n - (sx / n) * (sx / n);
  double vy = syy / n - (sy / n) * (sy / n);
  double corr = cov / std::sqrt(vx * vy);
  EXPECT_NEAR(corr, 0.0, 4.0 / std::sqrt(n));
}

}  // namespace
}  // namespace tamper
