#include "tamper/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace tamper {
namespace {

TEST(RandomStream, DeterministicReplay) {
  RandomStream a = RandomStream::derive(42, stream_tag::kTrial, 7);
  RandomStream b = RandomStream::derive(42, stream_tag::kTrial, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RandomStream, DistinctContextsDiverge) {
  RandomStream a = RandomStream::derive(42, stream_tag::kTrial, 7);
  RandomStream b = RandomStream::derive(42, stream_tag::kTrial, 8);
  RandomStream c = RandomStream::derive(42, stream_tag::kMuEstimate, 7);
  int equal = 0;
  for (int i = 0; i < 64; ++i) {
    uint64_t x = a.next_u64();
    equal += x == b.next_u64();
    equal += x == c.next_u64();
  }
  EXPECT_EQ(equal, 0);
}

TEST(RandomStream, SkipMatchesSequentialConsumption) {
  RandomStream a(123456);
  RandomStream b(123456);
  for (int i = 0; i < 17; ++i) a.next_u64();
  b.skip(17);
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RandomStream, UnitIntervalRange) {
  RandomStream rng(9);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.next_unit();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(RandomStream, BoundedDrawUniformChiSquare) {
  RandomStream rng(17);
  const uint32_t buckets = 10;
  const int draws = 100000;
  std::vector<int> counts(buckets, 0);
  for (int i = 0; i < draws; ++i) ++counts[rng.next_below(buckets)];
  double expected = static_cast<double>(draws) / buckets;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 9 degrees of freedom; 99.9th percentile = 27.88
  EXPECT_LT(chi2, 27.88);
}

TEST(RandomStream, BitBalance) {
  RandomStream rng(31);
  const int draws = 100000;
  int ones = 0;
  for (int i = 0; i < draws; ++i) ones += rng.next_bit();
  // 6 sigma around n/2
  EXPECT_NEAR(ones, draws / 2, 6.0 * std::sqrt(draws) / 2.0);
}

}  // namespace
}  // namespace tamper
