#include "tamper/space.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

namespace tamper {
namespace {

TEST(BlockDomain, PointMassAlwaysSameValue) {
  auto d = BlockDomain::explicit_weighted({"7"}, {1.0});
  RandomStream rng(1);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(d.sample(rng), 0u);
  EXPECT_EQ(d.token(0), "7");
}

TEST(BlockDomain, WeightsMustSumToOne) {
  EXPECT_THROW(BlockDomain::explicit_weighted({"a", "b"}, {0.25, 0.7}),
               std::invalid_argument);
  EXPECT_THROW(BlockDomain::explicit_weighted({"a", "b"}, {-0.25, 1.25}),
               std::invalid_argument);
}

TEST(BlockDomain, WeightedFrequencyMatchesChernoffWindow) {
  auto d = BlockDomain::explicit_weighted({"a", "b"}, {0.25, 0.75});
  RandomStream rng = RandomStream::derive(5, stream_tag::kSelfTest);
  const int draws = 100000;
  int b_count = 0;
  for (int i = 0; i < draws; ++i) b_count += d.sample(rng) == 1;
  EXPECT_NEAR(b_count / static_cast<double>(draws), 0.75, 0.01);
}

TEST(ProductSpace, UniformBitFrequency) {
  auto space = ProductSpace::uniform_bits(1);
  RandomStream rng = RandomStream::derive(6, stream_tag::kSelfTest);
  const int draws = 100000;
  int ones = 0;
  for (int i = 0; i < draws; ++i) ones += space.sample_block(0, rng);
  EXPECT_NEAR(ones / static_cast<double>(draws), 0.5, 0.01);
}

TEST(ProductSpace, SampleBlockIndexChecked) {
  auto space = ProductSpace::uniform_bits(3);
  RandomStream rng(1);
  EXPECT_THROW(space.sample_block(3, rng), std::out_of_range);
}

TEST(ProductSpace, TwoBitProductLaw) {
  auto space = ProductSpace::uniform_bits(2);
  RandomStream rng = RandomStream::derive(7, stream_tag::kSelfTest);
  const int draws = 100000;
  std::map<std::pair<Value, Value>, int> counts;
  Tuple t;
  for (int i = 0; i < draws; ++i) {
    space.sample_full(rng, t);
    ++counts[{t[0], t[1]}];
  }
  ASSERT_EQ(counts.size(), 4u);
  for (const auto& [key, c] : counts)
    EXPECT_NEAR(c / static_cast<double>(draws), 0.25, 0.01);
}

TEST(ProductSpace, PointMassFullTuple) {
  auto space = ProductSpace::explicit_blocks({{{"x", 1.0}}, {{"y", 1.0}}});
  RandomStream rng(3);
  EXPECT_EQ(space.sample_full(rng), (Tuple{0, 0}));
}

TEST(ProductSpace, EmptyDimension) {
  auto space = ProductSpace::uniform_bits(0);
  RandomStream rng(3);
  EXPECT_TRUE(space.sample_full(rng).empty());
  EXPECT_EQ(space.support_size(), 1u);
}

TEST(ProductSpace, SamplingDeterminism) {
  auto space = ProductSpace::uniform_ints(20, 5);
  RandomStream a = RandomStream::derive(11, stream_tag::kTrial, 0);
  RandomStream b = RandomStream::derive(11, stream_tag::kTrial, 0);
  for (int i = 0; i < 50; ++i)
    ASSERT_EQ(space.sample_full(a), space.sample_full(b));
}

TEST(ProductSpace, CoordinateIndependenceEmpiricalCovariance) {
  auto space = ProductSpace::uniform_bits(8);
  RandomStream rng = RandomStream::derive(13, stream_tag::kSelfTest);
  const int draws = 100000;
  // covariance of a few coordinate pairs
  const std::pair<int, int> pairs[] = {{0, 1}, {2, 7}, {3, 4}};
  double sum_x[3] = {}, sum_y[3] = {}, sum_xy[3] = {};
  Tuple t;
  for (int i = 0; i < draws; ++i) {
    space.sample_full(rng, t);
    for (int p = 0; p < 3; ++p) {
      double x = t[pairs[p].first], y = t[pairs[p].second];
      sum_x[p] += x;
      sum_y[p] += y;
      sum_xy[p] += x * y;
    }
  }
  for (int p = 0; p < 3; ++p) {
    double cov = sum_xy[p] / draws -
                 (sum_x[p] / draws) * (sum_y[p] / draws);
    EXPECT_NEAR(cov, 0.0, 0.02);
  }
}

TEST(Enumerate, ThreeUniformBits) {
  auto space = ProductSpace::uniform_bits(3);
  int count = 0;
  double total = 0.0;
  space.enumerate(kDefaultEnumerationCap, [&](const Tuple& t, double p) {
    ++count;
    total += p;
    EXPECT_DOUBLE_EQ(p, 0.125);
  });
  EXPECT_EQ(count, 8);
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(Enumerate, MixedBlocks) {
  auto space =
      ProductSpace::explicit_blocks({{{"0", 0.5}, {"1", 0.5}}, {{"a", 1.0}}});
  std::vector<double> probs;
  space.enumerate(kDefaultEnumerationCap,
                  [&](const Tuple&, double p) { probs.push_back(p); });
  ASSERT_EQ(probs.size(), 2u);
  EXPECT_DOUBLE_EQ(probs[0], 0.5);
  EXPECT_DOUBLE_EQ(probs[1], 0.5);
}

TEST(Enumerate, WeightedPairProbability) {
  auto space = ProductSpace::explicit_blocks(
      {{{"a", 0.25}, {"b", 0.75}}, {{"a", 0.25}, {"b", 0.75}}});
  double bb = -1.0;
  double total = 0.0;
  space.enumerate(kDefaultEnumerationCap, [&](const Tuple& t, double p) {
    total += p;
    if (t[0] == 1 && t[1] == 1) bb = p;
  });
  EXPECT_DOUBLE_EQ(bb, 0.5625);
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(Enumerate, CapExceededThrows) {
  auto space = ProductSpace::uniform_bits(30);
  EXPECT_THROW(space.enumerate(1 << 20, [](const Tuple&, double) {}),
               std::runtime_error);
}

TEST(Hamming, SpecExamples) {
  EXPECT_EQ(hamming(Tuple{0, 1, 1}, Tuple{0, 1, 1}), 0u);
  EXPECT_EQ(hamming(Tuple{0, 0, 0}, Tuple{1, 1, 1}), 3u);
  EXPECT_EQ(hamming(Tuple{0, 1, 0, 1}, Tuple{0, 0, 0, 0}), 2u);
  EXPECT_THROW(hamming(Tuple{0}, Tuple{0, 1}), std::invalid_argument);
}

TEST(Hamming, MetricPropertiesOnRandomTriples) {
  RandomStream rng = RandomStream::derive(17, stream_tag::kSelfTest);
  auto space = ProductSpace::uniform_ints(12, 4);
  for (int it = 0; it < 500; ++it) {
    Tuple a = space.sample_full(rng);
    Tuple b = space.sample_full(rng);
    Tuple c = space.sample_full(rng);
    EXPECT_EQ(hamming(a, b), hamming(b, a));
    EXPECT_EQ(hamming(a, a), 0u);
    if (hamming(a, b) == 0) EXPECT_EQ(a, b);
    EXPECT_LE(hamming(a, c), hamming(a, b) + hamming(b, c));
  }
}

TEST(ScratchTuple, PackedMatchesGenericSampling) {
  // the packed resampler must produce valid suffixes with zeroed tail bits
  auto space = ProductSpace::uniform_bits(70);
  Tuple prefix(5, 1);
  ScratchTuple scratch(space, prefix);
  RandomStream rng(3);
  for (int i = 0; i < 100; ++i) {
    scratch.resample_suffix(rng);
    TupleView v = scratch.view();
    ASSERT_NE(v.words, nullptr);
    for (uint32_t j = 0; j < 5; ++j) ASSERT_EQ(v.bit(j), 1u);
    // bits beyond n stay zero
    ASSERT_EQ(v.words[1] >> 6, 0u);
  }
}

TEST(ScratchTuple, ResampleAndCountMatchesStoredWords) {
  auto space = ProductSpace::uniform_bits(130);
  Tuple prefix(17, 1);
  std::vector<uint64_t> masks(space.word_count(), ~uint64_t{0});
  ScratchTuple a(space, prefix);
  ScratchTuple b(space, prefix);
  RandomStream r1(99), r2(99);
  uint32_t base = a.prefix_masked_count(masks);
  for (int i = 0; i < 200; ++i) {
    b.resample_suffix(r2);
    uint32_t stored = 0;
    for (uint64_t w : b.words()) stored += std::popcount(w);
    uint32_t counted = base + a.resample_and_count(masks, r1);
    ASSERT_EQ(counted, stored);
  }
  ASSERT_EQ(r1.state(), r2.state());
}

TEST(PowerSpace, TupleValuedBlocks) {
  auto inner = std::make_shared<ProductSpace>(ProductSpace::uniform_bits(3));
  auto space = ProductSpace::power(inner, 4);
  EXPECT_EQ(space.n(), 4u);
  EXPECT_EQ(space.block(0).size(), 8u);
  EXPECT_EQ(space.support_size(), 4096u);
  EXPECT_DOUBLE_EQ(space.block(0).weight(5), 0.125);
  RandomStream rng(4);
  Tuple t = space.sample_full(rng);
  for (Value v : t) EXPECT_LT(v, 8u);
  // rank round-trip through the inner space
  Tuple inst;
  inner->unpack_index(6, inst);
  EXPECT_EQ(inner->pack_index(inst), 6u);
}

}  // namespace
}  // namespace tamper
