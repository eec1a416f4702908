#include "tamper/objective.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "tamper/bounds.hpp"
#include "tamper/exact.hpp"

namespace tamper {
namespace {

// Both layouts must agree on every input.
void check_layout_parity(const ProductSpace& space, const Objective& f) {
  space.enumerate(1 << 16, [&](const Tuple& t, double) {
    TupleView idx = TupleView::of(t);
    std::vector<uint64_t> words(space.word_count(), 0);
    for (uint32_t i = 0; i < space.n(); ++i)
      if (t[i]) words[i >> 6] |= uint64_t{1} << (i & 63);
    TupleView packed{words.data(), nullptr, space.n()};
    ASSERT_EQ(f.eval_raw(idx), f.eval_raw(packed)) << f.name();
  });
}

TEST(Builtins, TruthTablesAndLayoutParity) {
  auto space = ProductSpace::uniform_bits(6);
  auto and2 = make_and(6, 2);
  auto or3 = make_or(6, 3);
  auto xor6 = make_xor(6, 6);
  auto maj = make_majority(6);
  auto dict = make_dictator(6, 2);
  std::vector<double> w{1, 2, 3, 4, 5, 6};
  auto thr = make_threshold(space, w, 11.0);

  EXPECT_TRUE(and2->eval(Tuple{1, 1, 0, 0, 0, 0}));
  EXPECT_FALSE(and2->eval(Tuple{1, 0, 1, 1, 1, 1}));
  EXPECT_TRUE(or3->eval(Tuple{0, 0, 1, 0, 0, 0}));
  EXPECT_FALSE(or3->eval(Tuple{0, 0, 0, 1, 1, 1}));
  EXPECT_TRUE(xor6->eval(Tuple{1, 0, 0, 0, 0, 0}));
  EXPECT_FALSE(xor6->eval(Tuple{1, 1, 0, 0, 0, 0}));
  EXPECT_TRUE(maj->eval(Tuple{1, 1, 1, 0, 0, 0}));  // ties count as 1
  EXPECT_FALSE(maj->eval(Tuple{1, 1, 0, 0, 0, 0}));
  EXPECT_TRUE(dict->eval(Tuple{0, 0, 1, 0, 0, 0}));
  EXPECT_TRUE(thr->eval(Tuple{0, 0, 0, 0, 1, 1}));   // 5+6 = 11
  EXPECT_FALSE(thr->eval(Tuple{1, 1, 1, 1, 0, 0}));  // 1+2+3+4 = 10

  for (const Objective* f :
       {and2.get(), or3.get(), xor6.get(), maj.get(), dict.get(), thr.get()})
    check_layout_parity(space, *f);
}

TEST(Builtins, CallCounterTracksEvaluations) {
  auto f = make_majority(3);
  EXPECT_EQ(f->call_count(), 0u);
  f->eval(Tuple{1, 1, 0});
  f->eval(Tuple{0, 0, 0});
  EXPECT_EQ(f->call_count(), 2u);
  f->add_calls(10);
  EXPECT_EQ(f->call_count(), 12u);
}

TEST(ExactOracle, ConditionalMeansOfAndTwoBits) {
  auto space = ProductSpace::uniform_bits(2);
  auto f = make_and(2, 2);
  ExactOracle oracle(space, *f);
  EXPECT_NEAR(oracle.avg({}), 0.25, 1e-12);
  Tuple one{1};
  EXPECT_NEAR(oracle.avg(one), 0.5, 1e-12);
  EXPECT_NEAR(oracle.gain(one), 0.25, 1e-12);
  Tuple zero{0};
  EXPECT_NEAR(oracle.gain(zero), -0.25, 1e-12);
  EXPECT_THROW(oracle.gain({}), std::invalid_argument);
}

TEST(ExactOracle, ConstantFunctions) {
  auto space = ProductSpace::uniform_bits(4);
  auto one = make_const(true);
  auto zero = make_const(false);
  ExactOracle o1(space, *one), o0(space, *zero);
  Tuple prefix{1, 0};
  EXPECT_DOUBLE_EQ(o1.avg(prefix), 1.0);
  EXPECT_DOUBLE_EQ(o0.gain(prefix), 0.0);
}

TEST(ExactOracle, MaxGainExamples) {
  {
    auto space = ProductSpace::uniform_bits(3);
    auto dict = make_dictator(3, 0);
    ExactOracle oracle(space, *dict);
    auto best = oracle.max_gain({});
    EXPECT_NEAR(best.gain, 0.5, 1e-12);
    EXPECT_EQ(best.block, 1u);
  }
  {
    auto space = ProductSpace::uniform_bits(4);
    auto x = make_xor(4, 4);
    ExactOracle oracle(space, *x);
    Tuple prefix{1};
    auto best = oracle.max_gain(prefix);  // conditional means all 0.5
    EXPECT_NEAR(best.gain, 0.0, 1e-12);
    EXPECT_EQ(best.block, 0u);  // lowest support index wins ties
  }
  {
    auto space = ProductSpace::uniform_bits(3);
    auto one = make_const(true);
    ExactOracle oracle(space, *one);
    auto best = oracle.max_gain({});
    EXPECT_DOUBLE_EQ(best.gain, 0.0);
    EXPECT_EQ(best.block, 0u);
  }
}

TEST(ExactOracle, LawOfTotalExpectation) {
  auto space = ProductSpace::explicit_blocks({{{"0", 0.25}, {"1", 0.75}},
                                              {{"0", 0.5}, {"1", 0.5}},
                                              {{"a", 0.1}, {"b", 0.9}}});
  auto f = make_function_objective("odd_sum", [](const TupleView& t) {
    return ((t.value(0) + t.value(1) + t.value(2)) & 1) == 1;
  });
  ExactOracle oracle(space, *f);
  // avg(prefix) = sum_v P(v) avg(prefix+v) at every prefix
  std::vector<Tuple> prefixes{{}, {0}, {1}, {0, 1}, {1, 0}, {1, 1}};
  for (const auto& p : prefixes) {
    double total = 0.0;
    Tuple ext = p;
    ext.push_back(0);
    uint32_t i = static_cast<uint32_t>(p.size());
    for (Value v = 0; v < space.block(i).size(); ++v) {
      ext[i] = v;
      total += space.block(i).weight(v) * oracle.avg(ext);
    }
    EXPECT_NEAR(oracle.avg(p), total, 1e-9);
  }
}

TEST(ExactOracle, StreamingAndTableBackendsAgree) {
  auto space = ProductSpace::uniform_bits(10);
  auto f = make_majority(10);
  ExactOracle table(space, *f);  // small: table mode
  ExactOracle streaming(space, *f, kDefaultEnumerationCap,
                        /*table_entry_cap=*/4);  // forced to stream
  table.ensure_table();
  ASSERT_TRUE(table.has_table());
  ASSERT_FALSE(streaming.has_table());
  RandomStream rng(5);
  for (int it = 0; it < 20; ++it) {
    uint32_t len = rng.next_below(11);
    Tuple prefix(len);
    for (auto& v : prefix) v = rng.next_bit();
    EXPECT_NEAR(table.avg(prefix), streaming.avg(prefix), 1e-12);
  }
}

TEST(EnumerateAttack, DictatorSpecExample) {
  auto space = ProductSpace::uniform_bits(3);
  auto dict = make_dictator(3, 0);
  auto stats = enumerate_attack(space, *dict, 0.4);
  EXPECT_NEAR(stats.bias, 1.0, 1e-12);
  EXPECT_NEAR(stats.expected_tampered, 1.0, 1e-12);
  EXPECT_NEAR(stats.expected_hamming, 0.5, 1e-12);
}

TEST(EnumerateAttack, XorFiresAtTheLastStep) {
  auto space = ProductSpace::uniform_bits(3);
  auto x = make_xor(3, 3);
  auto stats = enumerate_attack(space, *x, 0.3);
  EXPECT_NEAR(stats.bias, 1.0, 1e-12);
  EXPECT_NEAR(stats.expected_tampered, 1.0, 1e-12);
}

TEST(EnumerateAttack, ConstantOneNeverTampers) {
  auto space = ProductSpace::uniform_bits(4);
  auto one = make_const(true);
  for (double tau : {0.05, 0.3, 0.9}) {
    auto stats = enumerate_attack(space, *one, tau);
    EXPECT_DOUBLE_EQ(stats.bias, 1.0);
    EXPECT_DOUBLE_EQ(stats.expected_tampered, 0.0);
  }
}

TEST(EnumerateAttack, AndOfTwoOverFourBitsHandCount) {
  // tau = 0.2: g*() = 0.25 >= tau, then g*((1)) = 0.5; steps 3,4 idle
  auto space = ProductSpace::uniform_bits(4);
  auto f = make_and(4, 2);
  auto stats = enumerate_attack(space, *f, 0.2);
  EXPECT_NEAR(stats.bias, 1.0, 1e-12);
  EXPECT_NEAR(stats.expected_tampered, 2.0, 1e-12);
  EXPECT_NEAR(stats.expected_hamming, 1.0, 1e-12);
}

TEST(EnumerateAttack, BoundsHoldOnWeightedBlocks) {
  // non-dyadic weights exercise the general product law
  auto space = ProductSpace::explicit_blocks({{{"0", 0.3}, {"1", 0.7}},
                                              {{"0", 0.6}, {"1", 0.4}},
                                              {{"0", 0.5}, {"1", 0.5}},
                                              {{"0", 0.2}, {"1", 0.8}}});
  auto f = make_function_objective("two_ones", [](const TupleView& t) {
    int ones = 0;
    for (uint32_t i = 0; i < t.n; ++i) ones += t.value(i);
    return ones >= 2;
  });
  ExactOracle oracle(space, *f);
  double mu = oracle.mu();
  ASSERT_GT(mu, 0.0);
  for (double tau : {0.05, 0.1, 0.2, 0.3}) {
    auto stats = enumerate_attack(oracle, tau);
    EXPECT_GE(stats.bias, bounds::ideal_bias_bound(4, mu, tau) - 1e-9);
    EXPECT_LE(stats.expected_tampered,
              bounds::ideal_budget_bound(4, mu, tau) + 1e-9);
    EXPECT_GE(stats.min_step_drift, -1e-12);
    EXPECT_LE(stats.expected_hamming, stats.expected_tampered + 1e-12);
    EXPECT_GE(stats.bias, mu - 1e-9);
  }
}

TEST(ExternalObjective, SubprocessParity) {
  // an awk parity oracle over space-separated bits
  const char* path = "/tmp/tamper_parity_oracle.sh";
  {
    std::ofstream sh(path);
    sh << "#!/bin/sh\nawk '{ s=0; for (i=1; i<=NF; i++) s+=$i; print s%2 }'\n";
  }
  ASSERT_EQ(std::system("chmod +x /tmp/tamper_parity_oracle.sh"), 0);
  auto space = ProductSpace::uniform_bits(5);
  auto external = make_external(space, path);
  auto reference = make_xor(5, 5);
  space.enumerate(64, [&](const Tuple& t, double) {
    ASSERT_EQ(external->eval(t), reference->eval(t));
  });
  EXPECT_EQ(external->call_count(), 32u);
  std::remove(path);
}

}  // namespace
}  // namespace tamper
