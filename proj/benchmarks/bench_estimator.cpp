#include <benchmark/benchmark.h>

#include "tamper/estimator.hpp"
#include "tamper/objective.hpp"

namespace {

// Cost of one conditional-mean estimate on the large majority instance; the
// dominant inner loop of every Monte Carlo attack step.
void BM_EstimateAvgMajority(benchmark::State& state) {
  auto space = tamper::ProductSpace::uniform_bits(1001);
  auto majority = tamper::make_majority(1001);
  tamper::Tuple prefix(static_cast<size_t>(state.range(0)), 1);
  tamper::RandomStream rng(42);
  const uint64_t k = 1 << 14;
  for (auto _ : state) {
    double v = tamper::estimate_avg(space, *majority, prefix, k, rng);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * k);
}
BENCHMARK(BM_EstimateAvgMajority)->Arg(1)->Arg(500)->Arg(990);

void BM_EstimateGain(benchmark::State& state) {
  auto space = tamper::ProductSpace::uniform_bits(1001);
  auto majority = tamper::make_majority(1001);
  auto params = tamper::EstimatorParams::from_gamma(0.2);
  tamper::Tuple prefix(500, 1);
  tamper::RandomStream rng(42);
  for (auto _ : state) {
    double v =
        tamper::estimate_gain(space, *majority, prefix, params, rng);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * 2 *
                          params.k_gain);
}
BENCHMARK(BM_EstimateGain);

}  // namespace
