#include <benchmark/benchmark.h>

#include "tamper/rng.hpp"
#include "tamper/space.hpp"

namespace {

void BM_SampleFullBits(benchmark::State& state) {
  auto space = tamper::ProductSpace::uniform_bits(
      static_cast<uint32_t>(state.range(0)));
  tamper::RandomStream rng(42);
  tamper::Tuple t;
  for (auto _ : state) {
    space.sample_full(rng, t);
    benchmark::DoNotOptimize(t.data());
  }
}
BENCHMARK(BM_SampleFullBits)->Arg(101)->Arg(1001);

void BM_SuffixResample(benchmark::State& state) {
  auto space = tamper::ProductSpace::uniform_bits(1001);
  tamper::Tuple prefix(static_cast<size_t>(state.range(0)), 1);
  tamper::ScratchTuple scratch(space, prefix);
  tamper::RandomStream rng(42);
  for (auto _ : state) {
    scratch.resample_suffix(rng);
    benchmark::DoNotOptimize(scratch.view().words);
  }
}
BENCHMARK(BM_SuffixResample)->Arg(0)->Arg(500)->Arg(990);

}  // namespace
