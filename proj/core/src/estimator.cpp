#include "tamper/estimator.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace tamper {

namespace {

void require_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("estimator: gamma must lie in (0,1)");
}

}  // namespace

uint64_t gain_sample_count(double gamma) {
  require_gamma(gamma);
  double k = -12.0 *
             (std::log(gamma / 2.0) + std::log(std::log1p(gamma)) -
              std::log(-std::log(gamma / 2.0))) /
             (gamma * gamma);
  double c = std::ceil(k);
  return c < 1.0 ? 1 : static_cast<uint64_t>(c);
}

uint64_t max_candidate_count(double gamma) {
  require_gamma(gamma);
  double k = -std::log(gamma / 2.0) / std::log1p(gamma);
  double c = std::ceil(k);
  return c < 1.0 ? 1 : static_cast<uint64_t>(c);
}

namespace {

// Fused resample + masked-popcount loop for packed spaces: the prefix
// contribution is hoisted out, the stream is consumed in counter form, and
// nothing touches memory besides the mask reads. Stream consumption and
// results are identical to the generic eval_raw loop.
uint64_t count_hits_packed(const ScratchTuple& scratch,
                           const PackedCountSpec& spec, uint64_t k,
                           RandomStream& rng) {
  using detail::kGolden;
  using detail::mix64;
  const uint32_t base = scratch.prefix_masked_count(spec.masks);
  if (scratch.prefix_len() == scratch.view().n)
    return spec.apply(base) ? k : 0;  // no suffix left; nothing is drawn

  const uint64_t* mk = spec.masks.data();
  const uint32_t wc = static_cast<uint32_t>(spec.masks.size());
  const uint32_t b = scratch.packed_boundary_word();
  const uint64_t keep = scratch.packed_boundary_keep();
  const uint64_t tail = scratch.packed_tail_mask();
  const uint32_t m = wc - b;  // words drawn per sample
  const uint64_t st = rng.state();
  rng.skip(k * m);

  uint64_t hits = 0;
  if (m == 1) {
    const uint64_t mask0 = ~keep & tail & mk[b];
    for (uint64_t s = 0; s < k; ++s) {
      uint32_t c = base + static_cast<uint32_t>(std::popcount(
                              mix64(st + (s + 1) * kGolden) & mask0));
      hits += spec.apply(c);
    }
    return hits;
  }
  const uint64_t mask_first = ~keep & mk[b];
  const uint64_t mask_last = tail & mk[wc - 1];
  bool full_masks = true;
  for (uint32_t i = 1; i + 1 < m; ++i)
    full_masks = full_masks && mk[b + i] == ~uint64_t{0};
  if (full_masks && spec.test == PackedCountSpec::Test::kGreaterEq) {
    // majority/threshold shape: no mask loads, branchless accumulate, and a
    // compile-time word count so the sample body fully unrolls
    const uint32_t thr = spec.threshold;
    auto run = [&]<uint32_t M>() {
      uint64_t h = 0;
      for (uint64_t s = 0; s < k; ++s) {
        const uint64_t w0 = st + s * M * kGolden;
        uint32_t c = base + static_cast<uint32_t>(std::popcount(
                                mix64(w0 + kGolden) & mask_first));
        for (uint32_t i = 1; i + 1 < M; ++i)
          c += static_cast<uint32_t>(
              std::popcount(mix64(w0 + (i + 1) * kGolden)));
        c += static_cast<uint32_t>(
            std::popcount(mix64(w0 + M * kGolden) & mask_last));
        h += c >= thr;
      }
      return h;
    };
    switch (m) {
      case 2: return run.operator()<2>();
      case 3: return run.operator()<3>();
      case 4: return run.operator()<4>();
      case 5: return run.operator()<5>();
      case 6: return run.operator()<6>();
      case 7: return run.operator()<7>();
      case 8: return run.operator()<8>();
      case 9: return run.operator()<9>();
      case 10: return run.operator()<10>();
      case 11: return run.operator()<11>();
      case 12: return run.operator()<12>();
      case 13: return run.operator()<13>();
      case 14: return run.operator()<14>();
      case 15: return run.operator()<15>();
      case 16: return run.operator()<16>();
      default:
        break;  // rare sizes fall through to the generic masked loop
    }
  }
  for (uint64_t s = 0; s < k; ++s) {
    const uint64_t w0 = st + s * m * kGolden;
    uint32_t c = base + static_cast<uint32_t>(std::popcount(
                            mix64(w0 + kGolden) & mask_first));
    for (uint32_t i = 1; i + 1 < m; ++i)
      c += static_cast<uint32_t>(
          std::popcount(mix64(w0 + (i + 1) * kGolden) & mk[b + i]));
    c += static_cast<uint32_t>(
        std::popcount(mix64(w0 + m * kGolden) & mask_last));
    hits += spec.apply(c);
  }
  return hits;
}

}  // namespace

double estimate_avg(const ProductSpace& space, const Objective& objective,
                    Prefix prefix, uint64_t k, RandomStream& rng) {
  ScratchTuple scratch(space, prefix);
  uint64_t hits = 0;
  const PackedCountSpec* spec =
      space.packed() ? objective.packed_count() : nullptr;
  if (spec) {
    hits = count_hits_packed(scratch, *spec, k, rng);
  } else {
    for (uint64_t s = 0; s < k; ++s) {
      scratch.resample_suffix(rng);
      hits += objective.eval_raw(scratch.view());
    }
  }
  objective.add_calls(k);
  return static_cast<double>(hits) / static_cast<double>(k);
}

double estimate_gain(const ProductSpace& space, const Objective& objective,
                     Prefix prefix, const EstimatorParams& params,
                     RandomStream& rng) {
  if (prefix.empty())
    throw std::invalid_argument(
        "estimate_gain: prefix must include the block under test");
  double with_block =
      estimate_avg(space, objective, prefix, params.k_gain, rng);
  double without_block = estimate_avg(
      space, objective, prefix.first(prefix.size() - 1), params.k_gain, rng);
  return with_block - without_block;
}

GainEstimate estimate_max_gain(const ProductSpace& space,
                               const Objective& objective, Prefix prefix,
                               const EstimatorParams& params,
                               RandomStream& rng) {
  const uint32_t i = static_cast<uint32_t>(prefix.size());
  if (i >= space.n())
    throw std::invalid_argument("estimate_max_gain: no block left to choose");
  Tuple ext(prefix.begin(), prefix.end());
  ext.push_back(0);
  double best = -2.0;
  Value arg = 0;
  for (uint64_t j = 0; j < params.k_max; ++j) {
    Value candidate = space.block(i).sample(rng);
    ext[i] = candidate;
    double g = estimate_gain(space, objective, ext, params, rng);
    if (g > best) {
      best = g;
      arg = candidate;
    }
  }
  return GainEstimate{best, arg};
}

}  // namespace tamper
