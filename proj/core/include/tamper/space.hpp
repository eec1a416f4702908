#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tamper/rng.hpp"

namespace tamper {

/// A block value is an index into its block's support set. All supports in
/// this library are finite (possibly large, e.g. the full instance space of
/// a learning problem); indexing keeps equality tests and Hamming counting
/// trivial, while the encoded form of a value is available via token().
using Value = uint32_t;
using Tuple = std::vector<Value>;

/// The finalized first i blocks of a (partially) tampered vector.
using Prefix = std::span<const Value>;

class ProductSpace;

/// One coordinate's marginal distribution. Explicit supports carry their
/// element tokens and weights; derived supports (uniform integers, the
/// m-fold power of another space) compute both on demand.
class BlockDomain {
 public:
  static BlockDomain uniform_bit();
  static BlockDomain uniform_int(uint32_t upper);  // uniform on {0,..,upper-1}
  static BlockDomain explicit_weighted(std::vector<std::string> tokens,
                                       std::vector<double> weights);
  /// Support = the whole support of `inner`; a value is the rank of an inner
  /// tuple under mixed-radix order. Used for attacking m-example streams.
  static BlockDomain tuple_valued(std::shared_ptr<const ProductSpace> inner);

  uint64_t size() const;
  double weight(Value v) const;
  Value sample(RandomStream& rng) const;
  std::string token(Value v) const;
  /// Numeric reading of a value (for weighted-threshold objectives):
  /// uniform blocks read as the integer itself, explicit blocks as the
  /// parsed token when numeric, else as the support index.
  double numeric(Value v) const;
  /// Max encoded size of any support element, in bits (bytes * 8).
  uint32_t bit_length() const;

  bool is_uniform_bit() const { return kind_ == Kind::kBit; }
  bool is_tuple_valued() const { return kind_ == Kind::kTuple; }
  const ProductSpace* inner() const { return inner_.get(); }

 private:
  enum class Kind { kBit, kInt, kExplicit, kTuple };
  Kind kind_ = Kind::kBit;
  uint32_t upper_ = 2;
  struct ExplicitData {
    std::vector<std::string> tokens;
    std::vector<double> weights;
    std::vector<double> cumulative;
    std::vector<double> numeric;
    uint32_t bit_length = 8;
  };
  std::shared_ptr<const ExplicitData> explicit_;
  std::shared_ptr<const ProductSpace> inner_;
};

/// A lightweight view of a full n-tuple in one of two layouts: bit-packed
/// words (spaces where every block is a uniform bit) or a span of support
/// indices. Objectives accept either.
struct TupleView {
  const uint64_t* words = nullptr;
  const Value* idx = nullptr;
  uint32_t n = 0;

  uint32_t bit(uint32_t i) const {
    return words ? static_cast<uint32_t>((words[i >> 6] >> (i & 63)) & 1)
                 : idx[i];
  }
  Value value(uint32_t i) const {
    return words ? static_cast<Value>((words[i >> 6] >> (i & 63)) & 1)
                 : idx[i];
  }
  static TupleView of(const Tuple& t) {
    return TupleView{nullptr, t.data(), static_cast<uint32_t>(t.size())};
  }
};

/// An ordered product of n independent blocks, immutable after construction
/// and safely shared across concurrent trials.
class ProductSpace {
 public:
  ProductSpace() = default;
  explicit ProductSpace(std::vector<BlockDomain> blocks);

  static ProductSpace uniform_bits(uint32_t n);
  static ProductSpace uniform_ints(uint32_t n, uint32_t upper);
  static ProductSpace explicit_blocks(
      std::vector<std::vector<std::pair<std::string, double>>> blocks);
  /// The m-fold product of `inner` along the example axis: m blocks, each
  /// tuple-valued over inner's full support.
  static ProductSpace power(std::shared_ptr<const ProductSpace> inner,
                            uint32_t m);

  uint32_t n() const { return static_cast<uint32_t>(blocks_.size()); }
  const BlockDomain& block(uint32_t i) const { return blocks_[i]; }

  /// True when every block is a uniform bit; tuples then pack into words and
  /// the samplers run word-at-a-time.
  bool packed() const { return packed_; }
  uint32_t word_count() const { return (n() + 63) / 64; }

  Value sample_block(uint32_t i, RandomStream& rng) const;
  void sample_full(RandomStream& rng, Tuple& out) const;
  Tuple sample_full(RandomStream& rng) const;

  /// Total bits needed to index the full support (sum of per-block index
  /// widths); useful as a memoization key width.
  uint32_t index_bits() const { return index_bits_; }
  /// Support size if it fits in 64 bits.
  std::optional<uint64_t> support_size() const { return support_size_; }
  bool enumerable(uint64_t cap) const {
    return support_size_.has_value() && *support_size_ <= cap;
  }

  /// Visits every tuple of the support exactly once with its exact product
  /// probability. Throws if the support exceeds `cap`.
  void enumerate(uint64_t cap,
                 const std::function<void(const Tuple&, double)>& fn) const;

  /// Rank of a full tuple under mixed-radix order (block 0 most significant);
  /// requires index_bits() <= 64.
  uint64_t pack_index(Prefix t) const;
  void unpack_index(uint64_t key, Tuple& out) const;
  double probability(Prefix t) const;

  uint32_t max_block_bits() const;  // the paper-facing l parameter

 private:
  std::vector<BlockDomain> blocks_;
  bool packed_ = false;
  uint32_t index_bits_ = 0;
  std::optional<uint64_t> support_size_;
};

/// Hamming distance between two equal-length tuples.
uint32_t hamming(Prefix a, Prefix b);

inline constexpr uint64_t kDefaultEnumerationCap = uint64_t{1} << 24;

/// A reusable tuple buffer with a fixed prefix and a resampleable suffix;
/// the workhorse of both the Monte Carlo estimators and the exact
/// enumeration oracle. Chooses the packed layout automatically.
class ScratchTuple {
 public:
  ScratchTuple(const ProductSpace& space, Prefix fixed);

  void resample_suffix(RandomStream& rng) {
    if (prefix_len_ == n_) return;
    if (!words_.empty()) {
      uint64_t* w = words_.data();
      const uint32_t wc = static_cast<uint32_t>(words_.size());
      w[boundary_word_] = boundary_prefix_ | (rng.next_u64() & ~boundary_keep_);
      for (uint32_t i = boundary_word_ + 1; i < wc; ++i) w[i] = rng.next_u64();
      w[wc - 1] &= tail_mask_;
      return;
    }
    resample_suffix_generic(rng);
  }

  TupleView view() const {
    if (!words_.empty()) return TupleView{words_.data(), nullptr, n_};
    return TupleView{nullptr, values_.data(), n_};
  }

  uint32_t prefix_len() const { return prefix_len_; }
  std::span<const uint64_t> words() const { return words_; }
  uint32_t packed_boundary_word() const { return boundary_word_; }
  uint64_t packed_boundary_keep() const { return boundary_keep_; }
  uint64_t packed_tail_mask() const { return tail_mask_; }

  /// Masked popcount of the fixed prefix bits (packed layout only); constant
  /// across resamples, so callers hoist it out of their sampling loops.
  uint32_t prefix_masked_count(std::span<const uint64_t> masks) const {
    uint32_t c = 0;
    for (uint32_t w = 0; w < boundary_word_; ++w)
      c += static_cast<uint32_t>(std::popcount(words_[w] & masks[w]));
    c += static_cast<uint32_t>(
        std::popcount(boundary_prefix_ & masks[boundary_word_]));
    return c;
  }

  /// Draws one fresh suffix and returns its masked popcount without storing
  /// the words; consumes exactly the same stream values as resample_suffix.
  /// The counter form of the stream keeps every word independent, so the
  /// middle loop pipelines.
  uint32_t resample_and_count(std::span<const uint64_t> masks,
                              RandomStream& rng) const {
    if (prefix_len_ == n_) return 0;
    const uint64_t* mk = masks.data();
    const uint32_t wc = static_cast<uint32_t>(words_.size());
    const uint32_t b = boundary_word_;
    const uint64_t base = rng.state();
    rng.skip(wc - b);
    uint64_t first = detail::mix64(base + detail::kGolden) & ~boundary_keep_;
    if (b == wc - 1)
      return static_cast<uint32_t>(
          std::popcount(first & tail_mask_ & mk[b]));
    uint32_t c = static_cast<uint32_t>(std::popcount(first & mk[b]));
    for (uint32_t i = b + 1; i < wc - 1; ++i)
      c += static_cast<uint32_t>(std::popcount(
          detail::mix64(base + (uint64_t)(i - b + 1) * detail::kGolden) &
          mk[i]));
    c += static_cast<uint32_t>(std::popcount(
        detail::mix64(base + (uint64_t)(wc - b) * detail::kGolden) &
        tail_mask_ & mk[wc - 1]));
    return c;
  }

 private:
  void resample_suffix_generic(RandomStream& rng);
  const ProductSpace* space_;
  uint32_t n_;
  uint32_t prefix_len_;
  // packed layout
  std::vector<uint64_t> words_;
  uint32_t boundary_word_ = 0;
  uint64_t boundary_keep_ = 0;  // mask of prefix bits inside the boundary word
  uint64_t boundary_prefix_ = 0;
  uint64_t tail_mask_ = ~uint64_t{0};
  // index layout
  Tuple values_;
};

}  // namespace tamper
