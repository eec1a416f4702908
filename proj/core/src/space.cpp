#include "tamper/space.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tamper {

// ---------------------------------------------------------------------------
// BlockDomain

BlockDomain BlockDomain::uniform_bit() {
  BlockDomain d;
  d.kind_ = Kind::kBit;
  d.upper_ = 2;
  return d;
}

BlockDomain BlockDomain::uniform_int(uint32_t upper) {
  if (upper == 0) throw std::invalid_argument("uniform_int: empty support");
  BlockDomain d;
  d.kind_ = Kind::kInt;
  d.upper_ = upper;
  return d;
}

BlockDomain BlockDomain::explicit_weighted(std::vector<std::string> tokens,
                                           std::vector<double> weights) {
  if (tokens.empty() || tokens.size() != weights.size())
    throw std::invalid_argument("explicit block: tokens/weights mismatch");
  auto data = std::make_shared<ExplicitData>();
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("explicit block: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("explicit block: weights must sum to 1");
  data->tokens = std::move(tokens);
  data->weights = std::move(weights);
  data->cumulative.resize(data->weights.size());
  double acc = 0.0;
  for (size_t i = 0; i < data->weights.size(); ++i) {
    acc += data->weights[i];
    data->cumulative[i] = acc;
  }
  data->cumulative.back() = 1.0;
  data->numeric.resize(data->tokens.size());
  uint32_t max_bytes = 1;
  for (size_t i = 0; i < data->tokens.size(); ++i) {
    max_bytes = std::max<uint32_t>(
        max_bytes, static_cast<uint32_t>(data->tokens[i].size()));
    try {
      size_t pos = 0;
      double v = std::stod(data->tokens[i], &pos);
      data->numeric[i] = pos == data->tokens[i].size()
                             ? v
                             : static_cast<double>(i);
    } catch (...) {
      data->numeric[i] = static_cast<double>(i);
    }
  }
  data->bit_length = 8 * max_bytes;

  BlockDomain d;
  d.kind_ = Kind::kExplicit;
  d.upper_ = static_cast<uint32_t>(data->tokens.size());
  d.explicit_ = std::move(data);
  return d;
}

BlockDomain BlockDomain::tuple_valued(
    std::shared_ptr<const ProductSpace> inner) {
  auto size = inner->support_size();
  if (!size || *size > 0xFFFFFFFFULL)
    throw std::invalid_argument(
        "tuple-valued block: inner space support must fit in 32-bit indices");
  BlockDomain d;
  d.kind_ = Kind::kTuple;
  d.upper_ = static_cast<uint32_t>(*size);
  d.inner_ = std::move(inner);
  return d;
}

uint64_t BlockDomain::size() const { return upper_; }

double BlockDomain::weight(Value v) const {
  if (v >= upper_) throw std::out_of_range("block value out of support");
  switch (kind_) {
    case Kind::kBit:
      return 0.5;
    case Kind::kInt:
      return 1.0 / upper_;
    case Kind::kExplicit:
      return explicit_->weights[v];
    case Kind::kTuple: {
      Tuple t;
      inner_->unpack_index(v, t);
      return inner_->probability(t);
    }
  }
  return 0.0;
}

Value BlockDomain::sample(RandomStream& rng) const {
  switch (kind_) {
    case Kind::kBit:
      return rng.next_bit();
    case Kind::kInt:
      return rng.next_below(upper_);
    case Kind::kExplicit: {
      double u = rng.next_unit();
      const auto& cum = explicit_->cumulative;
      for (uint32_t i = 0; i + 1 < cum.size(); ++i)
        if (u < cum[i]) return i;
      return static_cast<Value>(cum.size() - 1);
    }
    case Kind::kTuple: {
      Tuple t = inner_->sample_full(rng);
      return static_cast<Value>(inner_->pack_index(t));
    }
  }
  return 0;
}

std::string BlockDomain::token(Value v) const {
  if (v >= upper_) throw std::out_of_range("block value out of support");
  switch (kind_) {
    case Kind::kBit:
    case Kind::kInt:
      return std::to_string(v);
    case Kind::kExplicit:
      return explicit_->tokens[v];
    case Kind::kTuple: {
      Tuple t;
      inner_->unpack_index(v, t);
      std::string out;
      for (uint32_t i = 0; i < t.size(); ++i) {
        if (i) out += ' ';
        out += inner_->block(i).token(t[i]);
      }
      return out;
    }
  }
  return {};
}

double BlockDomain::numeric(Value v) const {
  if (v >= upper_) throw std::out_of_range("block value out of support");
  if (kind_ == Kind::kExplicit) return explicit_->numeric[v];
  return static_cast<double>(v);
}

uint32_t BlockDomain::bit_length() const {
  switch (kind_) {
    case Kind::kBit:
      return 8;
    case Kind::kInt:
      return 8 * static_cast<uint32_t>(std::to_string(upper_ - 1).size());
    case Kind::kExplicit:
      return explicit_->bit_length;
    case Kind::kTuple: {
      uint32_t bits = 0;
      for (uint32_t i = 0; i < inner_->n(); ++i)
        bits += inner_->block(i).bit_length();
      return bits;
    }
  }
  return 8;
}

// ---------------------------------------------------------------------------
// ProductSpace

namespace {

uint32_t width_bits(uint64_t size) {
  uint32_t b = 0;
  uint64_t v = size - 1;
  while (v) {
    ++b;
    v >>= 1;
  }
  return b == 0 ? 1 : b;  // single-element supports still take one slot bit
}

}  // namespace

ProductSpace::ProductSpace(std::vector<BlockDomain> blocks)
    : blocks_(std::move(blocks)) {
  packed_ = !blocks_.empty();
  uint32_t bits = 0;
  bool overflow = false;
  uint64_t size = 1;
  bool size_overflow = false;
  for (const auto& b : blocks_) {
    if (!b.is_uniform_bit()) packed_ = false;
    uint32_t w = width_bits(b.size());
    if (bits + w > 64) overflow = true;
    bits += w;
    if (!size_overflow) {
      if (b.size() != 0 && size > ~uint64_t{0} / b.size())
        size_overflow = true;
      else
        size *= b.size();
    }
  }
  index_bits_ = overflow ? 65 : bits;
  if (!size_overflow) support_size_ = size;
  if (blocks_.empty()) {
    packed_ = false;
    support_size_ = 1;
    index_bits_ = 0;
  }
}

ProductSpace ProductSpace::uniform_bits(uint32_t n) {
  std::vector<BlockDomain> blocks(n, BlockDomain::uniform_bit());
  return ProductSpace(std::move(blocks));
}

ProductSpace ProductSpace::uniform_ints(uint32_t n, uint32_t upper) {
  std::vector<BlockDomain> blocks(n, BlockDomain::uniform_int(upper));
  return ProductSpace(std::move(blocks));
}

ProductSpace ProductSpace::explicit_blocks(
    std::vector<std::vector<std::pair<std::string, double>>> blocks) {
  std::vector<BlockDomain> out;
  out.reserve(blocks.size());
  for (auto& spec : blocks) {
    std::vector<std::string> tokens;
    std::vector<double> weights;
    for (auto& [t, w] : spec) {
      tokens.push_back(std::move(t));
      weights.push_back(w);
    }
    out.push_back(
        BlockDomain::explicit_weighted(std::move(tokens), std::move(weights)));
  }
  return ProductSpace(std::move(out));
}

ProductSpace ProductSpace::power(std::shared_ptr<const ProductSpace> inner,
                                 uint32_t m) {
  std::vector<BlockDomain> blocks(m, BlockDomain::tuple_valued(inner));
  return ProductSpace(std::move(blocks));
}

Value ProductSpace::sample_block(uint32_t i, RandomStream& rng) const {
  if (i >= n()) throw std::out_of_range("sample_block: index out of range");
  return blocks_[i].sample(rng);
}

void ProductSpace::sample_full(RandomStream& rng, Tuple& out) const {
  out.resize(n());
  for (uint32_t i = 0; i < n(); ++i) out[i] = blocks_[i].sample(rng);
}

Tuple ProductSpace::sample_full(RandomStream& rng) const {
  Tuple t;
  sample_full(rng, t);
  return t;
}

void ProductSpace::enumerate(
    uint64_t cap, const std::function<void(const Tuple&, double)>& fn) const {
  if (!enumerable(cap))
    throw std::runtime_error("enumerate: support exceeds cap or is unbounded");
  Tuple t(n(), 0);
  // mixed-radix odometer with an incrementally maintained weight product
  std::vector<double> partial(n() + 1, 1.0);
  for (uint32_t i = 0; i < n(); ++i)
    partial[i + 1] = partial[i] * blocks_[i].weight(0);
  while (true) {
    fn(t, partial[n()]);
    uint32_t i = n();
    while (i > 0) {
      --i;
      if (++t[i] < blocks_[i].size()) break;
      t[i] = 0;
      if (i == 0) return;
    }
    if (n() == 0) return;
    for (uint32_t j = i; j < n(); ++j)
      partial[j + 1] = partial[j] * blocks_[j].weight(t[j]);
  }
}

uint64_t ProductSpace::pack_index(Prefix t) const {
  uint64_t key = 0;
  for (uint32_t i = 0; i < t.size(); ++i) key = key * blocks_[i].size() + t[i];
  return key;
}

void ProductSpace::unpack_index(uint64_t key, Tuple& out) const {
  out.resize(n());
  for (uint32_t i = n(); i-- > 0;) {
    uint64_t s = blocks_[i].size();
    out[i] = static_cast<Value>(key % s);
    key /= s;
  }
}

double ProductSpace::probability(Prefix t) const {
  double p = 1.0;
  for (uint32_t i = 0; i < t.size(); ++i) p *= blocks_[i].weight(t[i]);
  return p;
}

uint32_t ProductSpace::max_block_bits() const {
  uint32_t l = 0;
  for (const auto& b : blocks_) l = std::max(l, b.bit_length());
  return l;
}

uint32_t hamming(Prefix a, Prefix b) {
  if (a.size() != b.size())
    throw std::invalid_argument("hamming: length mismatch");
  uint32_t d = 0;
  for (size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

// ---------------------------------------------------------------------------
// ScratchTuple

ScratchTuple::ScratchTuple(const ProductSpace& space, Prefix fixed)
    : space_(&space),
      n_(space.n()),
      prefix_len_(static_cast<uint32_t>(fixed.size())) {
  if (prefix_len_ > n_) throw std::invalid_argument("prefix longer than space");
  if (space.packed()) {
    words_.assign(space.word_count(), 0);
    for (uint32_t i = 0; i < prefix_len_; ++i)
      if (fixed[i]) words_[i >> 6] |= uint64_t{1} << (i & 63);
    boundary_word_ = prefix_len_ >> 6;
    uint32_t rem = prefix_len_ & 63;
    boundary_keep_ = rem ? ((uint64_t{1} << rem) - 1) : 0;
    boundary_prefix_ = boundary_word_ < words_.size()
                           ? (words_[boundary_word_] & boundary_keep_)
                           : 0;
    uint32_t tail = n_ & 63;
    tail_mask_ = tail ? ((uint64_t{1} << tail) - 1) : ~uint64_t{0};
  } else {
    values_.assign(fixed.begin(), fixed.end());
    values_.resize(n_, 0);
  }
}

void ScratchTuple::resample_suffix_generic(RandomStream& rng) {
  for (uint32_t i = prefix_len_; i < n_; ++i)
    values_[i] = space_->block(i).sample(rng);
}

}  // namespace tamper
