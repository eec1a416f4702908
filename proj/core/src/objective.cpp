#include "tamper/objective.hpp"

#include <bit>
#include <stdexcept>

namespace tamper {

namespace {

// Masks covering the first k bit-blocks, for the packed layout.
std::vector<uint64_t> first_k_masks(uint32_t n, uint32_t k) {
  std::vector<uint64_t> m((n + 63) / 64, 0);
  for (uint32_t i = 0; i < k; ++i) m[i >> 6] |= uint64_t{1} << (i & 63);
  return m;
}

uint32_t masked_popcount(const TupleView& t, std::span<const uint64_t> m) {
  uint32_t c = 0;
  for (size_t w = 0; w < m.size(); ++w)
    c += static_cast<uint32_t>(std::popcount(t.words[w] & m[w]));
  return c;
}

// Base for objectives expressible as a test on a masked bit count; the
// packed layout evaluates via the spec, the index layout via bit().
class MaskedCountObjective : public Objective {
 public:
  MaskedCountObjective(uint32_t n, std::vector<uint64_t> masks,
                       PackedCountSpec::Test test, uint32_t threshold)
      : n_(n), masks_(std::move(masks)) {
    spec_.masks = masks_;
    spec_.test = test;
    spec_.threshold = threshold;
  }

  bool eval_raw(const TupleView& t) const override {
    uint32_t count = 0;
    if (t.words) {
      count = masked_popcount(t, spec_.masks);
    } else {
      for (uint32_t i = 0; i < n_; ++i)
        if ((masks_[i >> 6] >> (i & 63)) & 1) count += t.idx[i] & 1;
    }
    return spec_.apply(count);
  }

  const PackedCountSpec* packed_count() const override { return &spec_; }

 protected:
  uint32_t n_;
  std::vector<uint64_t> masks_;
  PackedCountSpec spec_;
};

class AndObjective final : public MaskedCountObjective {
 public:
  AndObjective(uint32_t n, uint32_t k)
      : MaskedCountObjective(n, first_k_masks(n, k),
                             PackedCountSpec::Test::kEqual, k),
        k_(k) {
    if (k > n) throw std::invalid_argument("and(k): k exceeds dimension");
  }
  std::string name() const override { return "and(" + std::to_string(k_) + ")"; }

 private:
  uint32_t k_;
};

class OrObjective final : public MaskedCountObjective {
 public:
  OrObjective(uint32_t n, uint32_t k)
      : MaskedCountObjective(n, first_k_masks(n, k),
                             PackedCountSpec::Test::kAny, 0),
        k_(k) {
    if (k > n) throw std::invalid_argument("or(k): k exceeds dimension");
  }
  std::string name() const override { return "or(" + std::to_string(k_) + ")"; }

 private:
  uint32_t k_;
};

class XorObjective final : public MaskedCountObjective {
 public:
  XorObjective(uint32_t n, uint32_t k)
      : MaskedCountObjective(n, first_k_masks(n, k),
                             PackedCountSpec::Test::kParity, 0),
        k_(k) {
    if (k > n) throw std::invalid_argument("xor(k): k exceeds dimension");
  }
  std::string name() const override { return "xor(" + std::to_string(k_) + ")"; }

 private:
  uint32_t k_;
};

class MajorityObjective final : public MaskedCountObjective {
 public:
  explicit MajorityObjective(uint32_t n)
      : MaskedCountObjective(n, first_k_masks(n, n),
                             PackedCountSpec::Test::kGreaterEq,
                             (n + 1) / 2) {}
  // 2*ones >= n, i.e. ones >= ceil(n/2); ties on even n count as 1
  std::string name() const override { return "majority"; }
};

class DictatorObjective final : public MaskedCountObjective {
 public:
  DictatorObjective(uint32_t n, uint32_t coord)
      : MaskedCountObjective(n, bit_mask(n, coord),
                             PackedCountSpec::Test::kAny, 0),
        coord_(coord) {}
  std::string name() const override {
    return "dictator(" + std::to_string(coord_ + 1) + ")";
  }

 private:
  static std::vector<uint64_t> bit_mask(uint32_t n, uint32_t coord) {
    if (coord >= n) throw std::invalid_argument("dictator: coord out of range");
    std::vector<uint64_t> m((n + 63) / 64, 0);
    m[coord >> 6] |= uint64_t{1} << (coord & 63);
    return m;
  }
  uint32_t coord_;
};

class ConstObjective final : public Objective {
 public:
  explicit ConstObjective(bool v) : v_(v) {}
  std::string name() const override { return v_ ? "const(1)" : "const(0)"; }
  bool eval_raw(const TupleView&) const override { return v_; }

 private:
  bool v_;
};

class ThresholdObjective final : public Objective {
 public:
  ThresholdObjective(const ProductSpace& space, std::vector<double> weights,
                     double t)
      : space_(&space), weights_(std::move(weights)), t_(t) {
    if (weights_.size() != space.n())
      throw std::invalid_argument("threshold: one weight per block required");
  }
  std::string name() const override { return "threshold"; }
  bool eval_raw(const TupleView& t) const override {
    double s = 0.0;
    if (t.words) {
      for (uint32_t i = 0; i < t.n; ++i)
        if ((t.words[i >> 6] >> (i & 63)) & 1) s += weights_[i];
    } else {
      for (uint32_t i = 0; i < t.n; ++i)
        s += weights_[i] * space_->block(i).numeric(t.idx[i]);
    }
    return s >= t_;
  }

 private:
  const ProductSpace* space_;
  std::vector<double> weights_;
  double t_;
};

class FunctionObjective final : public Objective {
 public:
  FunctionObjective(std::string name, std::function<bool(const TupleView&)> fn)
      : name_(std::move(name)), fn_(std::move(fn)) {}
  std::string name() const override { return name_; }
  bool eval_raw(const TupleView& t) const override { return fn_(t); }

 private:
  std::string name_;
  std::function<bool(const TupleView&)> fn_;
};

}  // namespace

std::unique_ptr<Objective> make_and(uint32_t n, uint32_t k) {
  return std::make_unique<AndObjective>(n, k);
}
std::unique_ptr<Objective> make_or(uint32_t n, uint32_t k) {
  return std::make_unique<OrObjective>(n, k);
}
std::unique_ptr<Objective> make_xor(uint32_t n, uint32_t k) {
  return std::make_unique<XorObjective>(n, k);
}
std::unique_ptr<Objective> make_majority(uint32_t n) {
  return std::make_unique<MajorityObjective>(n);
}
std::unique_ptr<Objective> make_dictator(uint32_t n, uint32_t coord) {
  return std::make_unique<DictatorObjective>(n, coord);
}
std::unique_ptr<Objective> make_const(bool value) {
  return std::make_unique<ConstObjective>(value);
}
std::unique_ptr<Objective> make_threshold(const ProductSpace& space,
                                          std::vector<double> weights,
                                          double t) {
  return std::make_unique<ThresholdObjective>(space, std::move(weights), t);
}
std::unique_ptr<Objective> make_function_objective(
    std::string name, std::function<bool(const TupleView&)> fn) {
  return std::make_unique<FunctionObjective>(std::move(name), std::move(fn));
}

}  // namespace tamper
