#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tamper/space.hpp"

namespace tamper {

/// A 0/1-valued oracle over full n-tuples. Evaluation must be pure: the same
/// tuple always yields the same output. The call counter is safe to bump
/// concurrently; tight loops evaluate via eval_raw() and account in bulk with
/// add_calls() so the counter never becomes a contention point.
/// Structural description of objectives of the form
/// test(popcount(words & masks)); lets the samplers fuse generation and
/// evaluation on packed spaces. Results are identical to eval_raw.
struct PackedCountSpec {
  enum class Test { kGreaterEq, kEqual, kParity, kAny };
  std::span<const uint64_t> masks;  // one mask per packed word
  Test test = Test::kAny;
  uint32_t threshold = 0;

  bool apply(uint32_t count) const {
    switch (test) {
      case Test::kGreaterEq:
        return count >= threshold;
      case Test::kEqual:
        return count == threshold;
      case Test::kParity:
        return count & 1;
      case Test::kAny:
        return count > 0;
    }
    return false;
  }
};

class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::string name() const = 0;
  virtual bool eval_raw(const TupleView& t) const = 0;
  /// Non-null for masked-count objectives evaluated over packed tuples.
  virtual const PackedCountSpec* packed_count() const { return nullptr; }

  bool eval(const TupleView& t) const {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return eval_raw(t);
  }
  bool eval(const Tuple& t) const { return eval(TupleView::of(t)); }
  void add_calls(uint64_t k) const {
    calls_.fetch_add(k, std::memory_order_relaxed);
  }
  uint64_t call_count() const {
    return calls_.load(std::memory_order_relaxed);
  }

 private:
  mutable std::atomic<uint64_t> calls_{0};
};

// Built-in objectives over binary blocks (the value of block i is its bit).
std::unique_ptr<Objective> make_and(uint32_t n, uint32_t k);
std::unique_ptr<Objective> make_or(uint32_t n, uint32_t k);
std::unique_ptr<Objective> make_xor(uint32_t n, uint32_t k);
std::unique_ptr<Objective> make_majority(uint32_t n);  // 1 iff 2*ones >= n
std::unique_ptr<Objective> make_dictator(uint32_t n, uint32_t coord);
std::unique_ptr<Objective> make_const(bool value);
/// 1 iff sum_i w_i * numeric(value_i) >= t. Needs the space for the numeric
/// reading of non-binary blocks.
std::unique_ptr<Objective> make_threshold(const ProductSpace& space,
                                          std::vector<double> weights,
                                          double t);
/// Wraps an arbitrary function; test and reduction plumbing.
std::unique_ptr<Objective> make_function_objective(
    std::string name, std::function<bool(const TupleView&)> fn);

/// Persistent-subprocess oracle: each eval writes the tuple as one line of
/// space-separated tokens to the child's stdin and reads "0" or "1" back.
/// Evaluations are serialized internally.
std::unique_ptr<Objective> make_external(const ProductSpace& space,
                                         std::string command);

}  // namespace tamper
