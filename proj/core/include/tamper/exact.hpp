#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "tamper/objective.hpp"
#include "tamper/space.hpp"

namespace tamper {

/// Exact conditional means of an objective over an enumerable space, i.e.
/// the gamma = 0 oracle family. Two backends:
///   * table: one bottom-up sweep fills every prefix's conditional mean
///     (chosen when the whole prefix tree fits under table_entry_cap);
///   * streaming: enumerate continuations per query, memoizing only queried
///     prefixes. Reads are concurrent; inserts are serialized.
class ExactOracle {
 public:
  ExactOracle(const ProductSpace& space, const Objective& objective,
              uint64_t enumeration_cap = kDefaultEnumerationCap,
              uint64_t table_entry_cap = uint64_t{1} << 26);

  const ProductSpace& space() const { return *space_; }
  const Objective& objective() const { return *objective_; }

  /// E[f | first prefix.size() blocks fixed]. avg({}) is the initial mean.
  double avg(Prefix prefix) const;
  double mu() const { return avg({}); }

  /// avg(prefix) - avg(prefix without its last block); prefix must be
  /// nonempty.
  double gain(Prefix prefix) const;

  struct Best {
    double gain;
    Value block;
  };
  /// Max over the next block's support of gain(prefix + v), with the
  /// lowest-index argmax. Always >= 0 up to rounding: some block value has
  /// nonnegative gain by averaging.
  Best max_gain(Prefix prefix) const;

  bool has_table() const { return table_built_; }
  void ensure_table() const;

 private:
  friend struct ExactAttackWalker;

  double table_avg(uint32_t level, uint64_t rank) const;
  double streaming_avg(Prefix prefix) const;
  uint64_t rank_of(Prefix prefix) const;

  const ProductSpace* space_;
  const Objective* objective_;
  uint64_t enumeration_cap_;
  uint64_t table_entry_cap_;

  // table backend: levels_[i][rank] = E[f | prefix of length i with `rank`],
  // leaf level stored as packed bits
  mutable std::vector<std::vector<double>> levels_;
  mutable std::vector<uint64_t> leaf_bits_;
  mutable bool table_built_ = false;
  mutable std::once_flag table_once_;

  // streaming backend memo
  mutable std::unordered_map<uint64_t, double> memo_;
  mutable std::shared_mutex memo_mx_;
};

/// Exact evaluation of the threshold attack with exact oracles: propagates
/// the full input distribution through the deterministic tamper rule, so the
/// returned moments carry no sampling noise (only float accumulation).
struct ExactAttackStats {
  double bias = 0.0;              // E[f(tampered)]
  double expected_tampered = 0.0; // E[T]
  double expected_hamming = 0.0;  // E[d_H(original, tampered)]
  /// Min over reachable prefixes of E_u[gain * kept-step indicator]; the
  /// approximate-martingale positivity witness, >= -1e-12 when healthy.
  double min_step_drift = 0.0;
  uint64_t reachable_prefixes = 0;
};

ExactAttackStats enumerate_attack(const ExactOracle& oracle, double tau);
ExactAttackStats enumerate_attack(const ProductSpace& space,
                                  const Objective& objective, double tau,
                                  uint64_t enumeration_cap =
                                      kDefaultEnumerationCap);

}  // namespace tamper
