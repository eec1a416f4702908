#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "tamper/estimator.hpp"
#include "tamper/exact.hpp"
#include "tamper/objective.hpp"
#include "tamper/rng.hpp"
#include "tamper/space.hpp"

namespace tamper {

enum class OracleMode { kExact, kMonteCarlo };

/// The parameter schedule from the main theorem's proof: k = ln(2/(1-rho)),
/// tau = mu/(1.9*sqrt(k*n)), gamma = min of four expressions. Supported for
/// reporting and unit-tested, but its gamma shrinks like 1/n^2 (and the
/// estimator cost like 1/gamma^3), so it is not executable beyond tiny n.
struct ScheduleInfo {
  double k;
  double tau;
  double gamma;
  std::array<double, 4> gamma_terms;
};
ScheduleInfo schedule_params(uint32_t n, double mu, double rho);

struct AttackParams {
  double tau = 0.0;
  double gamma = 0.0;  // 0 selects the exact-oracle mode
  OracleMode mode = OracleMode::kExact;
  EstimatorParams estimator;        // derived from gamma in Monte Carlo mode
  std::optional<double> mu;         // known initial mean, if any
  double rho = 0.99;                // target mean used by comparators

  static AttackParams exact(double tau);
  static AttackParams monte_carlo(double tau, double gamma);
  static AttackParams from_schedule(uint32_t n, double mu, double rho);
  void validate() const;
};

/// Per-step outcome: tampered proactively (a large estimated max gain),
/// tampered reactively (the observed block looked harmful), or kept.
enum class StepKind : uint8_t { kSeekGain, kAvoidLoss, kKeep };

struct StepEvent {
  StepKind kind;
  Value original;
  Value chosen;
};

struct AttackTrace {
  std::vector<StepEvent> steps;
  uint32_t tamper_count = 0;   // steps with kind != kKeep
  uint32_t hamming_cost = 0;   // coordinates actually changed
  bool objective_value = false;
  /// Objective evaluations consumed (Monte Carlo mode) or gain-oracle
  /// queries issued (exact mode; the enumeration backend amortizes its
  /// evaluations across trials, so per-trial evaluation counts would be
  /// scheduling-dependent).
  uint64_t oracle_calls = 0;
};

/// The gain-oracle pair the step rule consumes: the gain of a just-fixed
/// block and the (approximate) best block with its gain. Implementations
/// draw from the caller's stream only.
class GainOracle {
 public:
  virtual ~GainOracle() = default;
  /// Gain of the last block of `prefix` relative to the shorter prefix.
  virtual double gain(Prefix prefix, RandomStream& rng) = 0;
  struct Best {
    double gain;
    Value block;
  };
  virtual Best max_gain(Prefix prefix, RandomStream& rng) = 0;
  virtual uint64_t calls() const = 0;
};

class ExactGainOracle final : public GainOracle {
 public:
  explicit ExactGainOracle(const ExactOracle& oracle) : oracle_(&oracle) {}
  double gain(Prefix prefix, RandomStream&) override {
    ++queries_;
    return oracle_->gain(prefix);
  }
  Best max_gain(Prefix prefix, RandomStream&) override {
    ++queries_;
    auto b = oracle_->max_gain(prefix);
    return Best{b.gain, b.block};
  }
  uint64_t calls() const override { return queries_; }

 private:
  const ExactOracle* oracle_;
  uint64_t queries_ = 0;
};

class MonteCarloGainOracle final : public GainOracle {
 public:
  MonteCarloGainOracle(const ProductSpace& space, const Objective& objective,
                       const EstimatorParams& params)
      : space_(&space), objective_(&objective), params_(params) {}
  double gain(Prefix prefix, RandomStream& rng) override {
    evals_ += 2 * params_.k_gain;
    return estimate_gain(*space_, *objective_, prefix, params_, rng);
  }
  Best max_gain(Prefix prefix, RandomStream& rng) override {
    evals_ += 2 * params_.k_gain * params_.k_max;
    auto g = estimate_max_gain(*space_, *objective_, prefix, params_, rng);
    return Best{g.gain, g.block};
  }
  uint64_t calls() const override { return evals_; }

 private:
  const ProductSpace* space_;
  const Objective* objective_;
  EstimatorParams params_;
  uint64_t evals_ = 0;
};

/// One online step: the max-gain probe runs first and its block doubles as
/// the replacement for both tampering branches; the incoming block is only
/// consulted when the probe stays below tau. Depends on nothing beyond
/// (finalized prefix, incoming block, oracle randomness).
StepEvent tamper_step(Prefix done, Value incoming, const AttackParams& params,
                      GainOracle& oracle, RandomStream& rng);

/// Runs the attack over a pre-sampled untampered vector.
std::pair<Tuple, AttackTrace> run_attack_on(const ProductSpace& space,
                                            const Objective& objective,
                                            const AttackParams& params,
                                            GainOracle& oracle,
                                            const Tuple& original,
                                            RandomStream& rng);

/// Samples the untampered vector from the space, then attacks it.
std::pair<Tuple, AttackTrace> run_attack(const ProductSpace& space,
                                         const Objective& objective,
                                         const AttackParams& params,
                                         GainOracle& oracle,
                                         RandomStream& rng);

struct MeanEstimate {
  double mean;
  double lo, hi;  // Wilson 95% interval
  uint64_t samples;
};

/// Chernoff-sized default: ceil(3*ln(2/delta)/eps^2) fresh samples.
uint64_t default_mu_samples(double eps = 0.05, double delta = 0.01);
MeanEstimate estimate_mu(const ProductSpace& space, const Objective& objective,
                         uint64_t samples, RandomStream& rng);

struct TrialStats {
  uint32_t trial;
  bool objective_value;
  uint32_t tampered;
  uint32_t hamming;
  uint64_t oracle_calls;
};

struct TheoreticalBounds {
  double ideal_bias = 0.0;                  // gamma = 0 bias floor
  std::optional<double> ideal_budget;       // gamma = 0 budget ceiling
  double mc_bias_statement = 0.0;
  double mc_bias_proof = 0.0;
  std::optional<double> mc_budget;          // absent when tau <= 2*gamma
  std::optional<double> theorem_budget;     // needs mu < rho
};

struct AttackReport {
  uint64_t trials = 0;
  double bias_hat = 0.0, bias_lo = 0.0, bias_hi = 0.0;
  double t_mean = 0.0, hamming_mean = 0.0;
  uint64_t calls_total = 0;
  double mu_used = 0.0;
  bool mu_estimated = false;
  AttackParams params;
  TheoreticalBounds bounds;
  std::vector<TrialStats> rows;
};

/// Runs `trials` independent attacks with per-trial streams derived from
/// (seed, trial index) and aggregates in trial order, so the report is
/// identical for any worker count. mu is taken from params.mu when present,
/// otherwise estimated first.
AttackReport measure(const ProductSpace& space, const Objective& objective,
                     const AttackParams& params, uint64_t trials,
                     uint64_t seed, unsigned workers = 0);

/// Wilson 95% score interval for a binomial proportion.
std::pair<double, double> wilson_interval(double p_hat, uint64_t n);

TheoreticalBounds attach_bounds(uint32_t n, double mu, const AttackParams& p);

}  // namespace tamper
