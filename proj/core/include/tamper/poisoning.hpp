#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tamper/attack.hpp"
#include "tamper/evasion.hpp"
#include "tamper/objective.hpp"
#include "tamper/space.hpp"

namespace tamper {

struct ExampleView {
  TupleView x;
  Label y;
};

/// A deterministic learner, driven one training session at a time: label
/// each probe under the hypothesis learned from the training pairs. The
/// session form fits both in-process learners and the subprocess protocol.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::string name() const = 0;
  virtual void classify(std::span<const ExampleView> train,
                        std::span<const TupleView> probes,
                        std::vector<Label>& out) const = 0;
};

enum class LearnerKind { kMajorityLabel, kThreshold1D, kNearestCentroid };

/// majority_label: constant hypothesis equal to the modal training label
///   (ties broken toward the earliest-seen tied label).
/// threshold_1d: stump on a designated coordinate minimizing training error
///   (ties -> smallest cut, then the >=-maps-to-1 orientation); labels must
///   be 0/1.
/// nearest_centroid: per-class coordinate-wise modal value (the Hamming
///   median), probes classified by the nearer centroid (ties -> the class
///   seen earliest in training).
std::unique_ptr<Learner> make_toy_learner(LearnerKind kind,
                                          uint32_t coord = 0);

/// One subprocess invocation per training session: training pairs as
/// "instance-tokens<TAB>label" lines, a blank line, then probe lines; the
/// child answers one integer label per probe and exits at EOF.
std::unique_ptr<Learner> make_external_learner(
    const ProductSpace& instance_space, std::string command);

/// Throws unless two sessions on identical data agree on every probe; this
/// is the construction-time rejection of randomized learners.
void spot_check_determinism(const Learner& learner,
                            const ProductSpace& instance_space,
                            const LabelFunction& ground_truth, uint64_t seed);

struct ChosenInstanceGoal {
  Tuple target;  // x*, a tuple over the instance space
};

/// epsilon is the risk threshold of the confidence predicate; the empirical
/// estimator thresholds at 199*epsilon/200, honoring the epsilon' =
/// 99*epsilon/100 relaxation with a symmetric margin.
struct RiskEstimatorParams {
  double epsilon = 0.0;
  double delta_risk = 0.05;
  uint64_t n_risk = 0;

  /// n_risk defaults to ceil(3*ln(2/delta)/(epsilon/100)^2), the sample count
  /// separating risk >= epsilon from risk < 99*epsilon/100; overrides below
  /// that are rejected.
  static RiskEstimatorParams make(double epsilon, double delta_risk = 0.05,
                                  uint64_t n_risk_override = 0);
};

struct ConfidenceGoal {
  RiskEstimatorParams risk;
};

struct PoisoningProblem {
  const Learner* learner = nullptr;
  const LabelFunction* ground_truth = nullptr;
  std::shared_ptr<const ProductSpace> instance_space;
  uint32_t m = 0;  // sample complexity; one attacked block per example
  std::variant<ChosenInstanceGoal, ConfidenceGoal> goal;
};

struct PoisonReport {
  uint64_t trials = 0;
  /// Chosen-instance: the attacked Err estimate. Confidence: 1 - Conf at
  /// threshold 99*epsilon/100 (both read "probability of the bad event").
  double rate = 0.0, rate_lo = 0.0, rate_hi = 0.0;
  double t_mean = 0.0, hamming_mean = 0.0;
  double mu_used = 0.0;
  bool mu_estimated = false;
  bool degenerate = false;  // initial mean was 0; nothing to amplify
  double budget_comparator = 0.0;
  std::string comparator_name;
  uint64_t calls_total = 0;
  AttackParams params;
  std::vector<TrialStats> rows;
};

/// Owns the attacked m-block stream space and the goal objective. The labels
/// of poisoned examples are derived from the ground truth, never attacked.
class PoisoningHarness {
 public:
  PoisoningHarness(const PoisoningProblem& problem, const AttackParams& params,
                   uint64_t seed);

  const ProductSpace& stream_space() const { return *stream_space_; }
  const Objective& objective() const { return *objective_; }

  struct PoisonedStream {
    std::vector<std::pair<Tuple, Label>> examples;
    AttackTrace trace;
    bool all_labels_correct = true;
  };
  /// Attacks one training stream online; every emitted pair carries the
  /// ground-truth label of its (possibly replaced) instance, asserted on
  /// emission. A degenerate problem (initial mean 0) returns the untampered
  /// stream.
  PoisonedStream poison_stream(RandomStream& rng) const;

  PoisonReport evaluate(uint64_t trials, uint64_t seed,
                        unsigned workers = 0) const;

  double initial_mean() const { return mu_; }

 private:
  PoisoningProblem problem_;
  AttackParams params_;
  std::shared_ptr<const ProductSpace> stream_space_;
  std::unique_ptr<Objective> objective_;
  std::unique_ptr<ExactOracle> exact_;
  double mu_ = 0.0;
  bool mu_estimated_ = false;
  bool degenerate_ = false;
};

/// The goal objectives, exposed for direct testing. Exact-mode objectives
/// memoize per distinct training stream; Monte Carlo mode never caches.
std::unique_ptr<Objective> chosen_instance_objective(
    const PoisoningProblem& problem,
    std::shared_ptr<const ProductSpace> stream_space, bool memoize);
std::unique_ptr<Objective> confidence_objective(
    const PoisoningProblem& problem,
    std::shared_ptr<const ProductSpace> stream_space, bool memoize,
    uint64_t seed);

}  // namespace tamper
