#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "tamper/attack.hpp"
#include "tamper/objective.hpp"
#include "tamper/space.hpp"

namespace tamper {

/// Labels are opaque comparable tokens; integer-valued throughout this
/// artifact (multi-class is fine, the reduction only tests equality).
using Label = int32_t;

class LabelFunction {
 public:
  virtual ~LabelFunction() = default;
  virtual std::string name() const = 0;
  virtual Label classify(const TupleView& x) const = 0;
};

/// Reads an objective as a {0,1}-valued label function.
std::unique_ptr<LabelFunction> make_label_function(
    std::shared_ptr<const Objective> objective);
std::unique_ptr<LabelFunction> make_const_label(Label label);
/// Subprocess label function; tuple tokens in, one integer label token out.
std::unique_ptr<LabelFunction> make_external_label(const ProductSpace& space,
                                                   std::string command);

/// A hypothesis/ground-truth pair over a product instance distribution,
/// with the initial risk if known.
struct EvasionProblem {
  const ProductSpace* space = nullptr;
  const LabelFunction* hypothesis = nullptr;
  const LabelFunction* ground_truth = nullptr;
  std::optional<double> mu;
};

/// The objective whose mean the attack drives up: 1 exactly on the error
/// region. Each evaluation costs one hypothesis call and one ground-truth
/// call.
std::unique_ptr<Objective> error_region_objective(const EvasionProblem& p);

struct EvasionReport {
  uint64_t trials = 0;
  double adversarial_risk = 0.0, risk_lo = 0.0, risk_hi = 0.0;
  double t_mean = 0.0, hamming_mean = 0.0;
  double mu_used = 0.0;
  bool mu_estimated = false;
  double budget_comparator = 0.0;  // (2/mu)*sqrt(n*ln(2/(1-rho)))
  uint64_t calls_total = 0;
  AttackParams params;
  std::vector<TrialStats> rows;
};

/// Wires the reduction up once (error-region objective, and the shared
/// enumeration oracle in exact mode) so instances can be attacked cheaply.
class EvasionHarness {
 public:
  EvasionHarness(const EvasionProblem& problem, const AttackParams& params);

  const Objective& objective() const { return *error_region_; }

  /// Perturbs one test instance; the returned tuple stays in the instance
  /// space's support by construction.
  std::pair<Tuple, AttackTrace> attack_instance(const Tuple& x,
                                                RandomStream& rng) const;

  /// Attacks `trials` fresh instances drawn from the space and aggregates.
  /// The budget is averaged over all fresh instances, including those that
  /// started inside the error region.
  EvasionReport evaluate(uint64_t trials, uint64_t seed,
                         unsigned workers = 0) const;

 private:
  EvasionProblem problem_;
  AttackParams params_;
  std::unique_ptr<Objective> error_region_;
  std::unique_ptr<ExactOracle> exact_;
};

}  // namespace tamper
