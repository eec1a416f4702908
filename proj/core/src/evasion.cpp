#include "tamper/evasion.hpp"

#include <atomic>
#include <stdexcept>
#include <thread>

#include "tamper/bounds.hpp"

namespace tamper {

namespace {

class ObjectiveLabel final : public LabelFunction {
 public:
  explicit ObjectiveLabel(std::shared_ptr<const Objective> f)
      : f_(std::move(f)) {}
  std::string name() const override { return f_->name(); }
  Label classify(const TupleView& x) const override { return f_->eval(x); }

 private:
  std::shared_ptr<const Objective> f_;
};

class ConstLabel final : public LabelFunction {
 public:
  explicit ConstLabel(Label l) : l_(l) {}
  std::string name() const override {
    return "const(" + std::to_string(l_) + ")";
  }
  Label classify(const TupleView&) const override { return l_; }

 private:
  Label l_;
};

class ErrorRegionObjective final : public Objective {
 public:
  ErrorRegionObjective(const LabelFunction& h, const LabelFunction& c)
      : h_(&h), c_(&c) {}
  std::string name() const override {
    return "error_region(" + h_->name() + "," + c_->name() + ")";
  }
  bool eval_raw(const TupleView& x) const override {
    return h_->classify(x) != c_->classify(x);
  }

 private:
  const LabelFunction* h_;
  const LabelFunction* c_;
};

}  // namespace

std::unique_ptr<LabelFunction> make_label_function(
    std::shared_ptr<const Objective> objective) {
  return std::make_unique<ObjectiveLabel>(std::move(objective));
}

std::unique_ptr<LabelFunction> make_const_label(Label label) {
  return std::make_unique<ConstLabel>(label);
}

std::unique_ptr<Objective> error_region_objective(const EvasionProblem& p) {
  if (!p.hypothesis || !p.ground_truth)
    throw std::invalid_argument("evasion: hypothesis and ground truth required");
  return std::make_unique<ErrorRegionObjective>(*p.hypothesis,
                                                *p.ground_truth);
}

EvasionHarness::EvasionHarness(const EvasionProblem& problem,
                               const AttackParams& params)
    : problem_(problem), params_(params) {
  params_.validate();
  error_region_ = error_region_objective(problem_);
  if (params_.mode == OracleMode::kExact)
    exact_ = std::make_unique<ExactOracle>(*problem_.space, *error_region_);
}

std::pair<Tuple, AttackTrace> EvasionHarness::attack_instance(
    const Tuple& x, RandomStream& rng) const {
  std::unique_ptr<GainOracle> oracle;
  if (params_.mode == OracleMode::kExact)
    oracle = std::make_unique<ExactGainOracle>(*exact_);
  else
    oracle = std::make_unique<MonteCarloGainOracle>(
        *problem_.space, *error_region_, params_.estimator);
  return run_attack_on(*problem_.space, *error_region_, params_, *oracle, x,
                       rng);
}

EvasionReport EvasionHarness::evaluate(uint64_t trials, uint64_t seed,
                                       unsigned workers) const {
  if (trials < 1) throw std::invalid_argument("evaluate: trials >= 1");
  EvasionReport report;
  report.params = params_;
  report.trials = trials;
  if (problem_.mu) {
    report.mu_used = *problem_.mu;
    report.mu_estimated = false;
  } else if (exact_) {
    report.mu_used = exact_->mu();
    report.mu_estimated = false;
  } else {
    RandomStream mu_rng = RandomStream::derive(seed, stream_tag::kMuEstimate, 0);
    report.mu_used =
        estimate_mu(*problem_.space, *error_region_, default_mu_samples(),
                    mu_rng)
            .mean;
    report.mu_estimated = true;
  }
  if (!(report.mu_used > 0.0))
    throw std::invalid_argument(
        "evasion: initial risk mu must be positive for the reduction");

  report.rows.resize(trials);
  std::atomic<uint64_t> next{0};
  auto worker = [&] {
    while (true) {
      uint64_t t = next.fetch_add(1, std::memory_order_relaxed);
      if (t >= trials) return;
      RandomStream rng = RandomStream::derive(seed, stream_tag::kTrial, t);
      Tuple x = problem_.space->sample_full(rng);
      auto [x_adv, trace] = attack_instance(x, rng);
      report.rows[t] = TrialStats{static_cast<uint32_t>(t),
                                  trace.objective_value, trace.tamper_count,
                                  trace.hamming_cost, trace.oracle_calls};
    }
  };
  unsigned count = workers ? workers : std::thread::hardware_concurrency();
  if (count <= 1 || trials == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < count; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  uint64_t hits = 0, t_sum = 0, h_sum = 0, calls = 0;
  for (const auto& row : report.rows) {
    hits += row.objective_value;
    t_sum += row.tampered;
    h_sum += row.hamming;
    calls += row.oracle_calls;
  }
  report.adversarial_risk = static_cast<double>(hits) / trials;
  std::tie(report.risk_lo, report.risk_hi) =
      wilson_interval(report.adversarial_risk, trials);
  report.t_mean = static_cast<double>(t_sum) / trials;
  report.hamming_mean = static_cast<double>(h_sum) / trials;
  report.calls_total = calls;
  if (report.mu_used < params_.rho)
    report.budget_comparator =
        bounds::theorem_budget(problem_.space->n(), report.mu_used,
                               params_.rho);
  return report;
}

}  // namespace tamper
