#include "tamper/attack.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "tamper/bounds.hpp"

namespace tamper {

ScheduleInfo schedule_params(uint32_t n, double mu, double rho) {
  if (n < 1) throw std::invalid_argument("schedule_params: n must be >= 1");
  if (!(mu > 0.0 && mu < rho && rho < 1.0))
    throw std::invalid_argument("schedule_params: need 0 < mu < rho < 1");
  ScheduleInfo s;
  s.k = std::log(2.0 / (1.0 - rho));
  s.tau = mu / (1.9 * std::sqrt(s.k * n));
  double nd = n;
  s.gamma_terms = {mu / (20.0 * nd), mu / (80.0 * std::sqrt(s.k * nd)),
                   (1.0 - rho) / (8.0 * nd),
                   std::sqrt(std::log(2.0 / (1.0 - rho))) /
                       (3.0 * nd * std::sqrt(nd))};
  s.gamma = s.gamma_terms[0];
  for (double g : s.gamma_terms) s.gamma = std::min(s.gamma, g);
  return s;
}

AttackParams AttackParams::exact(double tau) {
  AttackParams p;
  p.tau = tau;
  p.gamma = 0.0;
  p.mode = OracleMode::kExact;
  p.validate();
  return p;
}

AttackParams AttackParams::monte_carlo(double tau, double gamma) {
  AttackParams p;
  p.tau = tau;
  p.gamma = gamma;
  p.mode = OracleMode::kMonteCarlo;
  p.estimator = EstimatorParams::from_gamma(gamma);
  p.validate();
  return p;
}

AttackParams AttackParams::from_schedule(uint32_t n, double mu, double rho) {
  ScheduleInfo s = schedule_params(n, mu, rho);
  AttackParams p = monte_carlo(s.tau, s.gamma);
  p.mu = mu;
  p.rho = rho;
  return p;
}

void AttackParams::validate() const {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("attack params: tau must lie in (0,1)");
  if (mode == OracleMode::kExact) {
    if (gamma != 0.0)
      throw std::invalid_argument("attack params: exact mode means gamma = 0");
  } else {
    if (!(gamma > 0.0 && gamma < 1.0))
      throw std::invalid_argument(
          "attack params: monte carlo mode needs gamma in (0,1)");
  }
  if (mu && !(*mu >= 0.0 && *mu <= 1.0))
    throw std::invalid_argument("attack params: mu must lie in [0,1]");
}

StepEvent tamper_step(Prefix done, Value incoming, const AttackParams& params,
                      GainOracle& oracle, RandomStream& rng) {
  GainOracle::Best best = oracle.max_gain(done, rng);
  if (best.gain >= params.tau)
    return StepEvent{StepKind::kSeekGain, incoming, best.block};
  Tuple ext(done.begin(), done.end());
  ext.push_back(incoming);
  double g = oracle.gain(ext, rng);
  if (g <= -params.tau)
    return StepEvent{StepKind::kAvoidLoss, incoming, best.block};
  return StepEvent{StepKind::kKeep, incoming, incoming};
}

std::pair<Tuple, AttackTrace> run_attack_on(const ProductSpace& space,
                                            const Objective& objective,
                                            const AttackParams& params,
                                            GainOracle& oracle,
                                            const Tuple& original,
                                            RandomStream& rng) {
  params.validate();
  const uint32_t n = space.n();
  if (original.size() != n)
    throw std::invalid_argument("run_attack: original has wrong dimension");
  Tuple tampered;
  tampered.reserve(n);
  AttackTrace trace;
  trace.steps.reserve(n);
  uint64_t calls_before = oracle.calls();
  for (uint32_t i = 0; i < n; ++i) {
    StepEvent ev = tamper_step(Prefix(tampered), original[i], params, oracle, rng);
    if (ev.chosen >= space.block(i).size())
      throw std::logic_error("tamper_step left the block support");
    tampered.push_back(ev.chosen);
    trace.tamper_count += ev.kind != StepKind::kKeep;
    trace.hamming_cost += ev.chosen != ev.original;
    trace.steps.push_back(ev);
  }
  trace.objective_value = objective.eval(TupleView::of(tampered));
  trace.oracle_calls = (oracle.calls() - calls_before) + 1;
  return {std::move(tampered), std::move(trace)};
}

std::pair<Tuple, AttackTrace> run_attack(const ProductSpace& space,
                                         const Objective& objective,
                                         const AttackParams& params,
                                         GainOracle& oracle,
                                         RandomStream& rng) {
  Tuple original = space.sample_full(rng);
  return run_attack_on(space, objective, params, oracle, original, rng);
}

uint64_t default_mu_samples(double eps, double delta) {
  return static_cast<uint64_t>(
      std::ceil(3.0 * std::log(2.0 / delta) / (eps * eps)));
}

MeanEstimate estimate_mu(const ProductSpace& space, const Objective& objective,
                         uint64_t samples, RandomStream& rng) {
  if (samples < 1) throw std::invalid_argument("estimate_mu: samples >= 1");
  double mean = estimate_avg(space, objective, {}, samples, rng);
  auto [lo, hi] = wilson_interval(mean, samples);
  return MeanEstimate{mean, lo, hi, samples};
}

std::pair<double, double> wilson_interval(double p_hat, uint64_t n) {
  if (n == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  double nz = z * z / n;
  double center = (p_hat + nz / 2.0) / (1.0 + nz);
  double half =
      z * std::sqrt(p_hat * (1.0 - p_hat) / n + nz / (4.0 * n)) / (1.0 + nz);
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

TheoreticalBounds attach_bounds(uint32_t n, double mu, const AttackParams& p) {
  TheoreticalBounds b;
  if (mu > 0.0) {
    b.ideal_bias = bounds::ideal_bias_bound(n, mu, p.tau);
    b.ideal_budget = bounds::ideal_budget_bound(n, mu, p.tau);
    b.mc_bias_statement = bounds::bias_lower_bound(
        n, mu, p.tau, p.gamma, bounds::BiasExponent::kStatement);
    b.mc_bias_proof = bounds::bias_lower_bound(n, mu, p.tau, p.gamma,
                                               bounds::BiasExponent::kProof);
    if (p.tau > 2.0 * p.gamma)
      b.mc_budget = bounds::budget_upper_bound(n, mu, p.tau, p.gamma);
    if (mu < p.rho && p.rho < 1.0)
      b.theorem_budget = bounds::theorem_budget(n, mu, p.rho);
  }
  return b;
}

AttackReport measure(const ProductSpace& space, const Objective& objective,
                     const AttackParams& params, uint64_t trials,
                     uint64_t seed, unsigned workers) {
  params.validate();
  if (trials < 1) throw std::invalid_argument("measure: trials >= 1");

  AttackReport report;
  report.params = params;
  report.trials = trials;
  if (params.mu) {
    report.mu_used = *params.mu;
    report.mu_estimated = false;
  } else {
    RandomStream mu_rng =
        RandomStream::derive(seed, stream_tag::kMuEstimate, 0);
    report.mu_used =
        estimate_mu(space, objective, default_mu_samples(), mu_rng).mean;
    report.mu_estimated = true;
  }

  std::unique_ptr<ExactOracle> shared_exact;
  if (params.mode == OracleMode::kExact)
    shared_exact = std::make_unique<ExactOracle>(space, objective);

  report.rows.resize(trials);
  std::atomic<uint64_t> next{0};
  auto worker = [&] {
    while (true) {
      uint64_t t = next.fetch_add(1, std::memory_order_relaxed);
      if (t >= trials) return;
      RandomStream rng = RandomStream::derive(seed, stream_tag::kTrial, t);
      std::unique_ptr<GainOracle> oracle;
      if (params.mode == OracleMode::kExact)
        oracle = std::make_unique<ExactGainOracle>(*shared_exact);
      else
        oracle = std::make_unique<MonteCarloGainOracle>(space, objective,
                                                        params.estimator);
      auto [tampered, trace] =
          run_attack(space, objective, params, *oracle, rng);
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

  // aggregation in trial order, independent of scheduling
  uint64_t hits = 0, t_sum = 0, h_sum = 0, calls = 0;
  for (const auto& row : report.rows) {
    hits += row.objective_value;
    t_sum += row.tampered;
    h_sum += row.hamming;
    calls += row.oracle_calls;
  }
  report.bias_hat = static_cast<double>(hits) / trials;
  std::tie(report.bias_lo, report.bias_hi) =
      wilson_interval(report.bias_hat, trials);
  report.t_mean = static_cast<double>(t_sum) / trials;
  report.hamming_mean = static_cast<double>(h_sum) / trials;
  report.calls_total = calls;
  report.bounds = attach_bounds(space.n(), report.mu_used, params);
  return report;
}

}  // namespace tamper
