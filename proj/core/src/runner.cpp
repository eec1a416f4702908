#include "tamper/runner.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "tamper/bounds.hpp"
#include "tamper/estimator.hpp"

namespace tamper {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Exact verification suite

namespace {

struct SuiteObjective {
  std::string name;
  std::unique_ptr<Objective> objective;
};

std::vector<SuiteObjective> suite_objectives(uint32_t n) {
  std::vector<SuiteObjective> out;
  uint32_t k = (n + 1) / 2;
  out.push_back({"and", make_and(n, k)});
  out.push_back({"or", make_or(n, k)});
  out.push_back({"xor", make_xor(n, n)});
  out.push_back({"majority", make_majority(n)});
  out.push_back({"dictator", make_dictator(n, 0)});
  return out;
}

}  // namespace

std::vector<ExactSuiteCase> run_exact_suite(uint32_t n_min, uint32_t n_max,
                                            std::span<const double> taus) {
  std::vector<ExactSuiteCase> cases;
  for (uint32_t n = n_min; n <= n_max; ++n) {
    ProductSpace space = ProductSpace::uniform_bits(n);
    auto objectives = suite_objectives(n);
    // weighted threshold: weights 1..n, cut at half the maximum weight sum
    std::vector<double> weights(n);
    for (uint32_t i = 0; i < n; ++i) weights[i] = i + 1;
    double cut = std::ceil(n * (n + 1) / 4.0);
    objectives.push_back({"threshold", make_threshold(space, weights, cut)});

    for (auto& [name, objective] : objectives) {
      ExactOracle oracle(space, *objective);
      double mu = oracle.mu();
      for (double tau : taus) {
        ExactSuiteCase c;
        c.objective = name;
        c.n = n;
        c.tau = tau;
        c.mu = mu;
        c.stats = enumerate_attack(oracle, tau);
        c.bias_bound =
            mu > 0.0 ? bounds::ideal_bias_bound(n, mu, tau) : 0.0;
        c.budget_bound = bounds::ideal_budget_bound(n, mu, tau);
        c.bias_ok = c.stats.bias >= c.bias_bound - 1e-9;
        c.budget_ok = c.stats.expected_tampered <= c.budget_bound + 1e-9;
        c.drift_ok = c.stats.min_step_drift >= -1e-12;
        c.hamming_ok =
            c.stats.expected_hamming <= c.stats.expected_tampered + 1e-12;
        c.monotone_ok = c.stats.bias >= mu - 1e-9;
        cases.push_back(std::move(c));
      }
    }
  }
  return cases;
}

// ---------------------------------------------------------------------------
// Estimator tail suite

std::vector<TailCase> run_estimator_tails(uint64_t seed, uint32_t cases,
                                          uint64_t calls,
                                          std::span<const double> gammas,
                                          unsigned workers) {
  struct CaseSetup {
    ProductSpace space;
    std::unique_ptr<Objective> objective;
    std::string name;
    Tuple prefix;
    double gamma;
  };
  std::vector<CaseSetup> setups;
  RandomStream pick = RandomStream::derive(seed, stream_tag::kSelfTest, 1);
  for (uint32_t c = 0; c < cases; ++c) {
    CaseSetup s;
    uint32_t n = 4 + pick.next_below(7);  // 4..10
    s.space = ProductSpace::uniform_bits(n);
    switch (pick.next_below(5)) {
      case 0:
        s.name = "and";
        s.objective = make_and(n, (n + 1) / 2);
        break;
      case 1:
        s.name = "or";
        s.objective = make_or(n, (n + 1) / 2);
        break;
      case 2:
        s.name = "xor";
        s.objective = make_xor(n, n);
        break;
      case 3:
        s.name = "majority";
        s.objective = make_majority(n);
        break;
      default: {
        s.name = "threshold";
        std::vector<double> weights(n);
        for (uint32_t i = 0; i < n; ++i) weights[i] = i + 1;
        s.objective = make_threshold(s.space, weights,
                                     std::ceil(n * (n + 1) / 4.0));
        break;
      }
    }
    uint32_t plen = 1 + pick.next_below(n - 1);  // 1..n-1, so g and g* both exist
    s.prefix.resize(plen);
    for (auto& v : s.prefix) v = pick.next_bit();
    s.gamma = gammas[pick.next_below(static_cast<uint32_t>(gammas.size()))];
    setups.push_back(std::move(s));
  }

  std::vector<TailCase> results(setups.size());
  std::atomic<uint32_t> next{0};
  auto worker = [&] {
    while (true) {
      uint32_t c = next.fetch_add(1);
      if (c >= setups.size()) return;
      const CaseSetup& s = setups[c];
      TailCase r;
      r.objective = s.name;
      r.n = s.space.n();
      r.prefix_len = static_cast<uint32_t>(s.prefix.size());
      r.gamma = s.gamma;
      r.calls = calls;
      ExactOracle oracle(s.space, *s.objective);
      r.exact_gain = oracle.gain(s.prefix);
      EstimatorParams params = EstimatorParams::from_gamma(s.gamma);
      Prefix shorter(s.prefix.data(), s.prefix.size() - 1);
      uint64_t devs = 0, lows = 0;
      RandomStream rng =
          RandomStream::derive(seed, stream_tag::kSelfTest, 2, c);
      for (uint64_t i = 0; i < calls; ++i) {
        double g = estimate_gain(s.space, *s.objective, s.prefix, params, rng);
        devs += std::abs(g - r.exact_gain) >= s.gamma;
      }
      for (uint64_t i = 0; i < calls; ++i) {
        GainEstimate g =
            estimate_max_gain(s.space, *s.objective, shorter, params, rng);
        lows += g.gain <= -2.0 * s.gamma;
      }
      r.dev_rate = static_cast<double>(devs) / calls;
      r.low_rate = static_cast<double>(lows) / calls;
      double half = s.gamma / 2.0;
      r.dev_ceiling =
          half + 3.0 * std::sqrt(half * (1.0 - half) / calls);
      r.low_ceiling =
          s.gamma + 3.0 * std::sqrt(s.gamma * (1.0 - s.gamma) / calls);
      results[c] = std::move(r);
    }
  };
  unsigned count = workers ? workers : std::thread::hardware_concurrency();
  std::vector<std::thread> pool;
  for (unsigned i = 0; i + 1 < count; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return results;
}

// ---------------------------------------------------------------------------
// Report writing

namespace {

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

struct RowContext {
  uint64_t seed;
  uint32_t n_or_m;
  double mu;
  double rho;
  double tau;
  double gamma;
  uint64_t k_gain;
  uint64_t k_max;
};

// Column order is part of the output contract. wallclock_ms is zero in the
// CSV: rows must be byte-identical across reruns and worker counts; real
// timing lives in the summary JSON.
constexpr const char* kCsvHeader =
    "trial,seed,n_or_m,mu_hat,rho_target,tau,gamma,k_gain,k_max,"
    "objective_value,T,hamming,oracle_calls,wallclock_ms\n";

void write_rows_csv(std::ofstream& out, const RowContext& ctx,
                    const std::vector<TrialStats>& rows, double mean_value,
                    double t_mean, double hamming_mean, uint64_t calls_total) {
  out << kCsvHeader;
  auto common = [&ctx](std::ofstream& o) {
    o << ctx.seed << ',' << ctx.n_or_m << ',' << fmt(ctx.mu) << ','
      << fmt(ctx.rho) << ',' << fmt(ctx.tau) << ',' << fmt(ctx.gamma) << ','
      << ctx.k_gain << ',' << ctx.k_max << ',';
  };
  for (const auto& r : rows) {
    out << r.trial << ',';
    common(out);
    out << (r.objective_value ? 1 : 0) << ',' << r.tampered << ','
        << r.hamming << ',' << r.oracle_calls << ",0\n";
  }
  out << -1 << ',';
  common(out);
  out << fmt(mean_value) << ',' << fmt(t_mean) << ',' << fmt(hamming_mean)
      << ',' << calls_total << ",0\n";
}

struct ComparatorCheck {
  std::string name;
  double bound;
  double measured;
  bool satisfied;
};

json checks_json(const std::vector<ComparatorCheck>& checks) {
  json arr = json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name},
                   {"bound", c.bound},
                   {"measured", c.measured},
                   {"satisfied", c.satisfied}});
  return arr;
}

json config_json(const ExperimentConfig& config) {
  json j = json::object();
  for (const auto& [k, v] : config.entries()) j[k] = v;
  return j;
}

// Sample standard deviation of the mean for a count column.
double mean_sigma(const std::vector<TrialStats>& rows,
                  uint32_t TrialStats::* field) {
  if (rows.size() < 2) return 0.0;
  double mean = 0.0;
  for (const auto& r : rows) mean += r.*field;
  mean /= rows.size();
  double var = 0.0;
  for (const auto& r : rows) {
    double d = r.*field - mean;
    var += d * d;
  }
  var /= (rows.size() - 1);
  return std::sqrt(var / rows.size());
}

}  // namespace

double evaluate_bound_formula(const ExperimentConfig& config) {
  std::string formula = config.get_string("formula");
  uint32_t n = static_cast<uint32_t>(config.get_u64("n", 0));
  double mu = config.get_number("mu", 0.0);
  double rho = config.get_number("rho", 0.99);
  double tau = config.get_number("tau", 0.0);
  double gamma = config.get_number("gamma", 0.0);
  double s = config.get_number("s", 0.0);
  if (formula == "theorem_budget") return bounds::theorem_budget(n, mu, rho);
  if (formula == "confidence_budget")
    return bounds::confidence_budget(n, mu, rho);
  if (formula == "azuma") return bounds::azuma_approx_bound(n, tau, gamma, s);
  if (formula == "bias_lower") {
    auto variant = config.get_string("variant", "proof") == "statement"
                       ? bounds::BiasExponent::kStatement
                       : bounds::BiasExponent::kProof;
    return bounds::bias_lower_bound(n, mu, tau, gamma, variant);
  }
  if (formula == "budget_upper")
    return bounds::budget_upper_bound(n, mu, tau, gamma);
  if (formula == "ideal_bias") return bounds::ideal_bias_bound(n, mu, tau);
  if (formula == "ideal_budget") return bounds::ideal_budget_bound(n, mu, tau);
  throw std::invalid_argument("unknown bound formula '" + formula + "'");
}

namespace {

AttackParams params_from_config(const ExperimentConfig& config, uint32_t n,
                                std::optional<double> mu_hint) {
  std::string mode = config.get_string("mode", "exact");
  std::string source = config.get_string("params", "manual");
  AttackParams p;
  if (source == "paper_schedule") {
    double mu = config.get_number("mu", mu_hint.value_or(-1.0));
    double rho = config.get_number("rho", 0.99);
    if (!(mu > 0.0))
      throw std::invalid_argument("paper_schedule needs a known mu");
    p = AttackParams::from_schedule(n, mu, rho);
  } else if (mode == "exact") {
    p = AttackParams::exact(config.get_number("tau", 0.0));
  } else {
    p = AttackParams::monte_carlo(config.get_number("tau", 0.0),
                                  config.get_number("gamma", 0.0));
  }
  if (config.has("mu")) p.mu = config.get_number("mu", 0.0);
  p.rho = config.get_number("rho", 0.99);
  return p;
}

uint64_t config_seed(const ExperimentConfig& config) {
  if (config.has("params.seed")) return config.get_u64("params.seed", 0);
  return config.get_u64("seed", 0);
}

struct Output {
  std::filesystem::path dir;
  std::string stem;
  std::ofstream csv;
  json summary;
  std::string csv_path, json_path;

  Output(const ExperimentConfig& config, const std::string& kind_name) {
    dir = config.get_string("out", ".");
    std::filesystem::create_directories(dir);
    stem = kind_name;
    csv_path = (dir / (stem + ".csv")).string();
    json_path = (dir / (stem + "_summary.json")).string();
    csv.open(csv_path, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + csv_path);
    summary["kind"] = kind_name;
  }

  void finish(const ExperimentConfig& config, double wallclock_ms) {
    summary["config"] = config_json(config);
    summary["wallclock_ms"] = wallclock_ms;
    std::ofstream js(json_path, std::ios::binary);
    js << summary.dump(2) << '\n';
  }
};

int run_trial_kind(const ExperimentConfig& config, ExperimentKind kind,
                   Output& out) {
  uint64_t seed = config_seed(config);
  uint64_t trials = config.get_u64("trials", 100);
  unsigned workers =
      static_cast<unsigned>(config.get_u64("workers", 0));
  bool check = config.get_bool("check", false);

  std::vector<ComparatorCheck> checks;
  std::vector<TrialStats> const* rows = nullptr;
  RowContext ctx{};
  ctx.seed = seed;

  AttackReport bias_report;
  EvasionReport evasion_report;
  PoisonReport poison_report;

  // owners that must outlive evaluate()
  ProductSpace space;
  std::unique_ptr<Objective> objective;
  std::unique_ptr<LabelFunction> hypothesis, ground_truth;
  std::shared_ptr<ProductSpace> instance_space;
  std::unique_ptr<Learner> learner;

  if (kind == ExperimentKind::kBias) {
    space = make_space(parse_spec(config.raw("space")));
    objective = make_objective(parse_spec(config.raw("objective")), space);
    AttackParams params = params_from_config(config, space.n(), std::nullopt);
    bias_report = measure(space, *objective, params, trials, seed, workers);
    rows = &bias_report.rows;
    ctx.n_or_m = space.n();
    ctx.mu = bias_report.mu_used;
    ctx.rho = params.rho;
    ctx.tau = params.tau;
    ctx.gamma = params.gamma;
    ctx.k_gain = params.estimator.k_gain;
    ctx.k_max = params.estimator.k_max;
    write_rows_csv(out.csv, ctx, bias_report.rows, bias_report.bias_hat,
                   bias_report.t_mean, bias_report.hamming_mean,
                   bias_report.calls_total);

    const auto& b = bias_report.bounds;
    json bounds_json = {
        {"ideal_bias_bound", b.ideal_bias},
        {"bias_lower_bound_statement", b.mc_bias_statement},
        {"bias_lower_bound_proof", b.mc_bias_proof},
    };
    if (b.ideal_budget) bounds_json["ideal_budget_bound"] = *b.ideal_budget;
    if (b.mc_budget) bounds_json["budget_upper_bound"] = *b.mc_budget;
    if (b.theorem_budget) bounds_json["theorem_budget"] = *b.theorem_budget;
    out.summary["bounds"] = bounds_json;
    out.summary["results"] = {
        {"bias_hat", bias_report.bias_hat},
        {"bias_ci", {bias_report.bias_lo, bias_report.bias_hi}},
        {"t_mean", bias_report.t_mean},
        {"hamming_mean", bias_report.hamming_mean},
        {"oracle_calls", bias_report.calls_total},
        {"mu", bias_report.mu_used},
        {"mu_estimated", bias_report.mu_estimated},
    };

    double floor = bias_report.params.mode == OracleMode::kExact
                       ? b.ideal_bias
                       : b.mc_bias_proof;
    checks.push_back({"bias_hat_ci_vs_lower_bound", floor,
                      bias_report.bias_hi,
                      bias_report.bias_hi >= floor - 1e-12});
    if (b.theorem_budget) {
      double sigma = mean_sigma(bias_report.rows, &TrialStats::hamming);
      checks.push_back({"hamming_mean_vs_theorem_budget", *b.theorem_budget,
                        bias_report.hamming_mean,
                        bias_report.hamming_mean - 3.0 * sigma <=
                            *b.theorem_budget});
    }
    if (b.mc_budget || b.ideal_budget) {
      double bound = bias_report.params.mode == OracleMode::kExact
                         ? *b.ideal_budget
                         : *b.mc_budget;
      double sigma = mean_sigma(bias_report.rows, &TrialStats::tampered);
      checks.push_back({"t_mean_vs_budget_bound", bound, bias_report.t_mean,
                        bias_report.t_mean - 3.0 * sigma <= bound});
    }
  } else if (kind == ExperimentKind::kEvasion) {
    space = make_space(parse_spec(config.raw("space")));
    hypothesis = make_label(parse_spec(config.raw("hypothesis")), space);
    ground_truth = make_label(parse_spec(config.raw("concept")), space);
    EvasionProblem problem{&space, hypothesis.get(), ground_truth.get(), {}};
    if (config.has("mu")) problem.mu = config.get_number("mu", 0.0);
    AttackParams params = params_from_config(config, space.n(), problem.mu);
    EvasionHarness harness(problem, params);
    evasion_report = harness.evaluate(trials, seed, workers);
    rows = &evasion_report.rows;
    ctx.n_or_m = space.n();
    ctx.mu = evasion_report.mu_used;
    ctx.rho = params.rho;
    ctx.tau = params.tau;
    ctx.gamma = params.gamma;
    ctx.k_gain = params.estimator.k_gain;
    ctx.k_max = params.estimator.k_max;
    write_rows_csv(out.csv, ctx, evasion_report.rows,
                   evasion_report.adversarial_risk, evasion_report.t_mean,
                   evasion_report.hamming_mean, evasion_report.calls_total);
    out.summary["results"] = {
        {"adversarial_risk", evasion_report.adversarial_risk},
        {"risk_ci", {evasion_report.risk_lo, evasion_report.risk_hi}},
        {"t_mean", evasion_report.t_mean},
        {"hamming_mean", evasion_report.hamming_mean},
        {"oracle_calls", evasion_report.calls_total},
        {"mu", evasion_report.mu_used},
        {"mu_estimated", evasion_report.mu_estimated},
    };
    out.summary["bounds"] = {
        {"theorem_budget", evasion_report.budget_comparator}};
    if (evasion_report.budget_comparator > 0.0) {
      double sigma = mean_sigma(evasion_report.rows, &TrialStats::hamming);
      checks.push_back({"hamming_mean_vs_theorem_budget",
                        evasion_report.budget_comparator,
                        evasion_report.hamming_mean,
                        evasion_report.hamming_mean - 3.0 * sigma <=
                            evasion_report.budget_comparator});
    }
    checks.push_back({"adversarial_risk_vs_initial_risk",
                      evasion_report.mu_used,
                      evasion_report.adversarial_risk,
                      evasion_report.risk_hi >= evasion_report.mu_used});
  } else {  // poison
    instance_space = std::make_shared<ProductSpace>(
        make_space(parse_spec(config.raw("instances"))));
    ground_truth =
        make_label(parse_spec(config.raw("concept")), *instance_space);
    learner = make_learner(parse_spec(config.raw("learner")), *instance_space);
    uint32_t m = static_cast<uint32_t>(config.get_u64("m", 0));

    PoisoningProblem problem;
    problem.learner = learner.get();
    problem.ground_truth = ground_truth.get();
    problem.instance_space = instance_space;
    problem.m = m;
    SpecNode goal = parse_spec(config.raw("goal"));
    if (goal.is_call("chosen_instance")) {
      ChosenInstanceGoal g;
      if (goal.items.size() != 1 ||
          goal.items[0].kind != SpecNode::Kind::kList)
        throw std::invalid_argument(
            "goal: chosen_instance([v1,...]) takes the target instance's "
            "support indices");
      for (const auto& item : goal.items[0].items)
        g.target.push_back(static_cast<Value>(item.number));
      if (g.target.size() != instance_space->n())
        throw std::invalid_argument(
            "goal: target instance has the wrong dimension");
      problem.goal = std::move(g);
    } else if (goal.is_call("confidence")) {
      if (goal.items.size() != 1 ||
          goal.items[0].kind != SpecNode::Kind::kNumber)
        throw std::invalid_argument("goal: confidence(epsilon)");
      problem.goal = ConfidenceGoal{RiskEstimatorParams::make(
          goal.items[0].number, config.get_number("delta_risk", 0.05),
          config.get_u64("n_risk", 0))};
    } else {
      throw std::invalid_argument("goal must be chosen_instance or confidence");
    }

    AttackParams params = params_from_config(config, m, std::nullopt);
    PoisoningHarness harness(problem, params, seed);
    poison_report = harness.evaluate(trials, seed, workers);
    rows = &poison_report.rows;
    ctx.n_or_m = m;
    ctx.mu = poison_report.mu_used;
    ctx.rho = params.rho;
    ctx.tau = params.tau;
    ctx.gamma = params.gamma;
    ctx.k_gain = params.estimator.k_gain;
    ctx.k_max = params.estimator.k_max;
    write_rows_csv(out.csv, ctx, poison_report.rows, poison_report.rate,
                   poison_report.t_mean, poison_report.hamming_mean,
                   poison_report.calls_total);
    out.summary["results"] = {
        {"rate", poison_report.rate},
        {"rate_ci", {poison_report.rate_lo, poison_report.rate_hi}},
        {"t_mean", poison_report.t_mean},
        {"hamming_mean", poison_report.hamming_mean},
        {"oracle_calls", poison_report.calls_total},
        {"mu", poison_report.mu_used},
        {"mu_estimated", poison_report.mu_estimated},
        {"degenerate", poison_report.degenerate},
    };
    out.summary["bounds"] = {
        {"budget_comparator", poison_report.budget_comparator},
        {"comparator_name", poison_report.comparator_name}};
    if (!poison_report.degenerate && poison_report.budget_comparator > 0.0) {
      double sigma = mean_sigma(poison_report.rows, &TrialStats::hamming);
      checks.push_back({"hamming_mean_vs_budget_comparator",
                        poison_report.budget_comparator,
                        poison_report.hamming_mean,
                        poison_report.hamming_mean - 3.0 * sigma <=
                            poison_report.budget_comparator});
    }
  }

  out.summary["checks"] = checks_json(checks);
  bool all_ok = true;
  for (const auto& c : checks) all_ok = all_ok && c.satisfied;
  out.summary["all_checks_passed"] = all_ok;
  (void)rows;
  return (check && !all_ok) ? kExitComparatorViolation : kExitOk;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  RunResult result;
  auto diagnostics = config.validate();
  bool fatal = false;
  for (const auto& d : diagnostics)
    fatal = fatal || d.severity == Diagnostic::Severity::kError;
  if (fatal) {
    result.exit_code = kExitInvalidConfig;
    for (const auto& d : diagnostics) {
      result.message += d.field + ": " + d.message + "\n";
    }
    return result;
  }

  auto t0 = std::chrono::steady_clock::now();
  ExperimentKind kind = config.kind();
  try {
    Output out(config, config.get_string("kind"));
    int code = kExitOk;
    bool check = config.get_bool("check", false);

    if (kind == ExperimentKind::kBias || kind == ExperimentKind::kEvasion ||
        kind == ExperimentKind::kPoison) {
      code = run_trial_kind(config, kind, out);
    } else if (kind == ExperimentKind::kVerifyExact) {
      uint32_t n_min = static_cast<uint32_t>(config.get_u64("n_min", 3));
      uint32_t n_max = static_cast<uint32_t>(config.get_u64("n_max", 12));
      std::vector<double> taus =
          config.get_numbers("taus", {0.05, 0.1, 0.2, 0.3, 0.4});
      auto cases = run_exact_suite(n_min, n_max, taus);
      out.csv << "objective,n,tau,mu,bias,bias_bound,expected_T,budget_bound,"
                 "expected_hamming,min_step_drift,ok\n";
      bool all_ok = true;
      for (const auto& c : cases) {
        all_ok = all_ok && c.ok();
        out.csv << c.objective << ',' << c.n << ',' << fmt(c.tau) << ','
                << fmt(c.mu) << ',' << fmt(c.stats.bias) << ','
                << fmt(c.bias_bound) << ',' << fmt(c.stats.expected_tampered)
                << ',' << fmt(c.budget_bound) << ','
                << fmt(c.stats.expected_hamming) << ','
                << fmt(c.stats.min_step_drift) << ',' << (c.ok() ? 1 : 0)
                << '\n';
      }
      out.summary["results"] = {{"cases", cases.size()},
                                {"all_checks_passed", all_ok}};
      out.summary["all_checks_passed"] = all_ok;
      if (check && !all_ok) code = kExitComparatorViolation;
    } else if (kind == ExperimentKind::kEstimatorTails) {
      uint32_t cases = static_cast<uint32_t>(config.get_u64("cases", 20));
      uint64_t calls = config.get_u64("calls", 10000);
      std::vector<double> gammas =
          config.get_numbers("gammas", {0.1, 0.2, 0.3});
      unsigned workers = static_cast<unsigned>(config.get_u64("workers", 0));
      auto results =
          run_estimator_tails(config_seed(config), cases, calls, gammas,
                              workers);
      out.csv << "objective,n,prefix_len,gamma,exact_gain,calls,dev_rate,"
                 "dev_ceiling,low_rate,low_ceiling,ok\n";
      bool all_ok = true;
      for (const auto& r : results) {
        all_ok = all_ok && r.ok();
        out.csv << r.objective << ',' << r.n << ',' << r.prefix_len << ','
                << fmt(r.gamma) << ',' << fmt(r.exact_gain) << ',' << r.calls
                << ',' << fmt(r.dev_rate) << ',' << fmt(r.dev_ceiling) << ','
                << fmt(r.low_rate) << ',' << fmt(r.low_ceiling) << ','
                << (r.ok() ? 1 : 0) << '\n';
      }
      out.summary["results"] = {{"cases", results.size()},
                                {"all_checks_passed", all_ok}};
      out.summary["all_checks_passed"] = all_ok;
      if (check && !all_ok) code = kExitComparatorViolation;
    } else {  // bounds
      double value = evaluate_bound_formula(config);
      out.csv << "formula,value\n"
              << config.get_string("formula") << ',' << fmt(value) << '\n';
      out.summary["results"] = {{"formula", config.get_string("formula")},
                                {"value", value}};
      result.message = fmt(value);
    }

    auto t1 = std::chrono::steady_clock::now();
    out.finish(config,
               std::chrono::duration<double, std::milli>(t1 - t0).count());
    result.exit_code = code;
    result.csv_path = out.csv_path;
    result.json_path = out.json_path;
  } catch (const std::invalid_argument& e) {
    result.exit_code = kExitInvalidConfig;
    result.message = e.what();
  } catch (const std::exception& e) {
    result.exit_code = kExitRuntimeFailure;
    result.message = e.what();
  }
  return result;
}

}  // namespace tamper
