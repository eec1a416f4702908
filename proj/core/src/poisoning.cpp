#include "tamper/poisoning.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

#include "tamper/bounds.hpp"

namespace tamper {

// ---------------------------------------------------------------------------
// Toy learners

namespace {

class MajorityLabelLearner final : public Learner {
 public:
  std::string name() const override { return "majority_label"; }
  void classify(std::span<const ExampleView> train,
                std::span<const TupleView> probes,
                std::vector<Label>& out) const override {
    if (train.empty())
      throw std::invalid_argument("majority_label: empty training set");
    std::map<Label, std::pair<uint32_t, size_t>> counts;  // count, first seen
    for (size_t i = 0; i < train.size(); ++i) {
      auto [it, fresh] = counts.try_emplace(train[i].y, 0u, i);
      ++it->second.first;
    }
    Label winner = train[0].y;
    uint32_t best = 0;
    size_t first = train.size();
    for (auto& [label, cf] : counts) {
      if (cf.first > best || (cf.first == best && cf.second < first)) {
        best = cf.first;
        first = cf.second;
        winner = label;
      }
    }
    out.assign(probes.size(), winner);
  }
};

class Threshold1DLearner final : public Learner {
 public:
  explicit Threshold1DLearner(uint32_t coord) : coord_(coord) {}
  std::string name() const override {
    return "threshold_1d(" + std::to_string(coord_ + 1) + ")";
  }
  void classify(std::span<const ExampleView> train,
                std::span<const TupleView> probes,
                std::vector<Label>& out) const override {
    if (train.empty())
      throw std::invalid_argument("threshold_1d: empty training set");
    std::vector<double> cuts;
    cuts.reserve(train.size() + 1);
    for (const auto& ex : train) {
      if (ex.y != 0 && ex.y != 1)
        throw std::runtime_error("threshold_1d: labels must be 0/1");
      cuts.push_back(static_cast<double>(ex.x.value(coord_)));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.insert(cuts.begin(), cuts.front() - 1.0);  // the all-above stump

    uint32_t best_err = static_cast<uint32_t>(train.size()) + 1;
    double best_cut = cuts.front();
    int best_dir = 1;  // 1: [x >= cut] -> 1 ; 0: [x >= cut] -> 0
    for (double cut : cuts) {
      for (int dir : {1, 0}) {
        uint32_t err = 0;
        for (const auto& ex : train) {
          int prediction =
              (static_cast<double>(ex.x.value(coord_)) >= cut) ? dir : 1 - dir;
          err += prediction != ex.y;
        }
        if (err < best_err) {
          best_err = err;
          best_cut = cut;
          best_dir = dir;
        }
      }
    }
    out.clear();
    out.reserve(probes.size());
    for (const auto& p : probes) {
      int prediction = (static_cast<double>(p.value(coord_)) >= best_cut)
                           ? best_dir
                           : 1 - best_dir;
      out.push_back(prediction);
    }
  }

 private:
  uint32_t coord_;
};

class NearestCentroidLearner final : public Learner {
 public:
  std::string name() const override { return "nearest_centroid"; }
  void classify(std::span<const ExampleView> train,
                std::span<const TupleView> probes,
                std::vector<Label>& out) const override {
    if (train.empty())
      throw std::invalid_argument("nearest_centroid: empty training set");
    const uint32_t n = train[0].x.n;
    struct ClassInfo {
      size_t first_seen;
      std::vector<std::map<Value, uint32_t>> value_counts;
    };
    std::map<Label, ClassInfo> classes;
    for (size_t i = 0; i < train.size(); ++i) {
      auto [it, fresh] = classes.try_emplace(
          train[i].y, ClassInfo{i, std::vector<std::map<Value, uint32_t>>(n)});
      for (uint32_t c = 0; c < n; ++c)
        ++it->second.value_counts[c][train[i].x.value(c)];
    }
    // Hamming median per class: coordinate-wise modal value, smaller value
    // on ties
    struct Centroid {
      Label label;
      size_t first_seen;
      Tuple values;
    };
    std::vector<Centroid> centroids;
    for (auto& [label, info] : classes) {
      Centroid c{label, info.first_seen, Tuple(n, 0)};
      for (uint32_t i = 0; i < n; ++i) {
        uint32_t best = 0;
        Value arg = 0;
        bool any = false;
        for (auto& [v, cnt] : info.value_counts[i]) {
          if (!any || cnt > best) {
            best = cnt;
            arg = v;
            any = true;
          }
        }
        c.values[i] = arg;
      }
      centroids.push_back(std::move(c));
    }
    std::sort(centroids.begin(), centroids.end(),
              [](const Centroid& a, const Centroid& b) {
                return a.first_seen < b.first_seen;
              });
    out.clear();
    out.reserve(probes.size());
    for (const auto& p : probes) {
      uint32_t best_d = n + 1;
      Label best_label = centroids[0].label;
      for (const auto& c : centroids) {
        uint32_t d = 0;
        for (uint32_t i = 0; i < n; ++i) d += p.value(i) != c.values[i];
        if (d < best_d) {  // strict: earlier class wins ties
          best_d = d;
          best_label = c.label;
        }
      }
      out.push_back(best_label);
    }
  }
};

}  // namespace

std::unique_ptr<Learner> make_toy_learner(LearnerKind kind, uint32_t coord) {
  switch (kind) {
    case LearnerKind::kMajorityLabel:
      return std::make_unique<MajorityLabelLearner>();
    case LearnerKind::kThreshold1D:
      return std::make_unique<Threshold1DLearner>(coord);
    case LearnerKind::kNearestCentroid:
      return std::make_unique<NearestCentroidLearner>();
  }
  throw std::invalid_argument("make_toy_learner: unknown kind");
}

void spot_check_determinism(const Learner& learner,
                            const ProductSpace& instance_space,
                            const LabelFunction& ground_truth, uint64_t seed) {
  RandomStream rng = RandomStream::derive(seed, stream_tag::kSelfTest, 17);
  const uint32_t n_train = 8, n_probe = 32;
  std::vector<Tuple> train_x(n_train);
  std::vector<Tuple> probe_x(n_probe);
  for (auto& t : train_x) t = instance_space.sample_full(rng);
  for (auto& t : probe_x) t = instance_space.sample_full(rng);
  std::vector<ExampleView> train;
  for (auto& t : train_x)
    train.push_back(
        ExampleView{TupleView::of(t), ground_truth.classify(TupleView::of(t))});
  std::vector<TupleView> probes;
  for (auto& t : probe_x) probes.push_back(TupleView::of(t));
  std::vector<Label> a, b;
  learner.classify(train, probes, a);
  learner.classify(train, probes, b);
  if (a != b)
    throw std::runtime_error("learner '" + learner.name() +
                             "' is not deterministic");
}

// ---------------------------------------------------------------------------
// Goal objectives over the m-example stream space

RiskEstimatorParams RiskEstimatorParams::make(double epsilon,
                                              double delta_risk,
                                              uint64_t n_risk_override) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("risk estimator: epsilon must be positive");
  if (!(delta_risk > 0.0 && delta_risk < 1.0))
    throw std::invalid_argument("risk estimator: delta in (0,1)");
  RiskEstimatorParams p;
  p.epsilon = epsilon;
  p.delta_risk = delta_risk;
  double gap = epsilon / 100.0;
  uint64_t required = static_cast<uint64_t>(
      std::ceil(3.0 * std::log(2.0 / delta_risk) / (gap * gap)));
  if (n_risk_override == 0) {
    p.n_risk = required;
  } else {
    if (n_risk_override < required)
      throw std::invalid_argument(
          "risk estimator: n_risk too small to separate eps from 99eps/100");
    p.n_risk = n_risk_override;
  }
  return p;
}

namespace {

// Scratch shared by both goal objectives: the decoded instances of one
// training stream plus the derived (clean) labels.
struct DecodedStream {
  std::vector<Value> flat;
  std::vector<ExampleView> pairs;
};

void decode_stream(const ProductSpace& instance_space, uint32_t m,
                   const TupleView& stream, const LabelFunction& truth,
                   DecodedStream& out) {
  const uint32_t d = instance_space.n();
  out.flat.resize(static_cast<size_t>(m) * d);
  out.pairs.clear();
  out.pairs.reserve(m);
  Tuple scratch;
  for (uint32_t i = 0; i < m; ++i) {
    instance_space.unpack_index(stream.value(i), scratch);
    std::copy(scratch.begin(), scratch.end(),
              out.flat.begin() + static_cast<size_t>(i) * d);
    TupleView xi{nullptr, out.flat.data() + static_cast<size_t>(i) * d, d};
    out.pairs.push_back(ExampleView{xi, truth.classify(xi)});
  }
}

// 0 = unknown, 2 = cached false, 3 = cached true
class StreamMemo {
 public:
  explicit StreamMemo(uint64_t size) : cells_(size) {}
  std::optional<bool> get(uint64_t key) const {
    uint8_t v = cells_[key].load(std::memory_order_acquire);
    if (v == 0) return std::nullopt;
    return v == 3;
  }
  void put(uint64_t key, bool value) {
    cells_[key].store(value ? 3 : 2, std::memory_order_release);
  }

 private:
  mutable std::vector<std::atomic<uint8_t>> cells_;
};

class ChosenInstanceObjective final : public Objective {
 public:
  ChosenInstanceObjective(const PoisoningProblem& problem,
                          std::shared_ptr<const ProductSpace> stream_space,
                          bool memoize)
      : problem_(problem), stream_space_(std::move(stream_space)) {
    const auto& goal = std::get<ChosenInstanceGoal>(problem_.goal);
    target_ = goal.target;
    target_label_ = problem_.ground_truth->classify(TupleView::of(target_));
    if (memoize && stream_space_->support_size() &&
        *stream_space_->support_size() <= (uint64_t{1} << 26))
      memo_ = std::make_unique<StreamMemo>(*stream_space_->support_size());
  }

  std::string name() const override { return "chosen_instance"; }

  bool eval_raw(const TupleView& stream) const override {
    uint64_t key = 0;
    if (memo_) {
      Tuple t(stream.n);
      for (uint32_t i = 0; i < stream.n; ++i) t[i] = stream.value(i);
      key = stream_space_->pack_index(t);
      if (auto hit = memo_->get(key)) return *hit;
    }
    thread_local DecodedStream scratch;
    decode_stream(*problem_.instance_space, problem_.m, stream,
                  *problem_.ground_truth, scratch);
    thread_local std::vector<Label> answer;
    std::array<TupleView, 1> probes{TupleView::of(target_)};
    problem_.learner->classify(scratch.pairs, probes, answer);
    bool value = answer[0] != target_label_;
    if (memo_) memo_->put(key, value);
    return value;
  }

 private:
  PoisoningProblem problem_;
  std::shared_ptr<const ProductSpace> stream_space_;
  Tuple target_;
  Label target_label_;
  std::unique_ptr<StreamMemo> memo_;
};

class ConfidenceObjective final : public Objective {
 public:
  ConfidenceObjective(const PoisoningProblem& problem,
                      std::shared_ptr<const ProductSpace> stream_space,
                      bool memoize, uint64_t seed)
      : problem_(problem), stream_space_(std::move(stream_space)) {
    const auto& goal = std::get<ConfidenceGoal>(problem_.goal);
    risk_ = goal.risk;
    threshold_ = 199.0 * risk_.epsilon / 200.0;
    // The test set is drawn once: evaluation must stay a pure function of
    // the training stream.
    RandomStream rng = RandomStream::derive(seed, stream_tag::kTestData, 0);
    const uint32_t d = problem_.instance_space->n();
    test_flat_.resize(risk_.n_risk * static_cast<size_t>(d));
    Tuple scratch;
    for (uint64_t i = 0; i < risk_.n_risk; ++i) {
      problem_.instance_space->sample_full(rng, scratch);
      std::copy(scratch.begin(), scratch.end(),
                test_flat_.begin() + i * static_cast<size_t>(d));
      TupleView xi{nullptr, test_flat_.data() + i * static_cast<size_t>(d), d};
      test_views_.push_back(xi);
      test_labels_.push_back(problem_.ground_truth->classify(xi));
    }
    if (memoize && stream_space_->support_size() &&
        *stream_space_->support_size() <= (uint64_t{1} << 26))
      memo_ = std::make_unique<StreamMemo>(*stream_space_->support_size());
  }

  std::string name() const override { return "confidence"; }

  bool eval_raw(const TupleView& stream) const override {
    uint64_t key = 0;
    if (memo_) {
      Tuple t(stream.n);
      for (uint32_t i = 0; i < stream.n; ++i) t[i] = stream.value(i);
      key = stream_space_->pack_index(t);
      if (auto hit = memo_->get(key)) return *hit;
    }
    thread_local DecodedStream scratch;
    decode_stream(*problem_.instance_space, problem_.m, stream,
                  *problem_.ground_truth, scratch);
    thread_local std::vector<Label> answer;
    problem_.learner->classify(scratch.pairs, test_views_, answer);
    uint64_t mistakes = 0;
    for (size_t i = 0; i < test_labels_.size(); ++i)
      mistakes += answer[i] != test_labels_[i];
    double risk = static_cast<double>(mistakes) / test_labels_.size();
    bool value = risk >= threshold_;
    if (memo_) memo_->put(key, value);
    return value;
  }

  const RiskEstimatorParams& risk_params() const { return risk_; }

 private:
  PoisoningProblem problem_;
  std::shared_ptr<const ProductSpace> stream_space_;
  RiskEstimatorParams risk_;
  double threshold_;
  std::vector<Value> test_flat_;
  std::vector<TupleView> test_views_;
  std::vector<Label> test_labels_;
  std::unique_ptr<StreamMemo> memo_;
};

}  // namespace

std::unique_ptr<Objective> chosen_instance_objective(
    const PoisoningProblem& problem,
    std::shared_ptr<const ProductSpace> stream_space, bool memoize) {
  return std::make_unique<ChosenInstanceObjective>(problem,
                                                   std::move(stream_space),
                                                   memoize);
}

std::unique_ptr<Objective> confidence_objective(
    const PoisoningProblem& problem,
    std::shared_ptr<const ProductSpace> stream_space, bool memoize,
    uint64_t seed) {
  return std::make_unique<ConfidenceObjective>(problem,
                                               std::move(stream_space),
                                               memoize, seed);
}

// ---------------------------------------------------------------------------
// Harness

PoisoningHarness::PoisoningHarness(const PoisoningProblem& problem,
                                   const AttackParams& params, uint64_t seed)
    : problem_(problem), params_(params) {
  params_.validate();
  if (!problem_.learner || !problem_.ground_truth || !problem_.instance_space)
    throw std::invalid_argument("poisoning: incomplete problem");
  if (problem_.m < 1)
    throw std::invalid_argument("poisoning: m must be >= 1");
  spot_check_determinism(*problem_.learner, *problem_.instance_space,
                         *problem_.ground_truth, seed);
  auto space = std::make_shared<ProductSpace>(
      ProductSpace::power(problem_.instance_space, problem_.m));
  stream_space_ = space;
  bool memoize = params_.mode == OracleMode::kExact;
  if (std::holds_alternative<ChosenInstanceGoal>(problem_.goal))
    objective_ = chosen_instance_objective(problem_, space, memoize);
  else
    objective_ = confidence_objective(problem_, space, memoize, seed);

  if (params_.mode == OracleMode::kExact) {
    exact_ = std::make_unique<ExactOracle>(*stream_space_, *objective_);
    mu_ = exact_->mu();
    mu_estimated_ = false;
  } else if (params_.mu) {
    mu_ = *params_.mu;
    mu_estimated_ = false;
  } else {
    RandomStream rng = RandomStream::derive(seed, stream_tag::kMuEstimate, 0);
    mu_ = estimate_mu(*stream_space_, *objective_, default_mu_samples(), rng)
              .mean;
    mu_estimated_ = true;
  }
  degenerate_ = !(mu_ > 0.0);
}

PoisoningHarness::PoisonedStream PoisoningHarness::poison_stream(
    RandomStream& rng) const {
  PoisonedStream out;
  Tuple stream;
  if (degenerate_) {
    // nothing to amplify: emit the untampered stream
    stream = stream_space_->sample_full(rng);
    out.trace.steps.reserve(problem_.m);
    for (Value v : stream)
      out.trace.steps.push_back(StepEvent{StepKind::kKeep, v, v});
    out.trace.objective_value = objective_->eval(TupleView::of(stream));
    out.trace.oracle_calls = 1;
  } else {
    std::unique_ptr<GainOracle> oracle;
    if (params_.mode == OracleMode::kExact)
      oracle = std::make_unique<ExactGainOracle>(*exact_);
    else
      oracle = std::make_unique<MonteCarloGainOracle>(
          *stream_space_, *objective_, params_.estimator);
    auto [tampered, trace] =
        run_attack(*stream_space_, *objective_, params_, *oracle, rng);
    stream = std::move(tampered);
    out.trace = std::move(trace);
  }
  Tuple instance;
  for (uint32_t i = 0; i < problem_.m; ++i) {
    problem_.instance_space->unpack_index(stream[i], instance);
    Label y = problem_.ground_truth->classify(TupleView::of(instance));
    out.examples.emplace_back(instance, y);
  }
  // plausibility: every emitted label must match the ground truth of the
  // emitted (possibly replaced) instance
  for (const auto& [x, y] : out.examples)
    out.all_labels_correct &= y == problem_.ground_truth->classify(TupleView::of(x));
  return out;
}

PoisonReport PoisoningHarness::evaluate(uint64_t trials, uint64_t seed,
                                        unsigned workers) const {
  if (trials < 1) throw std::invalid_argument("evaluate: trials >= 1");
  PoisonReport report;
  report.params = params_;
  report.trials = trials;
  report.mu_used = mu_;
  report.mu_estimated = mu_estimated_;
  report.degenerate = degenerate_;
  bool chosen = std::holds_alternative<ChosenInstanceGoal>(problem_.goal);
  report.comparator_name =
      chosen ? "theorem_budget(m,mu,rho) = (2/mu)*sqrt(m*ln(2/(1-rho)))"
             : "confidence_budget = (2/(1-rho'))*sqrt(m*ln(2/mu')) with "
               "rho' = 1-mu_f, mu' = 1-rho_f";
  if (!degenerate_ && mu_ < params_.rho)
    report.budget_comparator =
        bounds::theorem_budget(problem_.m, mu_, params_.rho);

  report.rows.resize(trials);
  std::atomic<uint64_t> next{0};
  std::atomic<bool> labels_ok{true};
  auto worker = [&] {
    while (true) {
      uint64_t t = next.fetch_add(1, std::memory_order_relaxed);
      if (t >= trials) return;
      RandomStream rng = RandomStream::derive(seed, stream_tag::kTrial, t);
      PoisonedStream ps = poison_stream(rng);
      if (!ps.all_labels_correct) labels_ok.store(false);
      report.rows[t] =
          TrialStats{static_cast<uint32_t>(t), ps.trace.objective_value,
                     ps.trace.tamper_count, ps.trace.hamming_cost,
                     ps.trace.oracle_calls};
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
  if (!labels_ok.load())
    throw std::logic_error("poisoning: an emitted label disagreed with the "
                           "ground truth");

  uint64_t hits = 0, t_sum = 0, h_sum = 0, calls = 0;
  for (const auto& row : report.rows) {
    hits += row.objective_value;
    t_sum += row.tampered;
    h_sum += row.hamming;
    calls += row.oracle_calls;
  }
  report.rate = static_cast<double>(hits) / trials;
  std::tie(report.rate_lo, report.rate_hi) =
      wilson_interval(report.rate, trials);
  report.t_mean = static_cast<double>(t_sum) / trials;
  report.hamming_mean = static_cast<double>(h_sum) / trials;
  report.calls_total = calls;
  return report;
}

}  // namespace tamper
