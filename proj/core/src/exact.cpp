#include "tamper/exact.hpp"

#include <cmath>
#include <stdexcept>

namespace tamper {

namespace {

// Kahan-compensated accumulator; the acceptance tolerances on exact values
// are 1e-9 over sums with up to ~2^26 terms.
struct Accum {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    double y = x - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

ExactOracle::ExactOracle(const ProductSpace& space, const Objective& objective,
                         uint64_t enumeration_cap, uint64_t table_entry_cap)
    : space_(&space),
      objective_(&objective),
      enumeration_cap_(enumeration_cap),
      table_entry_cap_(table_entry_cap) {
  if (!space.enumerable(enumeration_cap_))
    throw std::runtime_error(
        "exact oracle: space support exceeds the enumeration cap");
}

uint64_t ExactOracle::rank_of(Prefix prefix) const {
  uint64_t r = 0;
  for (uint32_t i = 0; i < prefix.size(); ++i) {
    if (prefix[i] >= space_->block(i).size())
      throw std::out_of_range("prefix value outside block support");
    r = r * space_->block(i).size() + prefix[i];
  }
  return r;
}

void ExactOracle::ensure_table() const {
  std::call_once(table_once_, [this] {
    const uint32_t n = space_->n();
    std::vector<uint64_t> level_size(n + 1, 1);
    uint64_t total = 1;
    for (uint32_t i = 0; i < n; ++i) {
      level_size[i + 1] = level_size[i] * space_->block(i).size();
      total += level_size[i + 1];
    }
    if (total > table_entry_cap_) return;  // stay on the streaming backend

    // leaf level: one objective evaluation per support tuple
    leaf_bits_.assign((level_size[n] + 63) / 64, 0);
    {
      Tuple t(n, 0);
      TupleView view = TupleView::of(t);
      uint64_t rank = 0;
      bool done = false;
      while (!done) {
        if (objective_->eval_raw(view))
          leaf_bits_[rank >> 6] |= uint64_t{1} << (rank & 63);
        ++rank;
        uint32_t i = n;
        done = true;
        while (i > 0) {
          --i;
          if (++t[i] < space_->block(i).size()) {
            done = false;
            break;
          }
          t[i] = 0;
        }
        if (n == 0) break;
      }
      objective_->add_calls(level_size[n]);
    }

    levels_.resize(n + 1);
    for (uint32_t i = 0; i < n; ++i) levels_[i].resize(level_size[i]);
    // one level above the leaves reads the bit vector directly
    if (n > 0) {
      const uint32_t s = static_cast<uint32_t>(space_->block(n - 1).size());
      auto& lvl = levels_[n - 1];
      for (uint64_t r = 0; r < lvl.size(); ++r) {
        double acc = 0.0;
        for (uint32_t v = 0; v < s; ++v) {
          uint64_t leaf = r * s + v;
          if ((leaf_bits_[leaf >> 6] >> (leaf & 63)) & 1)
            acc += space_->block(n - 1).weight(v);
        }
        lvl[r] = acc;
      }
    }
    if (n >= 2) {
      for (uint32_t i = n - 1; i-- > 0;) {
        const uint32_t s = static_cast<uint32_t>(space_->block(i).size());
        for (uint64_t r = 0; r < levels_[i].size(); ++r) {
          double acc = 0.0;
          for (uint32_t v = 0; v < s; ++v)
            acc += space_->block(i).weight(v) * levels_[i + 1][r * s + v];
          levels_[i][r] = acc;
        }
      }
    }
    if (n == 0) levels_[0].assign(1, (leaf_bits_[0] & 1) ? 1.0 : 0.0);
    table_built_ = true;
  });
}

double ExactOracle::table_avg(uint32_t level, uint64_t rank) const {
  if (level == space_->n() && levels_[level].empty())
    return (leaf_bits_[rank >> 6] >> (rank & 63)) & 1 ? 1.0 : 0.0;
  return levels_[level][rank];
}

double ExactOracle::streaming_avg(Prefix prefix) const {
  const uint32_t n = space_->n();
  const uint32_t p = static_cast<uint32_t>(prefix.size());
  // odometer over the suffix blocks with an incrementally maintained weight
  Tuple suffix(n - p, 0);
  Tuple full(prefix.begin(), prefix.end());
  full.resize(n, 0);
  std::vector<double> partial(n - p + 1, 1.0);
  for (uint32_t j = 0; j < n - p; ++j)
    partial[j + 1] = partial[j] * space_->block(p + j).weight(0);
  Accum acc;
  uint64_t evals = 0;
  TupleView view = TupleView::of(full);
  while (true) {
    ++evals;
    if (objective_->eval_raw(view)) acc.add(partial[n - p]);
    uint32_t j = n - p;
    bool done = true;
    while (j > 0) {
      --j;
      if (++suffix[j] < space_->block(p + j).size()) {
        full[p + j] = suffix[j];
        done = false;
        break;
      }
      suffix[j] = 0;
      full[p + j] = 0;
    }
    if (done) break;
    for (uint32_t k = j; k < n - p; ++k)
      partial[k + 1] = partial[k] * space_->block(p + k).weight(suffix[k]);
  }
  objective_->add_calls(evals);
  return acc.sum;
}

double ExactOracle::avg(Prefix prefix) const {
  if (prefix.size() > space_->n())
    throw std::invalid_argument("avg: prefix longer than the space");
  ensure_table();
  if (table_built_)
    return table_avg(static_cast<uint32_t>(prefix.size()), rank_of(prefix));

  uint64_t key = (static_cast<uint64_t>(prefix.size()) << 58) | rank_of(prefix);
  {
    std::shared_lock lock(memo_mx_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  double v = streaming_avg(prefix);
  {
    std::unique_lock lock(memo_mx_);
    memo_.emplace(key, v);
  }
  return v;
}

double ExactOracle::gain(Prefix prefix) const {
  if (prefix.empty())
    throw std::invalid_argument("gain: prefix must include the last block");
  return avg(prefix) - avg(prefix.first(prefix.size() - 1));
}

ExactOracle::Best ExactOracle::max_gain(Prefix prefix) const {
  const uint32_t i = static_cast<uint32_t>(prefix.size());
  if (i >= space_->n())
    throw std::invalid_argument("max_gain: no block left to choose");
  const uint64_t s = space_->block(i).size();
  double base = avg(prefix);
  Tuple ext(prefix.begin(), prefix.end());
  ext.push_back(0);
  double best = -2.0;
  Value arg = 0;
  for (uint64_t v = 0; v < s; ++v) {
    ext[i] = static_cast<Value>(v);
    double g = avg(ext) - base;
    if (g > best) {
      best = g;
      arg = static_cast<Value>(v);
    }
  }
  return Best{best, arg};
}

// ---------------------------------------------------------------------------
// Exact attack enumeration

struct ExactAttackWalker {
  const ExactOracle& oracle;
  const ProductSpace& space;
  double tau;
  Accum bias, tampered, ham;
  double min_drift = 1.0;
  uint64_t nodes = 0;

  // Depth-first pass over the reachable tampered-prefix tree, pushing the
  // input distribution's mass through the deterministic step rule.
  void walk(uint32_t level, uint64_t rank, double mass) {
    ++nodes;
    const uint32_t n = space.n();
    if (level == n) {
      bias.add(mass * oracle.table_avg(n, rank));
      return;
    }
    const auto& block = space.block(level);
    const uint32_t s = static_cast<uint32_t>(block.size());
    const double base = oracle.table_avg(level, rank);
    double best = -2.0;
    uint32_t arg = 0;
    for (uint32_t v = 0; v < s; ++v) {
      double g = oracle.table_avg(level + 1, rank * s + v) - base;
      if (g > best) {
        best = g;
        arg = v;
      }
    }
    if (best >= tau) {
      // proactive tamper: every incoming block is replaced by the argmax
      tampered.add(mass);
      ham.add(mass * (1.0 - block.weight(arg)));
      walk(level + 1, rank * s + arg, mass);
      return;
    }
    double drift = 0.0;
    double to_arg = 0.0;
    for (uint32_t u = 0; u < s; ++u) {
      double w = block.weight(u);
      if (w == 0.0) continue;
      double g = oracle.table_avg(level + 1, rank * s + u) - base;
      if (g <= -tau) {
        // reactive tamper: harmful incoming block replaced by the argmax
        to_arg += w;
        tampered.add(mass * w);
        if (u != arg) ham.add(mass * w);
      } else {
        drift += w * g;
        if (u != arg) walk(level + 1, rank * s + u, mass * w);
      }
    }
    min_drift = std::min(min_drift, drift);
    // the kept argmax branch and any reactive mass merge into one child
    double arg_mass = to_arg;
    double g_arg = oracle.table_avg(level + 1, rank * s + arg) - base;
    if (g_arg > -tau) arg_mass += block.weight(arg);
    if (arg_mass > 0.0) walk(level + 1, rank * s + arg, mass * arg_mass);
  }
};

ExactAttackStats enumerate_attack(const ExactOracle& oracle, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("enumerate_attack: tau must lie in (0,1)");
  oracle.ensure_table();
  if (!oracle.has_table())
    throw std::runtime_error(
        "enumerate_attack: prefix tree exceeds the table cap");
  ExactAttackWalker w{oracle, oracle.space(), tau};
  w.walk(0, 0, 1.0);
  ExactAttackStats out;
  out.bias = w.bias.sum;
  out.expected_tampered = w.tampered.sum;
  out.expected_hamming = w.ham.sum;
  out.min_step_drift = w.min_drift == 1.0 ? 0.0 : w.min_drift;
  out.reachable_prefixes = w.nodes;
  return out;
}

ExactAttackStats enumerate_attack(const ProductSpace& space,
                                  const Objective& objective, double tau,
                                  uint64_t enumeration_cap) {
  ExactOracle oracle(space, objective, enumeration_cap);
  return enumerate_attack(oracle, tau);
}

}  // namespace tamper
