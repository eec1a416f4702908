#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tamper/attack.hpp"
#include "tamper/config.hpp"
#include "tamper/exact.hpp"

namespace tamper {

// Exit statuses of run_experiment (and the CLI).
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntimeFailure = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitComparatorViolation = 3;

/// One case of the built-in exact-verification suite: every bound the
/// gamma = 0 attack provably satisfies, checked against enumeration at
/// tolerance 1e-9 (1e-12 for the martingale drift).
struct ExactSuiteCase {
  std::string objective;
  uint32_t n = 0;
  double tau = 0.0;
  double mu = 0.0;
  ExactAttackStats stats;
  double bias_bound = 0.0;    // 1 - exp(-mu^2/(2 n tau^2))
  double budget_bound = 0.0;  // (1 - mu)/tau
  bool bias_ok = false;
  bool budget_ok = false;
  bool drift_ok = false;
  bool hamming_ok = false;    // E[hamming] <= E[T]
  bool monotone_ok = false;   // bias >= mu
  bool ok() const {
    return bias_ok && budget_ok && drift_ok && hamming_ok && monotone_ok;
  }
};

/// Runs {and, or, xor, majority, dictator, threshold} over uniform bits for
/// each n and tau.
std::vector<ExactSuiteCase> run_exact_suite(uint32_t n_min, uint32_t n_max,
                                            std::span<const double> taus);

/// One estimator tail case: empirical deviation and low-max-gain rates
/// against their guaranteed ceilings plus 3 sigma of binomial noise.
struct TailCase {
  std::string objective;
  uint32_t n = 0;
  uint32_t prefix_len = 0;
  double gamma = 0.0;
  double exact_gain = 0.0;
  uint64_t calls = 0;
  double dev_rate = 0.0;      // P[|estimated - exact| >= gamma]
  double dev_ceiling = 0.0;   // gamma/2 + 3 sigma
  double low_rate = 0.0;      // P[max-gain estimate <= -2 gamma]
  double low_ceiling = 0.0;   // gamma + 3 sigma
  bool ok() const { return dev_rate <= dev_ceiling && low_rate <= low_ceiling; }
};

std::vector<TailCase> run_estimator_tails(uint64_t seed, uint32_t cases,
                                          uint64_t calls,
                                          std::span<const double> gammas,
                                          unsigned workers);

struct RunResult {
  int exit_code = kExitOk;
  std::string csv_path;
  std::string json_path;
  std::string message;
};

/// Executes one configured experiment: writes <out>/<kind>.csv and
/// <out>/<kind>_summary.json, deterministically for a fixed (config, seed)
/// regardless of worker count. With check = true, comparator violations turn
/// into exit status 3.
RunResult run_experiment(const ExperimentConfig& config);

/// Evaluates one closed-form bound from config keys (kind = bounds).
double evaluate_bound_formula(const ExperimentConfig& config);

}  // namespace tamper
