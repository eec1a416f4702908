// Command-line runner for tampering-attack experiments: wires a config file
// (or direct flags, for `bounds`) into the core library and emits CSV + JSON
// reports.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "tamper/config.hpp"
#include "tamper/runner.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  bool seed_set = false;
  uint64_t trials = 0;
  bool trials_set = false;
  uint64_t workers = 0;
  bool workers_set = false;
  bool check = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* c = cmd->add_option("--config", flags.config_path,
                            "experiment config file (key = value lines)");
  if (config_required) c->required();
  cmd->add_option("--seed", flags.seed, "master seed (overrides config)")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--trials", flags.trials, "trial count (overrides config)")
      ->each([&flags](const std::string&) { flags.trials_set = true; });
  cmd->add_option("--workers", flags.workers,
                  "worker threads; 0 = hardware concurrency")
      ->each([&flags](const std::string&) { flags.workers_set = true; });
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_flag("--check", flags.check,
                "exit 3 when a theoretical comparator is violated");
}

int run_kind(const CommonFlags& flags, const std::string& kind) {
  tamper::ExperimentConfig config;
  try {
    config = flags.config_path.empty()
                 ? tamper::ExperimentConfig{}
                 : tamper::ExperimentConfig::parse_file(flags.config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return tamper::kExitInvalidConfig;
  }
  config.set("kind", kind);
  if (flags.seed_set) config.set("seed", std::to_string(flags.seed));
  if (flags.trials_set) config.set("trials", std::to_string(flags.trials));
  if (flags.workers_set) config.set("workers", std::to_string(flags.workers));
  if (!flags.out_dir.empty()) config.set("out", flags.out_dir);
  if (flags.check) config.set("check", "true");

  tamper::RunResult result = tamper::run_experiment(config);
  if (!result.message.empty())
    std::printf("%s\n", result.message.c_str());
  if (result.exit_code == tamper::kExitOk ||
      result.exit_code == tamper::kExitComparatorViolation) {
    if (!result.csv_path.empty())
      std::fprintf(stderr, "wrote %s and %s\n", result.csv_path.c_str(),
                   result.json_path.c_str());
  }
  if (result.exit_code == tamper::kExitComparatorViolation)
    std::fprintf(stderr, "comparator violation (--check)\n");
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online tampering attacks over product distributions"};
  app.require_subcommand(1);

  CommonFlags bias_flags, evasion_flags, poison_flags, verify_flags,
      tails_flags, bounds_flags, validate_flags;

  add_common(app.add_subcommand("bias", "attack a Boolean objective"),
             bias_flags, true);
  add_common(app.add_subcommand("evasion",
                                "error-region attack on a hypothesis/concept "
                                "pair"),
             evasion_flags, true);
  add_common(app.add_subcommand("poison",
                                "clean-label attack on a training stream"),
             poison_flags, true);
  add_common(app.add_subcommand(
                 "verify-exact",
                 "enumerate the gamma = 0 attack against its proven bounds"),
             verify_flags, false);
  add_common(app.add_subcommand("estimator-tails",
                                "empirical tail checks of the Monte Carlo "
                                "gain oracles"),
             tails_flags, false);

  auto* bounds_cmd =
      app.add_subcommand("bounds", "print a closed-form bound value");
  add_common(bounds_cmd, bounds_flags, false);
  std::string formula;
  double mu = 0.0, rho = 0.99, tau = 0.0, gamma = 0.0, s = 0.0;
  uint64_t n = 0;
  std::string variant = "proof";
  bounds_cmd->add_option("--formula", formula,
                         "theorem_budget | confidence_budget | azuma | "
                         "bias_lower | budget_upper | ideal_bias | "
                         "ideal_budget");
  bounds_cmd->add_option("--n", n, "dimension (n or m)");
  bounds_cmd->add_option("--mu", mu, "initial mean");
  bounds_cmd->add_option("--rho", rho, "target mean");
  bounds_cmd->add_option("--tau", tau, "tampering threshold");
  bounds_cmd->add_option("--gamma", gamma, "oracle accuracy");
  bounds_cmd->add_option("--s", s, "deviation (azuma)");
  bounds_cmd->add_option("--variant", variant, "proof | statement");

  auto* validate_cmd =
      app.add_subcommand("validate", "diagnose a config without running it");
  validate_cmd
      ->add_option("--config", validate_flags.config_path, "config file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand("bias")) return run_kind(bias_flags, "bias");
  if (app.got_subcommand("evasion")) return run_kind(evasion_flags, "evasion");
  if (app.got_subcommand("poison")) return run_kind(poison_flags, "poison");
  if (app.got_subcommand("verify-exact"))
    return run_kind(verify_flags, "verify_exact");
  if (app.got_subcommand("estimator-tails"))
    return run_kind(tails_flags, "estimator_tails");

  if (app.got_subcommand("bounds")) {
    if (!formula.empty()) {
      // direct-flag form; no files written
      tamper::ExperimentConfig config;
      config.set("kind", "bounds");
      config.set("seed", "0");
      config.set("formula", formula);
      config.set("n", std::to_string(n));
      config.set("mu", std::to_string(mu));
      config.set("rho", std::to_string(rho));
      config.set("tau", std::to_string(tau));
      config.set("gamma", std::to_string(gamma));
      config.set("s", std::to_string(s));
      config.set("variant", variant);
      try {
        std::printf("%.10g\n", tamper::evaluate_bound_formula(config));
        return tamper::kExitOk;
      } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return tamper::kExitInvalidConfig;
      }
    }
    return run_kind(bounds_flags, "bounds");
  }

  if (app.got_subcommand("validate")) {
    tamper::ExperimentConfig config;
    try {
      config = tamper::ExperimentConfig::parse_file(validate_flags.config_path);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return tamper::kExitInvalidConfig;
    }
    auto diagnostics = config.validate();
    bool fatal = false;
    for (const auto& d : diagnostics) {
      bool err = d.severity == tamper::Diagnostic::Severity::kError;
      fatal = fatal || err;
      std::printf("%s: %s %s\n", err ? "error" : "warning", d.field.c_str(),
                  d.message.c_str());
    }
    if (diagnostics.empty()) std::printf("ok\n");
    return fatal ? tamper::kExitInvalidConfig : tamper::kExitOk;
  }
  return tamper::kExitOk;
}
