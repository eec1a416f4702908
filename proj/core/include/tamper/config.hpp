#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tamper/evasion.hpp"
#include "tamper/objective.hpp"
#include "tamper/poisoning.hpp"
#include "tamper/space.hpp"

namespace tamper {

/// Parsed form of a constructor expression such as
///   uniform_bits(1001)
///   explicit([["a",0.25],["b",0.75]], [["0",0.5],["1",0.5]])
///   threshold([1,2,3], 2.5)
///   external("./oracle.sh")
struct SpecNode {
  enum class Kind { kNumber, kString, kList, kCall };
  Kind kind = Kind::kCall;
  double number = 0.0;
  std::string text;             // identifier (kCall) or literal (kString)
  std::vector<SpecNode> items;  // call arguments or list elements

  bool is_call(const std::string& name) const {
    return kind == Kind::kCall && text == name;
  }
};

SpecNode parse_spec(const std::string& text);

ProductSpace make_space(const SpecNode& spec);
std::unique_ptr<Objective> make_objective(const SpecNode& spec,
                                          const ProductSpace& space);
std::unique_ptr<LabelFunction> make_label(const SpecNode& spec,
                                          const ProductSpace& space);
std::unique_ptr<Learner> make_learner(const SpecNode& spec,
                                      const ProductSpace& instance_space);

enum class ExperimentKind {
  kBias,
  kEvasion,
  kPoison,
  kVerifyExact,
  kEstimatorTails,
  kBounds,
};

struct Diagnostic {
  enum class Severity { kError, kWarning };
  Severity severity;
  std::string field;
  std::string message;
};

/// A flat key = value experiment file ('#' starts a comment). Typed reads
/// throw on malformed values; validate() collects everything wrong at once.
class ExperimentConfig {
 public:
  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse_text(const std::string& text);

  bool has(const std::string& key) const;
  std::string raw(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key,
                         const std::string& fallback = "") const;
  double get_number(const std::string& key, double fallback) const;
  uint64_t get_u64(const std::string& key, uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_numbers(const std::string& key,
                                  std::vector<double> fallback) const;

  ExperimentKind kind() const;
  std::vector<Diagnostic> validate() const;

  const std::map<std::string, std::string>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace tamper
