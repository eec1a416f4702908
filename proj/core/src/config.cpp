#include "tamper/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tamper {

// ---------------------------------------------------------------------------
// Constructor-expression parser

namespace {

struct SpecParser {
  const std::string& s;
  size_t pos = 0;

  explicit SpecParser(const std::string& text) : s(text) {}

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("spec parse error at offset " +
                                std::to_string(pos) + ": " + what + " in '" +
                                s + "'");
  }

  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  SpecNode parse_value() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end");
    char c = s[pos];
    if (c == '[') return parse_list();
    if (c == '"') return parse_string();
    if (c == '-' || c == '+' || std::isdigit(static_cast<unsigned char>(c)))
      return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_call();
    fail("unexpected character");
  }

  SpecNode parse_list() {
    SpecNode node;
    node.kind = SpecNode::Kind::kList;
    eat('[');
    skip_ws();
    if (eat(']')) return node;
    while (true) {
      node.items.push_back(parse_value());
      if (eat(']')) return node;
      if (!eat(',')) fail("expected ',' or ']'");
    }
  }

  SpecNode parse_string() {
    SpecNode node;
    node.kind = SpecNode::Kind::kString;
    ++pos;  // opening quote
    while (pos < s.size() && s[pos] != '"') node.text += s[pos++];
    if (pos >= s.size()) fail("unterminated string");
    ++pos;
    return node;
  }

  SpecNode parse_number() {
    SpecNode node;
    node.kind = SpecNode::Kind::kNumber;
    size_t start = pos;
    if (s[pos] == '-' || s[pos] == '+') ++pos;
    while (pos < s.size() &&
           (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.' ||
            s[pos] == 'e' || s[pos] == 'E' ||
            ((s[pos] == '-' || s[pos] == '+') &&
             (s[pos - 1] == 'e' || s[pos - 1] == 'E'))))
      ++pos;
    node.text = s.substr(start, pos - start);
    try {
      node.number = std::stod(node.text);
    } catch (...) {
      fail("bad number");
    }
    return node;
  }

  SpecNode parse_call() {
    SpecNode node;
    node.kind = SpecNode::Kind::kCall;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      node.text += s[pos++];
    skip_ws();
    if (eat('(')) {
      skip_ws();
      if (eat(')')) return node;
      while (true) {
        node.items.push_back(parse_value());
        if (eat(')')) return node;
        if (!eat(',')) fail("expected ',' or ')'");
      }
    }
    return node;
  }
};

double arg_number(const SpecNode& spec, size_t i, const char* what) {
  if (i >= spec.items.size() ||
      spec.items[i].kind != SpecNode::Kind::kNumber)
    throw std::invalid_argument(std::string(what) + ": expected numeric arg " +
                                std::to_string(i + 1));
  return spec.items[i].number;
}

uint32_t arg_u32(const SpecNode& spec, size_t i, const char* what) {
  double v = arg_number(spec, i, what);
  if (v < 0 || v != std::floor(v) || v > 4294967295.0)
    throw std::invalid_argument(std::string(what) +
                                ": expected a nonnegative integer");
  return static_cast<uint32_t>(v);
}

}  // namespace

SpecNode parse_spec(const std::string& text) {
  SpecParser p(text);
  SpecNode node = p.parse_value();
  p.skip_ws();
  if (p.pos != text.size())
    throw std::invalid_argument("spec parse error: trailing input in '" +
                                text + "'");
  return node;
}

ProductSpace make_space(const SpecNode& spec) {
  if (spec.is_call("uniform_bits"))
    return ProductSpace::uniform_bits(arg_u32(spec, 0, "uniform_bits"));
  if (spec.is_call("uniform_ints"))
    return ProductSpace::uniform_ints(arg_u32(spec, 0, "uniform_ints"),
                                      arg_u32(spec, 1, "uniform_ints"));
  if (spec.is_call("explicit")) {
    std::vector<std::vector<std::pair<std::string, double>>> blocks;
    for (const auto& block : spec.items) {
      if (block.kind != SpecNode::Kind::kList)
        throw std::invalid_argument("explicit: each block is a list");
      std::vector<std::pair<std::string, double>> entries;
      for (const auto& pair : block.items) {
        if (pair.kind != SpecNode::Kind::kList || pair.items.size() != 2 ||
            pair.items[1].kind != SpecNode::Kind::kNumber)
          throw std::invalid_argument("explicit: entries are [value, weight]");
        const auto& v = pair.items[0];
        std::string token = v.kind == SpecNode::Kind::kString
                                ? v.text
                                : (v.kind == SpecNode::Kind::kNumber
                                       ? v.text
                                       : v.text);
        entries.emplace_back(token, pair.items[1].number);
      }
      blocks.push_back(std::move(entries));
    }
    return ProductSpace::explicit_blocks(std::move(blocks));
  }
  throw std::invalid_argument("unknown space spec '" + spec.text + "'");
}

std::unique_ptr<Objective> make_objective(const SpecNode& spec,
                                          const ProductSpace& space) {
  const uint32_t n = space.n();
  if (spec.is_call("and")) return make_and(n, arg_u32(spec, 0, "and"));
  if (spec.is_call("or")) return make_or(n, arg_u32(spec, 0, "or"));
  if (spec.is_call("xor"))
    return make_xor(n, spec.items.empty() ? n : arg_u32(spec, 0, "xor"));
  if (spec.is_call("majority")) return make_majority(n);
  if (spec.is_call("dictator")) {
    uint32_t coord = arg_u32(spec, 0, "dictator");
    if (coord < 1) throw std::invalid_argument("dictator: coords are 1-based");
    return make_dictator(n, coord - 1);
  }
  if (spec.is_call("const"))
    return make_const(arg_u32(spec, 0, "const") != 0);
  if (spec.is_call("threshold")) {
    if (spec.items.size() != 2 ||
        spec.items[0].kind != SpecNode::Kind::kList)
      throw std::invalid_argument("threshold: expected (weights, t)");
    std::vector<double> weights;
    for (const auto& w : spec.items[0].items) {
      if (w.kind != SpecNode::Kind::kNumber)
        throw std::invalid_argument("threshold: weights are numbers");
      weights.push_back(w.number);
    }
    return make_threshold(space, std::move(weights),
                          arg_number(spec, 1, "threshold"));
  }
  if (spec.is_call("external")) {
    if (spec.items.size() != 1 ||
        spec.items[0].kind != SpecNode::Kind::kString)
      throw std::invalid_argument("external: expected a command string");
    return make_external(space, spec.items[0].text);
  }
  throw std::invalid_argument("unknown objective spec '" + spec.text + "'");
}

std::unique_ptr<LabelFunction> make_label(const SpecNode& spec,
                                          const ProductSpace& space) {
  if (spec.is_call("const"))
    return make_const_label(static_cast<Label>(arg_number(spec, 0, "const")));
  if (spec.is_call("external")) {
    if (spec.items.size() != 1 ||
        spec.items[0].kind != SpecNode::Kind::kString)
      throw std::invalid_argument("external: expected a command string");
    return make_external_label(space, spec.items[0].text);
  }
  std::shared_ptr<const Objective> f = make_objective(spec, space);
  return make_label_function(std::move(f));
}

std::unique_ptr<Learner> make_learner(const SpecNode& spec,
                                      const ProductSpace& instance_space) {
  if (spec.is_call("majority_label"))
    return make_toy_learner(LearnerKind::kMajorityLabel);
  if (spec.is_call("threshold_1d")) {
    uint32_t coord = spec.items.empty() ? 1 : arg_u32(spec, 0, "threshold_1d");
    if (coord < 1)
      throw std::invalid_argument("threshold_1d: coords are 1-based");
    return make_toy_learner(LearnerKind::kThreshold1D, coord - 1);
  }
  if (spec.is_call("nearest_centroid"))
    return make_toy_learner(LearnerKind::kNearestCentroid);
  if (spec.is_call("external")) {
    if (spec.items.size() != 1 ||
        spec.items[0].kind != SpecNode::Kind::kString)
      throw std::invalid_argument("external: expected a command string");
    return make_external_learner(instance_space, spec.items[0].text);
  }
  throw std::invalid_argument("unknown learner spec '" + spec.text + "'");
}

// ---------------------------------------------------------------------------
// ExperimentConfig

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    cfg.entries_[key] = value;
  }
  return cfg;
}

bool ExperimentConfig::has(const std::string& key) const {
  return entries_.count(key) != 0;
}

std::string ExperimentConfig::raw(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end())
    throw std::invalid_argument("config: missing key '" + key + "'");
  return it->second;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double ExperimentConfig::get_number(const std::string& key,
                                    double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument("config: key '" + key +
                                "' is not a number: '" + it->second + "'");
  }
}

uint64_t ExperimentConfig::get_u64(const std::string& key,
                                   uint64_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    size_t pos = 0;
    unsigned long long v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument("config: key '" + key +
                                "' is not an unsigned integer: '" +
                                it->second + "'");
  }
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw std::invalid_argument("config: key '" + key + "' is not a bool");
}

std::vector<double> ExperimentConfig::get_numbers(
    const std::string& key, std::vector<double> fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  SpecNode node = parse_spec(it->second);
  if (node.kind != SpecNode::Kind::kList)
    throw std::invalid_argument("config: key '" + key + "' is not a list");
  std::vector<double> out;
  for (const auto& item : node.items) {
    if (item.kind != SpecNode::Kind::kNumber)
      throw std::invalid_argument("config: key '" + key +
                                  "' has a non-numeric element");
    out.push_back(item.number);
  }
  return out;
}

ExperimentKind ExperimentConfig::kind() const {
  std::string k = get_string("kind");
  if (k == "bias") return ExperimentKind::kBias;
  if (k == "evasion") return ExperimentKind::kEvasion;
  if (k == "poison" || k == "poisoning") return ExperimentKind::kPoison;
  if (k == "verify_exact") return ExperimentKind::kVerifyExact;
  if (k == "estimator_tails") return ExperimentKind::kEstimatorTails;
  if (k == "bounds") return ExperimentKind::kBounds;
  throw std::invalid_argument("config: unknown kind '" + k + "'");
}

std::vector<Diagnostic> ExperimentConfig::validate() const {
  std::vector<Diagnostic> out;
  auto error = [&](const std::string& field, const std::string& msg) {
    out.push_back({Diagnostic::Severity::kError, field, msg});
  };
  auto warning = [&](const std::string& field, const std::string& msg) {
    out.push_back({Diagnostic::Severity::kWarning, field, msg});
  };

  ExperimentKind k;
  try {
    k = kind();
  } catch (const std::exception& e) {
    error("kind", e.what());
    return out;
  }

  if (!has("params.seed") && !has("seed"))
    error("params.seed", "params.seed required");

  bool needs_attack = k == ExperimentKind::kBias ||
                      k == ExperimentKind::kEvasion ||
                      k == ExperimentKind::kPoison;
  if (needs_attack) {
    std::string mode = get_string("mode", "exact");
    if (mode != "exact" && mode != "monte_carlo")
      error("mode", "mode must be exact or monte_carlo");
    double tau = -1.0;
    try {
      tau = get_number("tau", -1.0);
    } catch (const std::exception& e) {
      error("tau", e.what());
    }
    if (!(tau > 0.0 && tau < 1.0)) error("tau", "tau must lie in (0,1)");
    if (mode == "monte_carlo") {
      double gamma = -1.0;
      try {
        gamma = get_number("gamma", -1.0);
      } catch (const std::exception& e) {
        error("gamma", e.what());
      }
      if (!(gamma > 0.0 && gamma < 1.0))
        error("gamma", "monte_carlo mode needs gamma in (0,1)");
      else if (tau > 0.0 && tau <= 2.0 * gamma)
        warning("tau",
                "tau <= 2*gamma: the tampering-budget guarantee needs "
                "tau > 2*gamma and will not be attached");
    }

    std::string space_key =
        k == ExperimentKind::kPoison ? "instances" : "space";
    if (!has(space_key)) {
      error(space_key, space_key + " required");
    } else {
      try {
        ProductSpace space = make_space(parse_spec(raw(space_key)));
        if (mode == "exact") {
          const ProductSpace* attacked = &space;
          std::optional<ProductSpace> stream;
          if (k == ExperimentKind::kPoison) {
            uint64_t m = get_u64("m", 0);
            if (m < 1) {
              error("m", "m must be >= 1");
            } else {
              stream = ProductSpace::power(
                  std::make_shared<ProductSpace>(space),
                  static_cast<uint32_t>(m));
              attacked = &*stream;
            }
          }
          if (attacked && !attacked->enumerable(kDefaultEnumerationCap) &&
              !has("enumeration_cap"))
            error("mode", "exact mode needs enumerable space");
          if (attacked && has("enumeration_cap") &&
              !attacked->enumerable(get_u64("enumeration_cap", 0)))
            error("mode", "exact mode needs enumerable space");
        }
      } catch (const std::exception& e) {
        error(space_key, e.what());
      }
    }

    if (k == ExperimentKind::kBias && !has("objective"))
      error("objective", "objective required");
    if (k == ExperimentKind::kEvasion) {
      if (!has("hypothesis")) error("hypothesis", "hypothesis required");
      if (!has("concept")) error("concept", "concept required");
    }
    if (k == ExperimentKind::kPoison) {
      if (!has("learner")) error("learner", "learner required");
      if (!has("concept")) error("concept", "concept required");
      if (!has("goal")) error("goal", "goal required");
      if (get_u64("m", 0) < 1) error("m", "m must be >= 1");
    }
  }
  if (k == ExperimentKind::kBounds && !has("formula"))
    error("formula", "formula required");
  return out;
}

}  // namespace tamper
