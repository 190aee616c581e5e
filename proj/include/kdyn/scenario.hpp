#pragma once

#include "kdyn/serialize.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kdyn {

enum class ScenarioKind { simulate, certify_free, find_measure, morse_smale, giet_blowup, verify };
std::string to_string(ScenarioKind k);
std::optional<ScenarioKind> scenario_kind(const std::string& s);

// Exactly one of the four sources is set.
struct GeneratorSpec {
  std::string name;
  std::optional<PrefixTable> prefix_table;
  std::optional<std::vector<Branch>> branches;
  std::optional<Giet> giet;
  std::optional<std::string> inverse_of;

  bool operator==(const GeneratorSpec& o) const;
};

// Unset fields fall back to the budget profile.
struct BudgetSpec {
  std::optional<std::size_t> n, runs, steps, p_cap;
  std::optional<int> max_len, d_max, depth, L;
  std::optional<Rational> eps, rho, radius;
  std::optional<Word> word;  // a fixed group element, as generator names

  bool operator==(const BudgetSpec& o) const = default;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::simulate;
  Space space;  // null for GIET scenarios
  std::vector<GeneratorSpec> generators;
  std::vector<Rational> probabilities;  // empty means uniform
  std::uint64_t seed = 0;
  BudgetSpec budgets;
  std::optional<SpanUnion> region_A, region_B;
  std::optional<std::string> certificate;
  std::string out_dir;
  bool emit_series = false;

  bool operator==(const Scenario& o) const;
};

struct Budget {
  std::size_t n, runs, steps, p_cap;
  int max_len, d_max, depth, L;
  Rational eps, rho, radius;
};

// "quick", "default" or "thorough"; throws on other names.
Budget budget_profile(const std::string& name);
Budget resolve(const BudgetSpec& spec, const Budget& profile);
Json budget_json(const Budget& b);

Scenario parse_scenario(const std::string& text);
Scenario scenario_from_json(const Json& j);
Json scenario_json(const Scenario& s);

std::vector<std::string> generator_names(const Scenario& s);
// The walk over the PA generators; throws for GIET scenarios.
WalkModel build_model(const Scenario& s);
std::vector<Giet> build_giets(const Scenario& s);
// Names compose outermost first; "X^-1" resolves to the inverse of X.
PAHomeo word_element(const WalkModel& model, const Word& w);

}  // namespace kdyn
