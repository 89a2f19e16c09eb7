#pragma once

#include <array>
#include <string>

namespace sidle {

// Triangular membership with feet a, c and peak b. a == b or b == c gives a
// shoulder that holds 1 at that edge.
struct Triangle {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  [[nodiscard]] double membership(double x) const;
};

struct FuzzyInput {
  std::string name;
  double min = 0.0;
  double max = 1.0;
  std::array<Triangle, 3> sets;  // low, medium, high
};

inline constexpr std::size_t kChanceLevels = 5;  // very low .. very high

// Three-input Mamdani system for cluster-head chance.
struct FuzzyRuleBase {
  std::array<FuzzyInput, 3> inputs;  // residual energy, degree, centrality
  std::array<Triangle, kChanceLevels> outputs;  // over [0, 100]
  // Output level for (energy, degree, centrality) levels, indexed e*9 + d*3 + c.
  std::array<int, 27> rules{};
  int resolution = 1001;  // centroid sample points over [0, 100]

  [[nodiscard]] static FuzzyRuleBase defaults(double degree_max = 20.0);
  // Sets must cover each domain with overlap; every rule names a level.
  void validate() const;
  [[nodiscard]] int rule(int energy, int degree, int centrality) const {
    return rules[static_cast<std::size_t>(energy * 9 + degree * 3 + centrality)];
  }
};

[[nodiscard]] FuzzyRuleBase rule_base_from_json(const std::string& text);
[[nodiscard]] std::string rule_base_to_json(const FuzzyRuleBase& rules);
[[nodiscard]] FuzzyRuleBase load_rule_base(const std::string& path);

// Fuzzify (inputs clamped to their domains), min-conjunction per rule, max
// aggregation, centroid over the sampled output range.
[[nodiscard]] double fca_chance(double energy_ratio, double degree, double centrality,
                                const FuzzyRuleBase& rules);

}  // namespace sidle
