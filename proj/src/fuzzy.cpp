#include "sidle/fuzzy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sidle/errors.hpp"

namespace sidle {

double Triangle::membership(double x) const {
  if (x < a || x > c) return 0.0;
  if (x == b) return 1.0;
  if (x < b) return (x - a) / (b - a);
  return (c - x) / (c - b);
}

namespace {

FuzzyInput scaled_input(std::string name, double lo, double hi) {
  const double mid = (lo + hi) / 2.0;
  return {std::move(name), lo, hi, {Triangle{lo, lo, mid}, Triangle{lo, mid, hi},
                                    Triangle{mid, hi, hi}}};
}

constexpr const char* kLevelNames[] = {"low", "medium", "high"};
constexpr const char* kChanceNames[] = {"very_low", "low", "medium", "high", "very_high"};

}  // namespace

FuzzyRuleBase FuzzyRuleBase::defaults(double degree_max) {
  FuzzyRuleBase rb;
  rb.inputs = {scaled_input("energy", 0.0, 1.0), scaled_input("degree", 0.0, degree_max),
               scaled_input("centrality", 0.0, 1.0)};
  rb.outputs = {Triangle{0, 0, 25}, Triangle{0, 25, 50}, Triangle{25, 50, 75},
                Triangle{50, 75, 100}, Triangle{75, 100, 100}};
  // Energy dominates; degree and centrality nudge within an energy band.
  for (int e = 0; e < 3; ++e) {
    for (int d = 0; d < 3; ++d) {
      for (int c = 0; c < 3; ++c) {
        const int s = d + c;
        int out = 0;
        if (e == 0) out = s <= 2 ? 0 : 1;
        if (e == 1) out = s <= 1 ? 1 : (s <= 3 ? 2 : 3);
        if (e == 2) out = s == 0 ? 2 : (s <= 2 ? 3 : 4);
        rb.rules[static_cast<std::size_t>(e * 9 + d * 3 + c)] = out;
      }
    }
  }
  return rb;
}

void FuzzyRuleBase::validate() const {
  for (const FuzzyInput& in : inputs) {
    const std::string key = "fca.rules.inputs." + in.name;
    if (!(in.max > in.min)) throw ConfigError(key, "max must exceed min");
    for (const Triangle& t : in.sets) {
      if (!(t.a <= t.b && t.b <= t.c) || t.a == t.c) {
        throw ConfigError(key, "each set needs a <= b <= c with a < c");
      }
    }
    // Coverage with overlap: sample the domain; every point must belong to
    // some set, and adjacent sets must share support.
    for (int i = 0; i <= 200; ++i) {
      const double x = in.min + (in.max - in.min) * i / 200.0;
      double best = 0.0;
      for (const Triangle& t : in.sets) best = std::max(best, t.membership(x));
      if (best <= 0.0) throw ConfigError(key, "sets leave part of the domain uncovered");
    }
    for (std::size_t s = 0; s + 1 < in.sets.size(); ++s) {
      if (!(in.sets[s + 1].a < in.sets[s].c)) {
        throw ConfigError(key, "adjacent sets must overlap");
      }
    }
  }
  for (const Triangle& t : outputs) {
    if (!(t.a <= t.b && t.b <= t.c) || t.a == t.c || t.a < 0.0 || t.c > 100.0) {
      throw ConfigError("fca.rules.outputs", "sets must lie in [0, 100] with a < c");
    }
  }
  for (int r : rules) {
    if (r < 0 || r >= static_cast<int>(kChanceLevels)) {
      throw ConfigError("fca.rules.table", "every rule must name an output level 0..4");
    }
  }
  if (resolution < 2) throw ConfigError("fca.rules.resolution", "must be >= 2");
}

double fca_chance(double energy_ratio, double degree, double centrality,
                  const FuzzyRuleBase& rb) {
  const std::array<double, 3> raw{energy_ratio, degree, centrality};
  std::array<std::array<double, 3>, 3> mu{};
  for (std::size_t i = 0; i < 3; ++i) {
    const FuzzyInput& in = rb.inputs[i];
    const double x = std::clamp(raw[i], in.min, in.max);
    for (std::size_t s = 0; s < 3; ++s) mu[i][s] = in.sets[s].membership(x);
  }
  // Strength of each output level: max over rules of the min of antecedents.
  std::array<double, kChanceLevels> strength{};
  for (int e = 0; e < 3; ++e) {
    for (int d = 0; d < 3; ++d) {
      for (int c = 0; c < 3; ++c) {
        const double w = std::min({mu[0][e], mu[1][d], mu[2][c]});
        const auto level = static_cast<std::size_t>(rb.rule(e, d, c));
        strength[level] = std::max(strength[level], w);
      }
    }
  }
  double num = 0.0;
  double den = 0.0;
  for (int k = 0; k < rb.resolution; ++k) {
    const double y = 100.0 * k / (rb.resolution - 1);
    double m = 0.0;
    for (std::size_t l = 0; l < kChanceLevels; ++l) {
      m = std::max(m, std::min(strength[l], rb.outputs[l].membership(y)));
    }
    num += y * m;
    den += m;
  }
  return den > 0.0 ? num / den : 0.0;
}

// File schema:
//   { "inputs": { "energy": {"min":0,"max":1,"low":[a,b,c],"medium":[..],"high":[..]},
//                 "degree": {...}, "centrality": {...} },
//     "outputs": { "very_low":[a,b,c], ..., "very_high":[a,b,c] },
//     "rules": [ {"energy":"low","degree":"low","centrality":"low","chance":"very_low"}, ... ],
//     "resolution": 1001 }
FuzzyRuleBase rule_base_from_json(const std::string& text) {
  using nlohmann::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("fca.rules", std::string("malformed rule file: ") + e.what());
  }
  auto level_of = [](const std::string& key, const std::string& v, auto& names) {
    for (std::size_t i = 0; i < std::size(names); ++i) {
      if (v == names[i]) return static_cast<int>(i);
    }
    throw ConfigError(key, "unknown level '" + v + "'");
  };
  auto triangle = [](const std::string& key, const json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(key, "expected [a, b, c]");
    return Triangle{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  };

  FuzzyRuleBase rb = FuzzyRuleBase::defaults();
  try {
    const json& inputs = root.at("inputs");
    for (FuzzyInput& in : rb.inputs) {
      const std::string key = "fca.rules.inputs." + in.name;
      if (!inputs.contains(in.name)) throw ConfigError(key, "missing input");
      const json& ji = inputs.at(in.name);
      in.min = ji.at("min").get<double>();
      in.max = ji.at("max").get<double>();
      for (std::size_t s = 0; s < 3; ++s) {
        in.sets[s] = triangle(key + "." + kLevelNames[s], ji.at(kLevelNames[s]));
      }
    }
    const json& outs = root.at("outputs");
    for (std::size_t l = 0; l < kChanceLevels; ++l) {
      rb.outputs[l] = triangle(std::string("fca.rules.outputs.") + kChanceNames[l],
                               outs.at(kChanceNames[l]));
    }
    std::array<bool, 27> seen{};
    for (const json& r : root.at("rules")) {
      const int e = level_of("fca.rules.rules.energy", r.at("energy").get<std::string>(),
                             kLevelNames);
      const int d = level_of("fca.rules.rules.degree", r.at("degree").get<std::string>(),
                             kLevelNames);
      const int c = level_of("fca.rules.rules.centrality",
                             r.at("centrality").get<std::string>(), kLevelNames);
      const auto idx = static_cast<std::size_t>(e * 9 + d * 3 + c);
      if (seen[idx]) throw ConfigError("fca.rules.rules", "duplicate rule");
      seen[idx] = true;
      rb.rules[idx] = level_of("fca.rules.rules.chance", r.at("chance").get<std::string>(),
                               kChanceNames);
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw ConfigError("fca.rules.rules", "rule table must cover all 27 combinations");
    }
    if (root.contains("resolution")) rb.resolution = root.at("resolution").get<int>();
  } catch (const json::exception& e) {
    throw ConfigError("fca.rules", std::string("invalid rule file: ") + e.what());
  }
  rb.validate();
  return rb;
}

std::string rule_base_to_json(const FuzzyRuleBase& rb) {
  using nlohmann::ordered_json;
  ordered_json root;
  for (const FuzzyInput& in : rb.inputs) {
    ordered_json ji;
    ji["min"] = in.min;
    ji["max"] = in.max;
    for (std::size_t s = 0; s < 3; ++s) {
      ji[kLevelNames[s]] = {in.sets[s].a, in.sets[s].b, in.sets[s].c};
    }
    root["inputs"][in.name] = ji;
  }
  for (std::size_t l = 0; l < kChanceLevels; ++l) {
    root["outputs"][kChanceNames[l]] = {rb.outputs[l].a, rb.outputs[l].b, rb.outputs[l].c};
  }
  root["rules"] = ordered_json::array();
  for (int e = 0; e < 3; ++e) {
    for (int d = 0; d < 3; ++d) {
      for (int c = 0; c < 3; ++c) {
        root["rules"].push_back({{"energy", kLevelNames[e]},
                                 {"degree", kLevelNames[d]},
                                 {"centrality", kLevelNames[c]},
                                 {"chance", kChanceNames[rb.rule(e, d, c)]}});
      }
    }
  }
  root["resolution"] = rb.resolution;
  return root.dump(2) + "\n";
}

FuzzyRuleBase load_rule_base(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return rule_base_from_json(buf.str());
}

}  // namespace sidle
