#include "sidle/premiership.hpp"

#include <string>

#include "sidle/errors.hpp"

namespace sidle {

void PremiershipInputs::validate() const {
  if (re < 0 || re > 10) throw ContractViolation("premiership: re outside 0..10");
  if (ss < 0 || ss > 10) throw ContractViolation("premiership: ss outside 0..10");
  if (ng < 0) throw ContractViolation("premiership: ng negative");
  if (pl < 0) throw ContractViolation("premiership: pl negative");
}

std::int64_t premiership(const PremiershipInputs& in) {
  const std::int64_t re = in.re;
  const std::int64_t ss = in.ss;
  return re * re * re + 2 * (ss * ss) + 3 * static_cast<std::int64_t>(in.pl) +
         static_cast<std::int64_t>(in.ng);
}

void PremiershipPolynomial::validate() const {
  static constexpr const char* kNames[] = {"re", "ng", "pl", "ss"};
  for (std::size_t i = 0; i < 4; ++i) {
    if (coefficients[i] < 0) {
      throw ConfigError(std::string("sidle.premiership.") + kNames[i] + "_coefficient",
                        "must be >= 0");
    }
    if (powers[i] < 0 || powers[i] > 4) {
      throw ConfigError(std::string("sidle.premiership.") + kNames[i] + "_power",
                        "must lie in 0..4");
    }
  }
}

std::int64_t PremiershipPolynomial::evaluate(const PremiershipInputs& in) const {
  const std::array<std::int64_t, 4> values{in.re, in.ng, in.pl, in.ss};
  std::int64_t total = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    std::int64_t term = 1;
    for (int p = 0; p < powers[i]; ++p) term *= values[i];
    total += coefficients[i] * term;
  }
  return total;
}

namespace {

template <typename Score>
NodeId select_by(std::span<const Candidate> candidates, Score score) {
  if (candidates.empty()) {
    throw ContractViolation("select_premier_leader: no candidates");
  }
  NodeId best = candidates.front().id;
  std::int64_t best_score = score(candidates.front().inputs);
  for (const Candidate& c : candidates.subspan(1)) {
    const std::int64_t s = score(c.inputs);
    if (s > best_score || (s == best_score && c.id < best)) {
      best = c.id;
      best_score = s;
    }
  }
  return best;
}

}  // namespace

NodeId select_premier_leader(std::span<const Candidate> candidates) {
  return select_by(candidates, [](const PremiershipInputs& in) { return premiership(in); });
}

NodeId select_premier_leader(std::span<const Candidate> candidates,
                             const PremiershipPolynomial& polynomial) {
  return select_by(candidates,
                   [&](const PremiershipInputs& in) { return polynomial.evaluate(in); });
}

}  // namespace sidle
