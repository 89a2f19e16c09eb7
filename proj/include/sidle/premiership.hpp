#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "sidle/ids.hpp"

namespace sidle {

// Election inputs, all small non-negative integers.
//   re  residual energy level, 0..10
//   ng  neighbor grade: reachable relevant peers
//   pl  path-length proximity toward the base station (higher is closer)
//   ss  received signal strength level, 0..10
struct PremiershipInputs {
  int re = 0;
  int ng = 0;
  int pl = 0;
  int ss = 0;

  void validate() const;
  friend bool operator==(const PremiershipInputs&, const PremiershipInputs&) = default;
};

// Re^3 + 2*Ss^2 + 3*Pl + Ng, in 64-bit arithmetic.
[[nodiscard]] std::int64_t premiership(const PremiershipInputs& in);

// coefficient * value^power summed over (Re, Ng, Pl, Ss). The default
// instance is the same polynomial as premiership().
struct PremiershipPolynomial {
  std::array<std::int64_t, 4> coefficients{1, 1, 3, 2};  // Re, Ng, Pl, Ss
  std::array<int, 4> powers{3, 1, 1, 2};

  void validate() const;
  [[nodiscard]] std::int64_t evaluate(const PremiershipInputs& in) const;
};

struct Candidate {
  NodeId id;
  PremiershipInputs inputs;
};

// Highest score wins; equal scores go to the lowest node id.
[[nodiscard]] NodeId select_premier_leader(std::span<const Candidate> candidates);
[[nodiscard]] NodeId select_premier_leader(std::span<const Candidate> candidates,
                                           const PremiershipPolynomial& polynomial);

}  // namespace sidle
