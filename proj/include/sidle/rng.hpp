#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace sidle {

namespace stream {
inline constexpr std::string_view kPlacement = "placement";
inline constexpr std::string_view kElectionDelay = "election-delay";
inline constexpr std::string_view kLoss = "loss";
inline constexpr std::string_view kLeachThreshold = "leach-threshold";
inline constexpr std::string_view kSensor = "sensor";
}  // namespace stream

// Reproducible random stream keyed by (seed, label). Distinct labels give
// independent sequences; the same pair always replays the same sequence.
// Draws are computed from raw engine bits so results do not depend on the
// standard library's distribution implementations.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view label);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform01();
  // Uniform integer in [lo, hi], both inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] const std::string& label() const { return label_; }

 private:
  std::uint64_t seed_;
  std::string label_;
  std::mt19937_64 engine_;
};

[[nodiscard]] std::uint64_t derive_stream_seed(std::uint64_t seed,
                                               std::string_view label);

}  // namespace sidle
