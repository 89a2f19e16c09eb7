#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>

namespace sidle {

// Typed integer identifier. Ids are dense indices assigned at topology
// construction, so they double as vector subscripts via index().
template <typename Tag>
struct Id {
  std::uint32_t value = std::numeric_limits<std::uint32_t>::max();

  constexpr Id() = default;
  constexpr explicit Id(std::uint32_t v) : value(v) {}

  [[nodiscard]] constexpr std::size_t index() const { return value; }
  [[nodiscard]] constexpr bool valid() const {
    return value != std::numeric_limits<std::uint32_t>::max();
  }

  friend constexpr auto operator<=>(Id, Id) = default;
  friend std::ostream& operator<<(std::ostream& os, Id id) {
    return id.valid() ? os << id.value : os << '-';
  }
};

struct NodeTag {};
struct CellTag {};
struct ClusterTag {};

using NodeId = Id<NodeTag>;
using CellId = Id<CellTag>;
using ClusterId = Id<ClusterTag>;

using ChannelIndex = std::int32_t;
using CodeIndex = std::int32_t;

// Simulated time in milliseconds.
using SimTime = std::int64_t;

}  // namespace sidle

template <typename Tag>
struct std::hash<sidle::Id<Tag>> {
  std::size_t operator()(sidle::Id<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
