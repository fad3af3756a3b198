#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace rejuv {

/// Simulated time. The unit is abstract; scenarios declare every latency in ticks.
using Tick = std::uint64_t;

template <typename Tag>
struct StrongId {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(StrongId, StrongId) = default;
};

struct TileTag {};
struct TemplateTag {};
struct PblockTag {};

/// Tiles are numbered from 1 in spawn order; 0 is reserved for the Core Logic actor.
using TileId = StrongId<TileTag>;
/// Position of a softcore template in the library (registration order).
using TemplateIndex = StrongId<TemplateTag>;
using PblockId = StrongId<PblockTag>;

using ActorId = std::uint32_t;
inline constexpr ActorId kCoreLogic = 0;

constexpr ActorId actor_of(TileId tile) noexcept { return tile.value; }

}  // namespace rejuv

template <typename Tag>
struct std::hash<rejuv::StrongId<Tag>> {
  std::size_t operator()(rejuv::StrongId<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
