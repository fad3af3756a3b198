#include "rejuv/sim/rng.hpp"

#include <fmt/format.h>

#include "rejuv/sim/error.hpp"

namespace rejuv::sim {
namespace {

__extension__ using Wide = unsigned __int128;

}  // namespace

std::int64_t Rng::uniform(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) {
    throw Error(Errc::kInvalidRange, fmt::format("uniform({}, {})", lo, hi));
  }
  const std::uint64_t x = next();
  // span wraps to 0 only for the full 64-bit range.
  const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
  std::uint64_t offset = x;
  if (span != 0) {
    offset = static_cast<std::uint64_t>((static_cast<Wide>(x) * span) >> 64);
  }
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + offset);
}

}  // namespace rejuv::sim
