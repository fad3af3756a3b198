#include "rejuv/core/quorum.hpp"

#include <fmt/format.h>

#include <map>

#include "rejuv/sim/error.hpp"

namespace rejuv::core {
namespace {

void require_non_negative(int t) {
  if (t < 0) throw Error(Errc::kNegativeT, fmt::format("t = {}", t));
}

}  // namespace

std::string_view mode_name(QuorumMode mode) noexcept {
  return mode == QuorumMode::kClassic ? "classic" : "hybrid";
}

std::optional<QuorumMode> parse_mode(std::string_view name) noexcept {
  if (name == "classic") return QuorumMode::kClassic;
  if (name == "hybrid") return QuorumMode::kHybrid;
  return std::nullopt;
}

int required_replicas(int t, QuorumMode mode) {
  require_non_negative(t);
  return mode == QuorumMode::kClassic ? 3 * t + 1 : 2 * t + 1;
}

int quorum_size(int t, QuorumMode mode) {
  require_non_negative(t);
  return mode == QuorumMode::kClassic ? 2 * t + 1 : t + 1;
}

std::optional<std::uint64_t> match_outcomes(std::span<const std::uint64_t> arrivals, int q) {
  std::map<std::uint64_t, int> counts;
  for (std::uint64_t value : arrivals) {
    if (++counts[value] >= q) return value;
  }
  return std::nullopt;
}

}  // namespace rejuv::core
