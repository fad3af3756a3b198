#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace rejuv::core {

enum class QuorumMode : std::uint8_t {
  kClassic,  // n = 3t+1, q = 2t+1
  kHybrid,   // trusted collector: n = 2t+1, q = t+1
};

std::string_view mode_name(QuorumMode mode) noexcept;
std::optional<QuorumMode> parse_mode(std::string_view name) noexcept;

/// Throws Error(kNegativeT) for t < 0.
int required_replicas(int t, QuorumMode mode);
int quorum_size(int t, QuorumMode mode);

struct QuorumConfig {
  int t = 1;
  QuorumMode mode = QuorumMode::kClassic;

  int n() const { return required_replicas(t, mode); }
  int q() const { return quorum_size(t, mode); }

  friend bool operator==(const QuorumConfig&, const QuorumConfig&) = default;
};

/// Outcome matching: scans responses in arrival order and returns the first
/// value whose multiplicity reaches q, or nullopt if none does.
std::optional<std::uint64_t> match_outcomes(std::span<const std::uint64_t> arrivals, int q);

}  // namespace rejuv::core
