#pragma once

#include <cstdint>

namespace rejuv::core {

/// One committed slot of the replicated log. `decided` is false when the
/// Core Logic closed the slot without a matching quorum; the operation still
/// executed on every replica, so it stays in the log.
struct LogEntry {
  std::uint64_t seq = 0;
  std::uint64_t op = 0;
  std::uint64_t outcome = 0;
  bool decided = true;

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

}  // namespace rejuv::core
