#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rejuv/core/log_entry.hpp"

namespace rejuv::core {

/// State digest: 64-bit FNV-1a over the log, each entry serialized as
/// seq, op, outcome (8 bytes little-endian each) followed by one `decided` byte.
inline constexpr std::uint64_t kEmptyDigest = 0xCBF29CE484222325ull;

std::uint64_t fold_digest(std::uint64_t digest, const LogEntry& entry) noexcept;
std::uint64_t digest_of(std::span<const LogEntry> entries) noexcept;

/// Replica log with cached prefix digests (`digest_at(m)` is O(1)).
class ReplicaState {
 public:
  ReplicaState() : digests_{kEmptyDigest} {}

  void append(const LogEntry& entry);
  void assign(std::vector<LogEntry> entries);

  std::size_t size() const noexcept { return log_.size(); }
  const std::vector<LogEntry>& entries() const noexcept { return log_; }
  std::uint64_t digest() const noexcept { return digests_.back(); }
  std::uint64_t digest_at(std::size_t prefix) const { return digests_.at(prefix); }
  std::vector<LogEntry> prefix(std::size_t length) const;
  /// Copy of the first `length` entries with their cached digests.
  ReplicaState truncated(std::size_t length) const;
  /// Replaces the last entry, or appends when the log is empty.
  void replace_last(const LogEntry& entry);

 private:
  std::vector<LogEntry> log_;
  std::vector<std::uint64_t> digests_;
};

/// The replicated application: a running-sum register. Each operation adds
/// its operand; the outcome is the register value afterwards.
struct CounterMachine {
  std::uint64_t value = 0;

  std::uint64_t apply(std::uint64_t op) noexcept {
    value += op;
    return value;
  }
};

}  // namespace rejuv::core
