#include "rejuv/core/replica.hpp"

#include <stdexcept>

namespace rejuv::core {
namespace {

constexpr std::uint64_t kFnvPrime = 0x00000100000001B3ull;

std::uint64_t fold_u64(std::uint64_t digest, std::uint64_t value) noexcept {
  for (int i = 0; i < 8; ++i) {
    digest ^= (value >> (8 * i)) & 0xFF;
    digest *= kFnvPrime;
  }
  return digest;
}

}  // namespace

std::uint64_t fold_digest(std::uint64_t digest, const LogEntry& entry) noexcept {
  digest = fold_u64(digest, entry.seq);
  digest = fold_u64(digest, entry.op);
  digest = fold_u64(digest, entry.outcome);
  digest ^= entry.decided ? 1u : 0u;
  return digest * kFnvPrime;
}

std::uint64_t digest_of(std::span<const LogEntry> entries) noexcept {
  std::uint64_t digest = kEmptyDigest;
  for (const LogEntry& e : entries) digest = fold_digest(digest, e);
  return digest;
}

void ReplicaState::append(const LogEntry& entry) {
  log_.push_back(entry);
  digests_.push_back(fold_digest(digests_.back(), entry));
}

void ReplicaState::assign(std::vector<LogEntry> entries) {
  log_ = std::move(entries);
  digests_.assign(1, kEmptyDigest);
  digests_.reserve(log_.size() + 1);
  for (const LogEntry& e : log_) digests_.push_back(fold_digest(digests_.back(), e));
}

std::vector<LogEntry> ReplicaState::prefix(std::size_t length) const {
  if (length > log_.size()) throw std::out_of_range("prefix longer than log");
  return {log_.begin(), log_.begin() + static_cast<std::ptrdiff_t>(length)};
}

ReplicaState ReplicaState::truncated(std::size_t length) const {
  if (length > log_.size()) throw std::out_of_range("prefix longer than log");
  ReplicaState copy;
  copy.log_.assign(log_.begin(), log_.begin() + static_cast<std::ptrdiff_t>(length));
  copy.digests_.assign(digests_.begin(), digests_.begin() + static_cast<std::ptrdiff_t>(length) + 1);
  return copy;
}

void ReplicaState::replace_last(const LogEntry& entry) {
  if (!log_.empty()) {
    log_.pop_back();
    digests_.pop_back();
  }
  append(entry);
}

}  // namespace rejuv::core
