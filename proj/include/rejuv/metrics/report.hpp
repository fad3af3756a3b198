#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rejuv/cli/scenario.hpp"
#include "rejuv/sim/trace.hpp"

namespace rejuv::metrics {

/// min / mean / p95 (nearest rank) / max of a sample. Empty samples print as "n/a".
struct Distribution {
  std::size_t count = 0;
  std::uint64_t min = 0;
  double mean = 0;
  std::uint64_t p95 = 0;
  std::uint64_t max = 0;

  bool empty() const noexcept { return count == 0; }
  friend bool operator==(const Distribution&, const Distribution&) = default;
};

Distribution summarize(std::vector<std::uint64_t> sample);

enum class ViolationKind : std::uint8_t {
  kWrongDecision,        // decided outcome differs from the sequential reference
  kQuorumOfCompromised,  // at least q identical responses from compromised tiles
  kInvariantBreach,      // launched - compromised launched < q
};

std::string_view violation_name(ViolationKind kind) noexcept;

struct QuorumViolation {
  Tick tick = 0;
  std::optional<std::uint64_t> op_seq;
  ViolationKind kind = ViolationKind::kInvariantBreach;

  friend bool operator==(const QuorumViolation&, const QuorumViolation&) = default;
};

struct TimelinePoint {
  Tick tick = 0;
  std::uint64_t value = 0;

  friend bool operator==(const TimelinePoint&, const TimelinePoint&) = default;
};

struct Counts {
  std::uint64_t records = 0;
  std::uint64_t ops_issued = 0;
  std::uint64_t decided = 0;
  std::uint64_t unreachable = 0;
  std::uint64_t insufficient = 0;
  std::uint64_t rejuvenations = 0;
  std::uint64_t rejuv_aborts = 0;
  std::uint64_t reactive_requests = 0;
  std::uint64_t cracks = 0;
  std::uint64_t compromises = 0;
  std::uint64_t resizes = 0;
  std::uint64_t resize_errors = 0;
  std::uint64_t messages = 0;
  std::uint64_t drops = 0;

  friend bool operator==(const Counts&, const Counts&) = default;
};

struct RunReport {
  Distribution rejuvenation_latency;  // launched_at - requested_at
  Distribution consensus_latency;     // decided_at - issued_at
  Distribution state_update_time;     // state_transferred_at - spawned_at
  std::vector<TimelinePoint> replica_count_timeline;  // Active + Retiring tiles
  std::vector<TimelinePoint> compromise_timeline;     // running compromised tiles
  std::vector<QuorumViolation> violations;
  Tick window = 0;
  std::uint64_t compromises_per_window = 0;
  Counts counts;

  std::optional<Tick> first_violation() const;
  friend bool operator==(const RunReport&, const RunReport&) = default;
};

/// Pure function of the trace. Reference outcomes come from a sequential
/// replay of the issued operations. Throws Error(kMalformedTrace).
RunReport check(const sim::Trace& trace, const cli::Scenario& scenario);

/// JSON lines: summary, distributions, timelines, violations.
std::string serialize_report(const RunReport& report);
/// Plain-text table for terminals.
std::string format_table(const RunReport& report);

/// Line per key metric that differs, "name: a -> b". Empty when none differ.
std::string compare(const RunReport& a, const RunReport& b);

/// Largest number of distinct tiles running compromised inside any window of
/// `window` consecutive ticks. `intervals` are [compromised_at, gone_at).
std::uint64_t max_in_window(const std::vector<std::pair<Tick, Tick>>& intervals, Tick window);

}  // namespace rejuv::metrics
