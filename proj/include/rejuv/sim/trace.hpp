#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rejuv/sim/types.hpp"

namespace rejuv::sim {

// Sub-codes carried by trace records. Their names are part of the trace format.

enum class MsgType : std::uint8_t { kExecute, kResponse, kCommit, kStateRequest, kStateReply, kCatchup };
enum class TimerTag : std::uint8_t {
  kBoot,
  kOpArrival,
  kAgreementTimeout,
  kStateTimeout,
  kStateInstall,
  kResize,
};
enum class TriggerTag : std::uint8_t { kRandom, kPeriodic, kProactive };
enum class Origin : std::uint8_t { kRandom, kPeriodic, kReactive, kProactive, kManual };
enum class DestroyReason : std::uint8_t { kRejuvenation, kScaleIn, kAbort, kManual };
enum class Warning : std::uint8_t {
  kDiversityUnavailable,
  kNoTarget,
  kAlreadyTargeted,
  kNotLaunched,
  kStaleTarget,
};
enum class ResizeError : std::uint8_t { kNoFreePblock, kStateTransferFailed };

enum class RecordKind : std::uint8_t {
  // One record per processed engine event.
  kDeliver,
  kDrop,
  kTimer,
  kSpawnComplete,
  kAdversaryStep,
  kTrigger,
  // Annotations emitted by handlers; they share the (tick, seq) of the event being processed.
  kSend,
  kSpawn,
  kRetire,
  kLaunch,
  kDestroy,
  kIssue,
  kDecide,
  kUnreachable,
  kInsufficient,
  kCommit,
  kStateAdopt,
  kStateUnreachable,
  kInstall,
  kRejuvRequest,
  kRejuvDeferred,
  kRejuvenation,
  kRejuvAbort,
  kResize,
  kResizeError,
  kCrack,
  kCompromise,
  kAnalysisReset,
  kWarn,
};

inline constexpr std::size_t kRecordKindCount = static_cast<std::size_t>(RecordKind::kWarn) + 1;
inline constexpr std::size_t kMaxFields = 6;

using Fields = std::array<std::uint64_t, kMaxFields>;

struct TraceRecord {
  Tick tick = 0;
  std::uint64_t seq = 0;
  RecordKind kind = RecordKind::kTimer;
  std::uint8_t sub = 0;
  ActorId actor = 0;
  Fields f{};

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Totally ordered log of a run: sorted by (tick, seq); annotations follow
/// the event record they belong to.
struct Trace {
  std::vector<TraceRecord> records;
};

// --- Schema ---------------------------------------------------------------

std::string_view kind_name(RecordKind kind) noexcept;
std::optional<RecordKind> parse_kind(std::string_view name) noexcept;
bool is_event_kind(RecordKind kind) noexcept;

/// Payload key that carries the sub-code, or empty when the kind has none.
std::string_view sub_key(RecordKind kind) noexcept;
std::string_view sub_name(RecordKind kind, std::uint8_t sub) noexcept;
std::optional<std::uint8_t> parse_sub(RecordKind kind, std::string_view name) noexcept;

/// Ordered payload field names for a (kind, sub) pair.
std::span<const std::string_view> field_names(RecordKind kind, std::uint8_t sub) noexcept;

std::string_view msg_type_name(MsgType type) noexcept;
std::string_view timer_name(TimerTag tag) noexcept;
std::string_view origin_name(Origin origin) noexcept;

/// Appends one JSON line (without trailing newline) for `record` to `out`.
/// Key order and number formatting are fixed, so equal records give equal bytes.
void append_record(std::string& out, const TraceRecord& record);
std::string serialize_record(const TraceRecord& record);

/// Parses a line produced by `append_record`. Throws Error(kMalformedTrace).
TraceRecord parse_record(std::string_view line);

}  // namespace rejuv::sim
