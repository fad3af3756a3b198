#include "rejuv/sim/trace.hpp"

#include <limits>

#include <fmt/format.h>

#include <nlohmann/json.hpp>

#include "rejuv/sim/error.hpp"

namespace rejuv::sim {
namespace {

using Names = std::span<const std::string_view>;

constexpr std::array<std::string_view, kRecordKindCount> kKindNames = {
    "deliver",       "drop",          "timer",         "spawn_complete", "adversary_step",
    "trigger",       "send",          "spawn",         "retire",         "launch",
    "destroy",       "issue",         "decide",        "unreachable",    "insufficient",
    "commit",        "state_adopt",   "state_unreachable", "install",    "rejuv_request",
    "rejuv_deferred", "rejuvenation", "rejuv_abort",   "resize",         "resize_error",
    "crack",         "compromise",    "analysis_reset", "warn",
};

constexpr std::array<std::string_view, 6> kMsgNames = {"execute",       "response",    "commit",
                                                       "state_request", "state_reply", "catchup"};
constexpr std::array<std::string_view, 6> kTimerNames = {
    "boot", "op_arrival", "agreement_timeout", "state_timeout", "state_install", "resize"};
constexpr std::array<std::string_view, 3> kTriggerNames = {"random", "periodic", "proactive"};
constexpr std::array<std::string_view, 5> kOriginNames = {"random", "periodic", "reactive",
                                                          "proactive", "manual"};
constexpr std::array<std::string_view, 4> kDestroyNames = {"rejuvenation", "scale_in", "abort",
                                                           "manual"};
constexpr std::array<std::string_view, 5> kWarnNames = {
    "diversity_unavailable", "no_target", "already_targeted", "not_launched", "stale_target"};
constexpr std::array<std::string_view, 2> kResizeErrorNames = {"no_free_pblock",
                                                               "state_transfer_failed"};

// Message payloads, indexed by MsgType.
constexpr std::array<std::string_view, 5> kExecuteFields = {"msg", "from", "op_seq", "op", "reply"};
constexpr std::array<std::string_view, 4> kResponseFields = {"msg", "from", "op_seq", "outcome"};
constexpr std::array<std::string_view, 6> kCommitMsgFields = {"msg", "from",    "op_seq",
                                                              "op",  "outcome", "decided"};
constexpr std::array<std::string_view, 4> kStateRequestFields = {"msg", "from", "request", "prefix"};
constexpr std::array<std::string_view, 5> kStateReplyFields = {"msg", "from", "request", "prefix",
                                                               "digest"};
constexpr std::array<std::string_view, 5> kCatchupFields = {"msg", "from", "first_seq", "committed",
                                                            "pending"};

constexpr std::array<std::string_view, 1> kRefFields = {"ref"};
constexpr std::array<std::string_view, 3> kSpawnCompleteFields = {"tile", "template", "pblock"};
constexpr std::array<std::string_view, 1> kStepFields = {"dt"};
constexpr std::array<std::string_view, 3> kSendFields = {"msg", "to", "delay"};
constexpr std::array<std::string_view, 6> kSpawnFields = {"tile", "template", "pblock",
                                                          "port", "start",    "ready"};
constexpr std::array<std::string_view, 1> kTileFields = {"tile"};
constexpr std::array<std::string_view, 3> kLaunchFields = {"tile", "template", "prefix"};
constexpr std::array<std::string_view, 3> kDestroyFields = {"tile", "template", "pblock"};
constexpr std::array<std::string_view, 4> kIssueFields = {"op_seq", "op", "n", "q"};
constexpr std::array<std::string_view, 5> kDecideFields = {"op_seq", "outcome", "issued_at", "q",
                                                           "votes"};
constexpr std::array<std::string_view, 4> kUnreachableFields = {"op_seq", "issued_at", "q",
                                                                "responses"};
constexpr std::array<std::string_view, 3> kInsufficientFields = {"op", "launched", "q"};
constexpr std::array<std::string_view, 4> kCommitFields = {"op_seq", "op", "outcome", "decided"};
constexpr std::array<std::string_view, 6> kAdoptFields = {"tile",   "request", "prefix",
                                                          "digest", "source",  "matches"};
constexpr std::array<std::string_view, 4> kStateUnreachableFields = {"tile", "request", "prefix",
                                                                     "replies"};
constexpr std::array<std::string_view, 3> kInstallFields = {"tile", "prefix", "digest"};
constexpr std::array<std::string_view, 2> kRejuvRequestFields = {"target", "score"};
constexpr std::array<std::string_view, 1> kTargetFields = {"target"};
constexpr std::array<std::string_view, 5> kRejuvenationFields = {
    "retired", "new_tile", "requested_at", "spawned_at", "transferred_at"};
constexpr std::array<std::string_view, 2> kAbortFields = {"retired", "new_tile"};
constexpr std::array<std::string_view, 4> kResizeFields = {"t_old", "t_new", "n_old", "n_new"};
constexpr std::array<std::string_view, 4> kResizeErrorFields = {"t_old", "t_new", "needed", "free"};
constexpr std::array<std::string_view, 2> kCrackFields = {"template", "analysis"};
constexpr std::array<std::string_view, 2> kCompromiseFields = {"tile", "template"};
constexpr std::array<std::string_view, 1> kResetFields = {"templates"};
constexpr std::array<std::string_view, 1> kWarnFields = {"subject"};

Names sub_names(RecordKind kind) noexcept {
  switch (kind) {
    case RecordKind::kDeliver:
    case RecordKind::kDrop:
    case RecordKind::kSend:
      return kMsgNames;
    case RecordKind::kTimer: return kTimerNames;
    case RecordKind::kTrigger: return kTriggerNames;
    case RecordKind::kRejuvRequest: return kOriginNames;
    case RecordKind::kDestroy: return kDestroyNames;
    case RecordKind::kWarn: return kWarnNames;
    case RecordKind::kResizeError: return kResizeErrorNames;
    default: return {};
  }
}

Names message_fields(std::uint8_t sub) noexcept {
  switch (static_cast<MsgType>(sub)) {
    case MsgType::kExecute: return kExecuteFields;
    case MsgType::kResponse: return kResponseFields;
    case MsgType::kCommit: return kCommitMsgFields;
    case MsgType::kStateRequest: return kStateRequestFields;
    case MsgType::kStateReply: return kStateReplyFields;
    case MsgType::kCatchup: return kCatchupFields;
  }
  return {};
}

std::string_view at_or_empty(Names names, std::size_t index) noexcept {
  return index < names.size() ? names[index] : std::string_view{};
}

}  // namespace

std::string_view kind_name(RecordKind kind) noexcept {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<RecordKind> parse_kind(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<RecordKind>(i);
  }
  return std::nullopt;
}

bool is_event_kind(RecordKind kind) noexcept {
  return static_cast<std::uint8_t>(kind) <= static_cast<std::uint8_t>(RecordKind::kTrigger);
}

std::string_view sub_key(RecordKind kind) noexcept {
  switch (kind) {
    case RecordKind::kDeliver:
    case RecordKind::kDrop:
    case RecordKind::kSend:
      return "type";
    case RecordKind::kTimer: return "timer";
    case RecordKind::kTrigger: return "policy";
    case RecordKind::kRejuvRequest: return "origin";
    case RecordKind::kDestroy: return "reason";
    case RecordKind::kWarn: return "code";
    case RecordKind::kResizeError: return "error";
    default: return {};
  }
}

std::string_view sub_name(RecordKind kind, std::uint8_t sub) noexcept {
  return at_or_empty(sub_names(kind), sub);
}

std::optional<std::uint8_t> parse_sub(RecordKind kind, std::string_view name) noexcept {
  const Names names = sub_names(kind);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<std::uint8_t>(i);
  }
  return std::nullopt;
}

std::span<const std::string_view> field_names(RecordKind kind, std::uint8_t sub) noexcept {
  switch (kind) {
    case RecordKind::kDeliver:
    case RecordKind::kDrop:
      return message_fields(sub);
    case RecordKind::kTimer: return kRefFields;
    case RecordKind::kSpawnComplete: return kSpawnCompleteFields;
    case RecordKind::kAdversaryStep: return kStepFields;
    case RecordKind::kTrigger: return {};
    case RecordKind::kSend: return kSendFields;
    case RecordKind::kSpawn: return kSpawnFields;
    case RecordKind::kRetire: return kTileFields;
    case RecordKind::kLaunch: return kLaunchFields;
    case RecordKind::kDestroy: return kDestroyFields;
    case RecordKind::kIssue: return kIssueFields;
    case RecordKind::kDecide: return kDecideFields;
    case RecordKind::kUnreachable: return kUnreachableFields;
    case RecordKind::kInsufficient: return kInsufficientFields;
    case RecordKind::kCommit: return kCommitFields;
    case RecordKind::kStateAdopt: return kAdoptFields;
    case RecordKind::kStateUnreachable: return kStateUnreachableFields;
    case RecordKind::kInstall: return kInstallFields;
    case RecordKind::kRejuvRequest: return kRejuvRequestFields;
    case RecordKind::kRejuvDeferred: return kTargetFields;
    case RecordKind::kRejuvenation: return kRejuvenationFields;
    case RecordKind::kRejuvAbort: return kAbortFields;
    case RecordKind::kResize: return kResizeFields;
    case RecordKind::kResizeError: return kResizeErrorFields;
    case RecordKind::kCrack: return kCrackFields;
    case RecordKind::kCompromise: return kCompromiseFields;
    case RecordKind::kAnalysisReset: return kResetFields;
    case RecordKind::kWarn: return kWarnFields;
  }
  return {};
}

std::string_view msg_type_name(MsgType type) noexcept {
  return kMsgNames[static_cast<std::size_t>(type)];
}

std::string_view timer_name(TimerTag tag) noexcept {
  return kTimerNames[static_cast<std::size_t>(tag)];
}

std::string_view origin_name(Origin origin) noexcept {
  return kOriginNames[static_cast<std::size_t>(origin)];
}

void append_record(std::string& out, const TraceRecord& record) {
  auto it = std::back_inserter(out);
  fmt::format_to(it, R"({{"tick":{},"seq":{},"kind":"{}","actor":{},"payload":{{)", record.tick,
                 record.seq, kind_name(record.kind), record.actor);
  bool first = true;
  if (const auto key = sub_key(record.kind); !key.empty()) {
    fmt::format_to(it, R"("{}":"{}")", key, sub_name(record.kind, record.sub));
    first = false;
  }
  const auto names = field_names(record.kind, record.sub);
  for (std::size_t i = 0; i < names.size(); ++i) {
    fmt::format_to(it, R"({}"{}":{})", first ? "" : ",", names[i], record.f[i]);
    first = false;
  }
  out += "}}";
}

std::string serialize_record(const TraceRecord& record) {
  std::string out;
  append_record(out, record);
  return out;
}

TraceRecord parse_record(std::string_view line) {
  const auto fail = [&](std::string_view why) {
    return Error(Errc::kMalformedTrace, fmt::format("{}: {}", why, line.substr(0, 120)));
  };
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    throw fail("unparseable record");
  }
  // get<> would wrap negative numbers silently.
  const auto count = [&](const nlohmann::json& value) {
    if (!value.is_number_unsigned()) throw fail("expected a non-negative integer");
    return value.get<std::uint64_t>();
  };
  TraceRecord rec;
  try {
    rec.tick = count(j.at("tick"));
    rec.seq = count(j.at("seq"));
    const std::uint64_t actor = count(j.at("actor"));
    if (actor > std::numeric_limits<ActorId>::max()) throw fail("actor out of range");
    rec.actor = static_cast<ActorId>(actor);
    const auto kind = parse_kind(j.at("kind").get<std::string>());
    if (!kind) throw fail("unknown record kind");
    rec.kind = *kind;
    const auto& payload = j.at("payload");
    std::size_t expected = 0;
    if (const auto key = sub_key(rec.kind); !key.empty()) {
      const auto sub = parse_sub(rec.kind, payload.at(std::string(key)).get<std::string>());
      if (!sub) throw fail("unknown sub-code");
      rec.sub = *sub;
      ++expected;
    }
    const auto names = field_names(rec.kind, rec.sub);
    for (std::size_t i = 0; i < names.size(); ++i) {
      rec.f[i] = count(payload.at(std::string(names[i])));
    }
    expected += names.size();
    if (payload.size() != expected) throw fail("unexpected payload fields");
  } catch (const nlohmann::json::exception&) {
    throw fail("missing or mistyped field");
  }
  return rec;
}

}  // namespace rejuv::sim
