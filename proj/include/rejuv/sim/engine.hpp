#pragma once

#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "rejuv/sim/error.hpp"
#include "rejuv/sim/rng.hpp"
#include "rejuv/sim/trace.hpp"
#include "rejuv/sim/types.hpp"

namespace rejuv::sim {

enum class EventKind : std::uint8_t { kDeliver, kTimer, kSpawnComplete, kAdversaryStep, kTrigger };

struct SimEvent {
  Tick at = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kTimer;
  std::uint8_t tag = 0;
  ActorId actor = 0;
  std::uint64_t ref = 0;
};

/// Sequence number assigned at admission; unique per run.
using EventHandle = std::uint64_t;

/// Single-threaded discrete-event kernel.
///
/// Events run in (at, seq) order where seq is the admission counter, so two
/// events at the same tick run in the order they were scheduled. Each
/// processed event produces exactly one trace record; handlers may attach
/// annotations with `note()`, which inherit the event's (tick, seq).
class Engine {
 public:
  explicit Engine(std::uint64_t seed) : rng_(seed) {}

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;
  Engine(Engine&&) = default;
  Engine& operator=(Engine&&) = default;

  EventHandle schedule(Tick at, EventKind kind, ActorId actor, std::uint8_t tag = 0,
                       std::uint64_t ref = 0);
  EventHandle schedule(const SimEvent& event) {
    return schedule(event.at, event.kind, event.actor, event.tag, event.ref);
  }

  /// Processes every queued event with `at <= horizon`, then sets the clock to
  /// `horizon`. `dispatch` is invoked as `dispatch(const SimEvent&)`.
  template <typename Dispatch>
  const Trace& run_until(Tick horizon, Dispatch&& dispatch) {
    if (horizon < now_) throw Error(Errc::kPastEvent, "horizon before current clock");
    while (!queue_.empty() && queue_.top().at <= horizon) {
      const SimEvent event = queue_.top();
      queue_.pop();
      now_ = event.at;
      begin_event(event);
      dispatch(event);
      in_event_ = false;
      ++processed_;
    }
    now_ = horizon;
    return trace_;
  }

  const Trace& run_until(Tick horizon) {
    return run_until(horizon, [](const SimEvent&) {});
  }

  Tick now() const noexcept { return now_; }
  Rng& rng() noexcept { return rng_; }
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) { return rng_.uniform(lo, hi); }

  /// Record of the event currently being processed; handlers may refine its
  /// sub-code, payload, or kind (deliver -> drop).
  TraceRecord& current();

  void note(RecordKind kind, ActorId actor, const Fields& fields, std::uint8_t sub = 0);

  template <typename Sub>
  void note(RecordKind kind, ActorId actor, const Fields& fields, Sub sub) {
    note(kind, actor, fields, static_cast<std::uint8_t>(sub));
  }

  const Trace& trace() const noexcept { return trace_; }
  Trace take_trace() { return std::move(trace_); }

  std::size_t pending() const noexcept { return queue_.size(); }
  std::uint64_t scheduled_count() const noexcept { return next_seq_; }
  std::uint64_t processed_count() const noexcept { return processed_; }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const noexcept {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };

  void begin_event(const SimEvent& event);

  Tick now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t processed_ = 0;
  bool in_event_ = false;
  std::size_t current_index_ = 0;
  Rng rng_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
  Trace trace_;
};

RecordKind record_kind_for(EventKind kind) noexcept;

}  // namespace rejuv::sim
