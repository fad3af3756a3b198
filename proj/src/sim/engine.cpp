#include "rejuv/sim/engine.hpp"

#include <fmt/format.h>

namespace rejuv::sim {

RecordKind record_kind_for(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::kDeliver: return RecordKind::kDeliver;
    case EventKind::kTimer: return RecordKind::kTimer;
    case EventKind::kSpawnComplete: return RecordKind::kSpawnComplete;
    case EventKind::kAdversaryStep: return RecordKind::kAdversaryStep;
    case EventKind::kTrigger: return RecordKind::kTrigger;
  }
  return RecordKind::kTimer;
}

EventHandle Engine::schedule(Tick at, EventKind kind, ActorId actor, std::uint8_t tag,
                             std::uint64_t ref) {
  if (at < now_) {
    throw Error(Errc::kPastEvent, fmt::format("event at {} scheduled when clock is {}", at, now_));
  }
  const std::uint64_t seq = next_seq_++;
  queue_.push(SimEvent{at, seq, kind, tag, actor, ref});
  return seq;
}

void Engine::begin_event(const SimEvent& event) {
  TraceRecord rec;
  rec.tick = event.at;
  rec.seq = event.seq;
  rec.kind = record_kind_for(event.kind);
  rec.sub = event.tag;
  rec.actor = event.actor;
  rec.f[0] = event.ref;
  current_index_ = trace_.records.size();
  trace_.records.push_back(rec);
  in_event_ = true;
}

TraceRecord& Engine::current() {
  if (!in_event_) throw Error(Errc::kInvalidLifecycle, "no event is being processed");
  return trace_.records[current_index_];
}

void Engine::note(RecordKind kind, ActorId actor, const Fields& fields, std::uint8_t sub) {
  TraceRecord rec;
  rec.tick = now_;
  // Outside event processing (setup code, unit tests) a note takes a fresh
  // admission number so it still has a unique position in the order.
  rec.seq = in_event_ ? trace_.records[current_index_].seq : next_seq_++;
  rec.kind = kind;
  rec.sub = sub;
  rec.actor = actor;
  rec.f = fields;
  trace_.records.push_back(rec);
}

}  // namespace rejuv::sim
