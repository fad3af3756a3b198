#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rejuv/core/log_entry.hpp"
#include "rejuv/fabric/fabric.hpp"
#include "rejuv/sim/engine.hpp"

namespace rejuv::fabric {

enum class Synchrony : std::uint8_t { kSynchronous, kPartiallySynchronous };

struct BusModel {
  Tick d_min = 1;
  Tick d_max = 1;
  /// Log entries moved per tick during state transfer.
  std::uint64_t state_bandwidth = 1000;

  Synchrony mode() const noexcept {
    return d_min == d_max ? Synchrony::kSynchronous : Synchrony::kPartiallySynchronous;
  }

  friend bool operator==(const BusModel&, const BusModel&) = default;
};

/// Bus message. `words` layout depends on `type`:
///   execute        {op_seq, op, reply}
///   response       {op_seq, outcome}
///   commit         {op_seq, op, outcome, decided}
///   state_request  {request, prefix}
///   state_reply    {request, prefix, digest}
///   catchup        {first_seq, committed, pending}; entries = committed then pending
struct Message {
  std::uint64_t id = 0;
  ActorId from = kCoreLogic;
  ActorId to = kCoreLogic;
  sim::MsgType type = sim::MsgType::kExecute;
  std::array<std::uint64_t, 4> words{};
  std::vector<core::LogEntry> entries;
};

/// Reliable bus: every message is delivered exactly once, unmodified, after a
/// delay drawn uniformly from [d_min, d_max]. Deliveries addressed to a tile
/// that no longer runs are turned into drop records.
class Bus {
 public:
  Bus(sim::Engine& engine, const Fabric& fabric, BusModel model);

  std::uint64_t send(Message message);

  /// Called on a delivery event. Returns the message, or nullopt when it was
  /// dropped because the recipient tile is gone.
  std::optional<Message> deliver(std::uint64_t id);

  const BusModel& model() const noexcept { return model_; }
  std::size_t in_flight() const noexcept { return in_flight_.size(); }

 private:
  sim::Engine& engine_;
  const Fabric& fabric_;
  BusModel model_;
  std::uint64_t next_id_ = 1;
  std::unordered_map<std::uint64_t, Message> in_flight_;
};

}  // namespace rejuv::fabric
