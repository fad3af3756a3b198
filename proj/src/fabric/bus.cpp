#include "rejuv/fabric/bus.hpp"

#include <fmt/format.h>

namespace rejuv::fabric {

Bus::Bus(sim::Engine& engine, const Fabric& fabric, BusModel model)
    : engine_(engine), fabric_(fabric), model_(model) {
  if (model_.d_min > model_.d_max) throw Error(Errc::kInvalidConfig, "bus d_min > d_max");
  if (model_.state_bandwidth == 0) throw Error(Errc::kInvalidConfig, "state_bandwidth must be positive");
}

std::uint64_t Bus::send(Message message) {
  if (message.from != kCoreLogic && !fabric_.tile(TileId{message.from}).alive()) {
    throw Error(Errc::kInvalidLifecycle, fmt::format("tile {} cannot send", message.from));
  }
  message.id = next_id_++;
  const auto delay = static_cast<Tick>(engine_.uniform(static_cast<std::int64_t>(model_.d_min),
                                                       static_cast<std::int64_t>(model_.d_max)));
  engine_.note(sim::RecordKind::kSend, message.from, {message.id, message.to, delay}, message.type);
  engine_.schedule(engine_.now() + delay, sim::EventKind::kDeliver, message.to,
                   static_cast<std::uint8_t>(message.type), message.id);
  const std::uint64_t id = message.id;
  in_flight_.emplace(id, std::move(message));
  return id;
}

std::optional<Message> Bus::deliver(std::uint64_t id) {
  auto node = in_flight_.extract(id);
  if (node.empty()) throw Error(Errc::kInvalidLifecycle, fmt::format("unknown message {}", id));
  Message message = std::move(node.mapped());

  sim::TraceRecord& rec = engine_.current();
  rec.sub = static_cast<std::uint8_t>(message.type);
  rec.f = {message.id, message.from, message.words[0], message.words[1], message.words[2],
           message.words[3]};
  if (message.to != kCoreLogic && !fabric_.tile(TileId{message.to}).alive()) {
    rec.kind = sim::RecordKind::kDrop;
    return std::nullopt;
  }
  return message;
}

}  // namespace rejuv::fabric
