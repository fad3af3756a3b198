#include "rejuv/fabric/fabric.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace rejuv::fabric {

TemplateIndex TemplateLibrary::add(SoftcoreTemplate tmpl) {
  if (find(tmpl.id)) throw Error(Errc::kDuplicateTemplate, tmpl.id);
  if (tmpl.bitstream_size == 0 || tmpl.analysis_threshold == 0 || tmpl.exploit_latency == 0) {
    throw Error(Errc::kInvalidConfig,
                fmt::format("template {}: bitstream_size, analysis_threshold and exploit_latency "
                            "must be positive",
                            tmpl.id));
  }
  templates_.push_back(std::move(tmpl));
  return TemplateIndex{static_cast<std::uint32_t>(templates_.size() - 1)};
}

const SoftcoreTemplate& TemplateLibrary::at(TemplateIndex index) const {
  if (!contains(index)) {
    throw Error(Errc::kUnknownTemplate, fmt::format("template index {}", index.value));
  }
  return templates_[index.value];
}

std::optional<TemplateIndex> TemplateLibrary::find(const std::string& id) const {
  for (std::size_t i = 0; i < templates_.size(); ++i) {
    if (templates_[i].id == id) return TemplateIndex{static_cast<std::uint32_t>(i)};
  }
  return std::nullopt;
}

Fabric::Fabric(sim::Engine& engine, std::uint32_t pblock_count, std::uint64_t pcap_bandwidth,
               std::uint64_t icap_bandwidth)
    : engine_(engine),
      pblocks_(pblock_count),
      pcap_{PortKind::kPcap, pcap_bandwidth, 0},
      icap_{PortKind::kIcap, icap_bandwidth, 0} {
  if (pcap_bandwidth == 0 || icap_bandwidth == 0) {
    throw Error(Errc::kInvalidConfig, "port bandwidth must be positive");
  }
}

TileId Fabric::spawn_tile(TemplateIndex tmpl, PortKind port_kind) {
  if (library_.empty()) throw Error(Errc::kNoTemplate, "template library is empty");
  const SoftcoreTemplate& softcore = library_.at(tmpl);

  const auto slot = std::find(pblocks_.begin(), pblocks_.end(), std::nullopt);
  if (slot == pblocks_.end()) throw Error(Errc::kNoFreePblock, "all pblocks are occupied");

  ReconfigPort& port = mutable_port(port_kind);
  const Tick start = std::max(engine_.now(), port.busy_until);
  const Tick ready = start + port.latency_for(softcore.bitstream_size);
  port.busy_until = ready;

  Tile tile;
  tile.id = TileId{static_cast<std::uint32_t>(tiles_.size() + 1)};
  tile.tmpl = tmpl;
  tile.pblock = PblockId{static_cast<std::uint32_t>(slot - pblocks_.begin())};
  tile.requested_at = engine_.now();
  tile.ready_at = ready;
  *slot = tile.id;
  tiles_.push_back(tile);

  engine_.note(sim::RecordKind::kSpawn, kCoreLogic,
               {tile.id.value, tmpl.value, tile.pblock.value,
                static_cast<std::uint64_t>(port_kind), start, ready});
  engine_.schedule(ready, sim::EventKind::kSpawnComplete, actor_of(tile.id), 0, tile.id.value);
  return tile.id;
}

void Fabric::complete_spawn(TileId id) {
  Tile& tile = mutable_tile(id);
  if (tile.lifecycle != Lifecycle::kSpawning) {
    throw Error(Errc::kInvalidLifecycle, fmt::format("tile {} is not spawning", id.value));
  }
  tile.lifecycle = Lifecycle::kActive;
  tile.active_at = engine_.now();
  alive_.insert(std::upper_bound(alive_.begin(), alive_.end(), id), id);
}

void Fabric::retire(TileId id) {
  Tile& tile = mutable_tile(id);
  if (tile.lifecycle != Lifecycle::kActive) {
    throw Error(Errc::kInvalidLifecycle, fmt::format("tile {} is not active", id.value));
  }
  tile.lifecycle = Lifecycle::kRetiring;
  engine_.note(sim::RecordKind::kRetire, kCoreLogic, {id.value});
}

void Fabric::destroy_tile(TileId id, sim::DestroyReason reason) {
  Tile& tile = mutable_tile(id);
  if (tile.lifecycle == Lifecycle::kDestroyed) {
    throw Error(Errc::kAlreadyDestroyed, fmt::format("tile {}", id.value));
  }
  if (!tile.alive()) {
    throw Error(Errc::kInvalidLifecycle, fmt::format("tile {} is still spawning", id.value));
  }
  tile.lifecycle = Lifecycle::kDestroyed;
  tile.health = Health::kCorrect;
  pblocks_[tile.pblock.value].reset();
  alive_.erase(std::lower_bound(alive_.begin(), alive_.end(), id));
  engine_.note(sim::RecordKind::kDestroy, kCoreLogic, {id.value, tile.tmpl.value, tile.pblock.value},
               reason);
}

void Fabric::mark_compromised(TileId id) {
  Tile& tile = mutable_tile(id);
  if (!tile.alive()) {
    throw Error(Errc::kInvalidLifecycle, fmt::format("tile {} is not running", id.value));
  }
  tile.health = Health::kCompromised;
}

std::uint32_t Fabric::free_pblocks() const noexcept {
  return static_cast<std::uint32_t>(std::count(pblocks_.begin(), pblocks_.end(), std::nullopt));
}

std::optional<TileId> Fabric::occupant(PblockId pblock) const {
  if (pblock.value >= pblocks_.size()) {
    throw Error(Errc::kInvalidConfig, fmt::format("pblock {}", pblock.value));
  }
  return pblocks_[pblock.value];
}

bool Fabric::contains(TileId id) const noexcept {
  return id.value >= 1 && id.value <= tiles_.size();
}

const Tile& Fabric::tile(TileId id) const {
  if (!contains(id)) throw Error(Errc::kUnknownTile, fmt::format("tile {}", id.value));
  return tiles_[id.value - 1];
}

Tile& Fabric::mutable_tile(TileId id) {
  if (!contains(id)) throw Error(Errc::kUnknownTile, fmt::format("tile {}", id.value));
  return tiles_[id.value - 1];
}

std::uint32_t Fabric::compromised_alive() const {
  std::uint32_t n = 0;
  for (TileId id : alive_) {
    if (tiles_[id.value - 1].health == Health::kCompromised) ++n;
  }
  return n;
}

}  // namespace rejuv::fabric
