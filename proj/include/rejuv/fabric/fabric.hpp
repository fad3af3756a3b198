#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rejuv/sim/engine.hpp"
#include "rejuv/sim/types.hpp"

namespace rejuv::fabric {

struct SoftcoreTemplate {
  std::string id;
  std::string family;
  std::uint64_t bitstream_size = 0;
  Tick analysis_threshold = 0;  // adversary study time needed to crack the template
  Tick exploit_latency = 0;     // post-crack exposure needed to compromise a running tile

  friend bool operator==(const SoftcoreTemplate&, const SoftcoreTemplate&) = default;
};

class TemplateLibrary {
 public:
  /// Throws kDuplicateTemplate, or kInvalidConfig for non-positive sizes/thresholds.
  TemplateIndex add(SoftcoreTemplate tmpl);

  std::size_t size() const noexcept { return templates_.size(); }
  bool empty() const noexcept { return templates_.empty(); }
  const SoftcoreTemplate& at(TemplateIndex index) const;
  std::optional<TemplateIndex> find(const std::string& id) const;
  bool contains(TemplateIndex index) const noexcept { return index.value < templates_.size(); }
  const std::vector<SoftcoreTemplate>& all() const noexcept { return templates_; }

 private:
  std::vector<SoftcoreTemplate> templates_;
};

enum class PortKind : std::uint8_t { kPcap, kIcap };

/// Reconfiguration port. One bitstream at a time; concurrent requests queue FIFO.
struct ReconfigPort {
  PortKind kind = PortKind::kIcap;
  std::uint64_t bandwidth = 1;  // size units per tick
  Tick busy_until = 0;

  Tick latency_for(std::uint64_t bitstream_size) const noexcept {
    return (bitstream_size + bandwidth - 1) / bandwidth;
  }
};

enum class Lifecycle : std::uint8_t { kSpawning, kActive, kRetiring, kDestroyed };
enum class Health : std::uint8_t { kCorrect, kCompromised };

struct Tile {
  TileId id;
  TemplateIndex tmpl;
  PblockId pblock;
  Lifecycle lifecycle = Lifecycle::kSpawning;
  Health health = Health::kCorrect;
  Tick requested_at = 0;
  Tick ready_at = 0;
  std::optional<Tick> active_at;

  bool alive() const noexcept {
    return lifecycle == Lifecycle::kActive || lifecycle == Lifecycle::kRetiring;
  }
};

/// Programmable-logic substrate: template library, pblock slots, ports, tiles.
///
/// A Spawning tile holds its pblock from admission, so occupied + free always
/// equals the pblock count.
class Fabric {
 public:
  Fabric(sim::Engine& engine, std::uint32_t pblock_count, std::uint64_t pcap_bandwidth,
         std::uint64_t icap_bandwidth);

  TemplateIndex register_template(SoftcoreTemplate tmpl) { return library_.add(std::move(tmpl)); }
  const TemplateLibrary& library() const noexcept { return library_; }

  /// Admits a spawn request and schedules its spawn-complete event at
  /// `max(now, port busy) + ceil(bitstream_size / bandwidth)`.
  TileId spawn_tile(TemplateIndex tmpl, PortKind port);

  /// Spawning -> Active; called by the dispatcher when spawn-complete fires.
  void complete_spawn(TileId tile);
  /// Active -> Retiring.
  void retire(TileId tile);
  void destroy_tile(TileId tile, sim::DestroyReason reason);
  void mark_compromised(TileId tile);

  std::uint32_t free_pblocks() const noexcept;
  std::uint32_t pblock_count() const noexcept { return static_cast<std::uint32_t>(pblocks_.size()); }
  std::optional<TileId> occupant(PblockId pblock) const;

  bool contains(TileId tile) const noexcept;
  const Tile& tile(TileId tile) const;
  const std::vector<Tile>& tiles() const noexcept { return tiles_; }

  /// Active or Retiring tiles, ascending id.
  const std::vector<TileId>& alive_tiles() const noexcept { return alive_; }
  std::uint32_t alive_count() const noexcept { return static_cast<std::uint32_t>(alive_.size()); }
  std::uint32_t compromised_alive() const;

  const ReconfigPort& port(PortKind kind) const noexcept {
    return kind == PortKind::kIcap ? icap_ : pcap_;
  }

 private:
  Tile& mutable_tile(TileId tile);
  ReconfigPort& mutable_port(PortKind kind) noexcept {
    return kind == PortKind::kIcap ? icap_ : pcap_;
  }

  sim::Engine& engine_;
  TemplateLibrary library_;
  std::vector<std::optional<TileId>> pblocks_;
  ReconfigPort pcap_;
  ReconfigPort icap_;
  std::vector<Tile> tiles_;  // index = id - 1
  std::vector<TileId> alive_;  // sorted
};

}  // namespace rejuv::fabric
