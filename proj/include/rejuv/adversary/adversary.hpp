#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "rejuv/core/log_entry.hpp"
#include "rejuv/fabric/fabric.hpp"
#include "rejuv/sim/engine.hpp"

namespace rejuv::adversary {

/// How a compromised tile answers the Core Logic.
enum class Behavior : std::uint8_t {
  kSilent,        // answers correctly; invisible to output monitoring
  kDivergent,     // always answers a wrong value
  kEquivocating,  // wrong on even op_seq, correct on odd
};

/// What happens to unfinished analysis when the Core Logic rejuvenates a tile.
enum class AnalysisMemory : std::uint8_t {
  kEpoch,      // discarded: the configuration the attacker was studying changed
  kPermanent,  // kept
};

struct AdversaryConfig {
  bool enabled = false;
  Behavior behavior = Behavior::kDivergent;
  Tick reference_window = 1000;  // T_a, reporting window for the compromise count
  std::optional<std::uint32_t> compromise_cap;
  AnalysisMemory memory = AnalysisMemory::kEpoch;

  friend bool operator==(const AdversaryConfig&, const AdversaryConfig&) = default;
};

struct AdversaryState {
  std::vector<Tick> analysis;                   // per template
  std::vector<std::optional<Tick>> cracked_at;  // per template
  std::map<TileId, Tick> exploit_timer;         // only for running tiles of cracked templates

  bool cracked(TemplateIndex tmpl) const { return cracked_at.at(tmpl.value).has_value(); }
  std::size_t cracked_count() const;
};

/// Persistent attacker. Studies every deployed template, cracks it once the
/// accumulated study reaches the template's analysis threshold, then
/// compromises each running tile of that template after its exploit latency.
/// Compromise never spreads across tiles or into the Core Logic.
class Adversary {
 public:
  Adversary(AdversaryConfig config, std::size_t template_count, std::uint64_t seed);

  /// Advances the attack over (now - dt, now]. A tile contributes only if it
  /// was already running at the start of the interval, and exploitation only
  /// starts in the step after the crack. Returns newly compromised tiles.
  std::vector<TileId> step(Tick dt, fabric::Fabric& fabric, sim::Engine& engine);

  /// Answer of a compromised tile for `op_seq` whose correct outcome is `correct`.
  std::uint64_t respond(std::uint64_t op_seq, std::uint64_t correct) const;
  /// Wrong value used by divergent answers; identical across compromised tiles.
  std::uint64_t divergent_value(std::uint64_t op_seq, std::uint64_t correct) const;

  bool lies_about_state(std::uint64_t prefix) const;
  /// Replacement for the last entry of a forged log prefix (or the sole entry
  /// of a forged empty prefix).
  core::LogEntry forge_entry(const core::LogEntry* last, std::uint64_t prefix) const;

  void on_tile_destroyed(TileId tile) { state_.exploit_timer.erase(tile); }
  void on_rejuvenation_launch(sim::Engine& engine);

  const AdversaryConfig& config() const noexcept { return config_; }
  const AdversaryState& state() const noexcept { return state_; }

 private:
  AdversaryConfig config_;
  AdversaryState state_;
  std::uint64_t key_;
};

}  // namespace rejuv::adversary
