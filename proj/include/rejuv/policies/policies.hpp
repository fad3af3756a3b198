#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "rejuv/core/core_logic.hpp"
#include "rejuv/sim/engine.hpp"

namespace rejuv::policies {

enum class Policy : std::uint8_t { kNone, kRandomDefault, kPeriodic, kReactive, kProactive };

std::string_view policy_name(Policy policy) noexcept;
std::optional<Policy> parse_policy(std::string_view name) noexcept;

/// Proactive score coefficients. Integers keep scores exact and comparable.
struct ScoreWeights {
  std::uint64_t exposure = 1;
  std::uint64_t suspicion = 100;

  friend bool operator==(const ScoreWeights&, const ScoreWeights&) = default;
};

struct TriggerConfig {
  Policy policy = Policy::kNone;
  /// Upper bound of the random rejuvenation delay.
  Tick max_delay = 100;
  /// Cadence of the Periodic and Proactive policies; defaults to max_delay / 2.
  std::optional<Tick> period;
  std::uint32_t suspicion_threshold = 2;
  ScoreWeights weights;

  Tick effective_period() const noexcept;
  /// Throws Error(kInvalidConfig) when a threshold is not positive.
  void validate() const;

  friend bool operator==(const TriggerConfig&, const TriggerConfig&) = default;
};

/// Watchdog bookkeeping: divergent responses per tile and launch times.
class Monitor {
 public:
  void on_launched(TileId tile, Tick at);
  void on_destroyed(TileId tile);

  /// Counts one divergence if `value` differs from the decided outcome.
  /// Returns true when it counted.
  bool observe_vote(const core::Vote& vote, std::uint64_t decided);

  std::uint64_t suspicion(TileId tile) const;
  void reset_suspicion(TileId tile);
  /// Ticks since the tile's current launch; 0 for tiles never launched.
  Tick exposure(TileId tile, Tick now) const;
  std::optional<Tick> launched_at(TileId tile) const;

 private:
  std::map<TileId, std::uint64_t> suspicion_;
  std::map<TileId, Tick> launched_at_;
};

std::uint64_t proactive_score(const ScoreWeights& weights, Tick exposure, std::uint64_t suspicion);

/// Highest proactive score among `candidates`; ties go to the lowest id.
std::optional<TileId> proactive_target(const std::vector<TileId>& candidates, const Monitor& monitor,
                                       const ScoreWeights& weights, Tick now);

/// Round-robin over running tiles: the earliest launch goes next, ties to the
/// lowest id. A replacement launches last, so it rejoins at the back.
std::optional<TileId> periodic_target(const std::vector<TileId>& candidates, const Monitor& monitor);

/// Scale-in victims: `count` tiles with the largest exposure, ties to the lowest id.
std::vector<TileId> exposure_victims(const std::vector<TileId>& launched, std::size_t count,
                                     const Monitor& monitor, Tick now);

/// Trigger and Monitor modules bound to one Core Logic.
class Trigger {
 public:
  Trigger(TriggerConfig config, sim::Engine& engine);

  /// Must be called before `start`.
  void attach(core::CoreLogic& core) { core_ = &core; }

  /// Hooks that feed the Monitor from the Core Logic.
  core::CoreHooks hooks();

  /// Schedules the first trigger event of the configured policy.
  void start();
  void on_fire(sim::TriggerTag tag);

  const TriggerConfig& config() const noexcept { return config_; }
  const Monitor& monitor() const noexcept { return monitor_; }

  /// Uniform draw in [0, max_delay].
  Tick next_rejuvenation_delay();

 private:
  void on_decided(const core::AgreementRecord& record);
  void on_vote(const core::Vote& vote, std::uint64_t decided);
  void schedule(sim::TriggerTag tag, Tick delay);

  TriggerConfig config_;
  sim::Engine& engine_;
  core::CoreLogic* core_ = nullptr;
  Monitor monitor_;
};

}  // namespace rejuv::policies
