#include "rejuv/policies/policies.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace rejuv::policies {

namespace {

constexpr std::string_view kPolicyNames[] = {"none", "random", "periodic", "reactive", "proactive"};

}  // namespace

std::string_view policy_name(Policy policy) noexcept {
  return kPolicyNames[static_cast<std::size_t>(policy)];
}

std::optional<Policy> parse_policy(std::string_view name) noexcept {
  for (std::size_t i = 0; i < std::size(kPolicyNames); ++i) {
    if (kPolicyNames[i] == name) return static_cast<Policy>(i);
  }
  return std::nullopt;
}

Tick TriggerConfig::effective_period() const noexcept {
  return period.value_or(std::max<Tick>(1, max_delay / 2));
}

void TriggerConfig::validate() const {
  if (max_delay == 0) throw Error(Errc::kInvalidConfig, "trigger.T must be positive");
  if (period && *period == 0) throw Error(Errc::kInvalidConfig, "trigger.P must be positive");
  if (suspicion_threshold == 0) throw Error(Errc::kInvalidConfig, "trigger.k must be at least 1");
}

// --- Monitor -----------------------------------------------------------------

void Monitor::on_launched(TileId tile, Tick at) {
  launched_at_[tile] = at;
  suspicion_.erase(tile);
}

void Monitor::on_destroyed(TileId tile) {
  launched_at_.erase(tile);
  suspicion_.erase(tile);
}

bool Monitor::observe_vote(const core::Vote& vote, std::uint64_t decided) {
  if (vote.value == decided) return false;
  ++suspicion_[vote.tile];
  return true;
}

std::uint64_t Monitor::suspicion(TileId tile) const {
  const auto it = suspicion_.find(tile);
  return it == suspicion_.end() ? 0 : it->second;
}

void Monitor::reset_suspicion(TileId tile) { suspicion_.erase(tile); }

Tick Monitor::exposure(TileId tile, Tick now) const {
  const auto it = launched_at_.find(tile);
  return it == launched_at_.end() ? 0 : now - it->second;
}

std::optional<Tick> Monitor::launched_at(TileId tile) const {
  const auto it = launched_at_.find(tile);
  if (it == launched_at_.end()) return std::nullopt;
  return it->second;
}

// --- Target selection ----------------------------------------------------------

std::uint64_t proactive_score(const ScoreWeights& weights, Tick exposure, std::uint64_t suspicion) {
  return weights.exposure * exposure + weights.suspicion * suspicion;
}

std::optional<TileId> proactive_target(const std::vector<TileId>& candidates, const Monitor& monitor,
                                       const ScoreWeights& weights, Tick now) {
  std::optional<TileId> best;
  std::uint64_t best_score = 0;
  for (TileId tile : candidates) {
    const std::uint64_t score =
        proactive_score(weights, monitor.exposure(tile, now), monitor.suspicion(tile));
    if (!best || score > best_score || (score == best_score && tile < *best)) {
      best = tile;
      best_score = score;
    }
  }
  return best;
}

std::optional<TileId> periodic_target(const std::vector<TileId>& candidates, const Monitor& monitor) {
  std::optional<TileId> best;
  Tick best_launch = 0;
  for (TileId tile : candidates) {
    const Tick launch = monitor.launched_at(tile).value_or(0);
    if (!best || launch < best_launch || (launch == best_launch && tile < *best)) {
      best = tile;
      best_launch = launch;
    }
  }
  return best;
}

std::vector<TileId> exposure_victims(const std::vector<TileId>& launched, std::size_t count,
                                     const Monitor& monitor, Tick now) {
  std::vector<TileId> ranked = launched;
  std::sort(ranked.begin(), ranked.end(), [&](TileId a, TileId b) {
    const Tick ea = monitor.exposure(a, now);
    const Tick eb = monitor.exposure(b, now);
    return ea != eb ? ea > eb : a < b;
  });
  ranked.resize(std::min(count, ranked.size()));
  return ranked;
}

// --- Trigger -------------------------------------------------------------------

Trigger::Trigger(TriggerConfig config, sim::Engine& engine) : config_(config), engine_(engine) {
  config_.validate();
}

core::CoreHooks Trigger::hooks() {
  core::CoreHooks hooks;
  hooks.on_decided = [this](const core::AgreementRecord& record) { on_decided(record); };
  hooks.on_late_response = [this](const core::AgreementRecord& record, const core::Vote& vote) {
    on_vote(vote, *record.decided);
  };
  hooks.on_launched = [this](TileId tile, Tick at) { monitor_.on_launched(tile, at); };
  hooks.on_destroyed = [this](TileId tile) { monitor_.on_destroyed(tile); };
  hooks.select_victims = [this](const std::vector<TileId>& launched, std::size_t count) {
    return exposure_victims(launched, count, monitor_, engine_.now());
  };
  return hooks;
}

Tick Trigger::next_rejuvenation_delay() {
  return static_cast<Tick>(engine_.uniform(0, static_cast<std::int64_t>(config_.max_delay)));
}

void Trigger::schedule(sim::TriggerTag tag, Tick delay) {
  engine_.schedule(engine_.now() + delay, sim::EventKind::kTrigger, kCoreLogic,
                   static_cast<std::uint8_t>(tag));
}

void Trigger::start() {
  if (core_ == nullptr) throw Error(Errc::kInvalidConfig, "trigger not attached to a core logic");
  switch (config_.policy) {
    case Policy::kRandomDefault: schedule(sim::TriggerTag::kRandom, next_rejuvenation_delay()); break;
    case Policy::kPeriodic: schedule(sim::TriggerTag::kPeriodic, config_.effective_period()); break;
    case Policy::kProactive: schedule(sim::TriggerTag::kProactive, config_.effective_period()); break;
    case Policy::kNone:
    case Policy::kReactive: break;
  }
}

void Trigger::on_fire(sim::TriggerTag tag) {
  const std::vector<TileId> candidates = core_->eligible_targets();
  const Tick now = engine_.now();
  std::optional<TileId> target;
  std::uint64_t score = 0;
  sim::Origin origin = sim::Origin::kRandom;
  switch (tag) {
    case sim::TriggerTag::kRandom:
      if (!candidates.empty()) {
        const auto pick = engine_.uniform(0, static_cast<std::int64_t>(candidates.size()) - 1);
        target = candidates[static_cast<std::size_t>(pick)];
      }
      break;
    case sim::TriggerTag::kPeriodic:
      origin = sim::Origin::kPeriodic;
      target = periodic_target(candidates, monitor_);
      if (target) score = monitor_.exposure(*target, now);
      break;
    case sim::TriggerTag::kProactive:
      origin = sim::Origin::kProactive;
      target = proactive_target(candidates, monitor_, config_.weights, now);
      if (target) {
        score = proactive_score(config_.weights, monitor_.exposure(*target, now),
                                monitor_.suspicion(*target));
      }
      break;
  }
  if (target) {
    core_->rejuvenate(*target, origin, score);
  } else {
    engine_.note(sim::RecordKind::kWarn, kCoreLogic, {0}, sim::Warning::kNoTarget);
  }

  switch (tag) {
    case sim::TriggerTag::kRandom: schedule(tag, next_rejuvenation_delay()); break;
    case sim::TriggerTag::kPeriodic:
    case sim::TriggerTag::kProactive: schedule(tag, config_.effective_period()); break;
  }
}

void Trigger::on_decided(const core::AgreementRecord& record) {
  for (const core::Vote& vote : record.responses) on_vote(vote, *record.decided);
}

void Trigger::on_vote(const core::Vote& vote, std::uint64_t decided) {
  if (!monitor_.observe_vote(vote, decided)) return;
  if (config_.policy != Policy::kReactive) return;
  if (monitor_.suspicion(vote.tile) < config_.suspicion_threshold) return;
  if (!core_->is_launched(vote.tile) || core_->is_targeted(vote.tile)) return;
  const std::uint64_t suspicion = monitor_.suspicion(vote.tile);
  monitor_.reset_suspicion(vote.tile);
  core_->rejuvenate(vote.tile, sim::Origin::kReactive, suspicion);
}

}  // namespace rejuv::policies
