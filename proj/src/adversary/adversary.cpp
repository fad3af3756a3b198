#include "rejuv/adversary/adversary.hpp"

#include <algorithm>

#include "rejuv/sim/rng.hpp"

namespace rejuv::adversary {

std::size_t AdversaryState::cracked_count() const {
  return static_cast<std::size_t>(
      std::count_if(cracked_at.begin(), cracked_at.end(), [](const auto& c) { return c.has_value(); }));
}

Adversary::Adversary(AdversaryConfig config, std::size_t template_count, std::uint64_t seed)
    : config_(config), key_(sim::mix64(seed ^ 0xA5A5A5A5DEADBEEFull)) {
  if (config_.reference_window == 0) throw Error(Errc::kInvalidConfig, "adversary T_a must be positive");
  state_.analysis.assign(template_count, 0);
  state_.cracked_at.assign(template_count, std::nullopt);
}

std::vector<TileId> Adversary::step(Tick dt, fabric::Fabric& fabric, sim::Engine& engine) {
  std::vector<TileId> compromised;
  if (!config_.enabled || dt == 0) return compromised;
  const Tick now = engine.now();
  const Tick start = now >= dt ? now - dt : 0;
  const auto& library = fabric.library();

  std::vector<bool> deployed(library.size(), false);
  for (TileId id : fabric.alive_tiles()) {
    const fabric::Tile& tile = fabric.tile(id);
    if (tile.active_at && *tile.active_at <= start) deployed[tile.tmpl.value] = true;
  }

  // Exploitation uses the cracked set as it stood before this step.
  const std::vector<std::optional<Tick>> cracked_before = state_.cracked_at;

  for (std::uint32_t i = 0; i < deployed.size(); ++i) {
    if (!deployed[i]) continue;
    state_.analysis[i] += dt;
    const TemplateIndex tmpl{i};
    if (!state_.cracked_at[i] && state_.analysis[i] >= library.at(tmpl).analysis_threshold) {
      state_.cracked_at[i] = now;
      engine.note(sim::RecordKind::kCrack, kCoreLogic, {i, state_.analysis[i]});
    }
  }

  std::uint32_t compromised_now = fabric.compromised_alive();
  const std::vector<TileId> alive = fabric.alive_tiles();
  for (TileId id : alive) {
    const fabric::Tile& tile = fabric.tile(id);
    if (tile.health == fabric::Health::kCompromised) continue;
    if (!tile.active_at || *tile.active_at > start) continue;
    if (!cracked_before[tile.tmpl.value]) continue;
    Tick& timer = state_.exploit_timer[id];
    timer += dt;
    if (timer < library.at(tile.tmpl).exploit_latency) continue;
    if (config_.compromise_cap && compromised_now >= *config_.compromise_cap) continue;
    fabric.mark_compromised(id);
    ++compromised_now;
    engine.note(sim::RecordKind::kCompromise, kCoreLogic, {id.value, tile.tmpl.value});
    compromised.push_back(id);
  }
  return compromised;
}

std::uint64_t Adversary::divergent_value(std::uint64_t op_seq, std::uint64_t correct) const {
  return correct + 1 + sim::mix64(key_ ^ sim::mix64(op_seq + 1)) % 997;
}

std::uint64_t Adversary::respond(std::uint64_t op_seq, std::uint64_t correct) const {
  switch (config_.behavior) {
    case Behavior::kSilent: return correct;
    case Behavior::kDivergent: return divergent_value(op_seq, correct);
    case Behavior::kEquivocating:
      return op_seq % 2 == 0 ? divergent_value(op_seq, correct) : correct;
  }
  return correct;
}

bool Adversary::lies_about_state(std::uint64_t prefix) const {
  switch (config_.behavior) {
    case Behavior::kSilent: return false;
    case Behavior::kDivergent: return true;
    case Behavior::kEquivocating: return prefix % 2 == 0;
  }
  return false;
}

core::LogEntry Adversary::forge_entry(const core::LogEntry* last, std::uint64_t prefix) const {
  if (last == nullptr) return core::LogEntry{1, 0, sim::mix64(key_), true};
  core::LogEntry forged = *last;
  forged.outcome = last->outcome + 1 + sim::mix64(key_ ^ prefix) % 997;
  return forged;
}

void Adversary::on_rejuvenation_launch(sim::Engine& engine) {
  if (!config_.enabled || config_.memory != AnalysisMemory::kEpoch) return;
  std::uint64_t discarded = 0;
  for (std::size_t i = 0; i < state_.analysis.size(); ++i) {
    if (state_.cracked_at[i] || state_.analysis[i] == 0) continue;
    state_.analysis[i] = 0;
    ++discarded;
  }
  engine.note(sim::RecordKind::kAnalysisReset, kCoreLogic, {discarded});
}

}  // namespace rejuv::adversary
