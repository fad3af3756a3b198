#include "rejuv/metrics/audit.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "rejuv/core/quorum.hpp"
#include "rejuv/core/replica.hpp"

namespace rejuv::metrics {

using sim::RecordKind;
using sim::TraceRecord;

namespace {

enum class Phase : std::uint8_t { kSpawning, kActive, kRetiring, kDestroyed };

struct TileInfo {
  std::uint32_t tmpl = 0;
  std::uint32_t pblock = 0;
  Phase phase = Phase::kSpawning;
  Tick ready = 0;
  std::optional<Tick> active_at;
  std::optional<Tick> launched_at;
};

struct SentMessage {
  Tick at = 0;
  Tick delay = 0;
  std::uint64_t to = 0;
};

TileId tile_at(std::uint64_t value) { return TileId{static_cast<std::uint32_t>(value)}; }

class Auditor {
 public:
  explicit Auditor(const cli::Scenario& scenario)
      : s_(scenario),
        t_(scenario.quorum.t),
        window_(2 * scenario.bus.d_max + 1),
        occupied_(scenario.pblocks, false) {
    prefix_digest_.push_back(core::kEmptyDigest);
  }

  std::vector<AuditFinding> run(const sim::Trace& trace) {
    const TraceRecord* previous = nullptr;
    bool open = false;
    for (const TraceRecord& r : trace.records) {
      if (previous && (r.tick < previous->tick || (r.tick == previous->tick && r.seq < previous->seq))) {
        fail("ordering", r.tick, "records out of (tick, seq) order");
      }
      if (sim::is_event_kind(r.kind)) {
        if (open) end_event(*previous);
        open = true;
      } else if (!open) {
        fail("ordering", r.tick, "annotation before any event");
      }
      apply(r);
      previous = &r;
    }
    if (open) end_event(*previous);
    finish();
    return std::move(findings_);
  }

 private:
  void fail(std::string property, Tick tick, std::string detail) {
    findings_.push_back({std::move(property), tick, std::move(detail)});
  }

  int n_now() const { return core::required_replicas(t_, s_.quorum.mode); }

  TileInfo* find_tile(TileId tile) {
    const auto it = tiles_.find(tile);
    return it == tiles_.end() ? nullptr : &it->second;
  }

  void apply(const TraceRecord& r) {
    const auto& f = r.f;
    switch (r.kind) {
      case RecordKind::kSend: {
        const Tick delay = f[2];
        if (delay < s_.bus.d_min || delay > s_.bus.d_max) {
          fail("bus_reliability", r.tick, fmt::format("message {} delay {} outside bus bounds", f[0], delay));
        }
        if (!sent_.emplace(f[0], SentMessage{r.tick, delay, f[1]}).second) {
          fail("bus_reliability", r.tick, fmt::format("message id {} reused", f[0]));
        }
        break;
      }
      case RecordKind::kDeliver:
      case RecordKind::kDrop: {
        const auto it = sent_.find(f[0]);
        if (it == sent_.end()) {
          fail("bus_reliability", r.tick, fmt::format("message {} delivered without a send or twice", f[0]));
          break;
        }
        if (r.tick != it->second.at + it->second.delay || r.actor != it->second.to) {
          fail("bus_reliability", r.tick, fmt::format("message {} delivered off schedule", f[0]));
        }
        sent_.erase(it);
        if (r.kind == RecordKind::kDeliver) on_deliver(r);
        break;
      }
      case RecordKind::kSpawn: on_spawn(r); break;
      case RecordKind::kSpawnComplete: {
        TileInfo* info = find_tile(tile_at(f[0]));
        if (!info || info->phase != Phase::kSpawning) {
          fail("lifecycle", r.tick, fmt::format("spawn_complete for tile {} not spawning", f[0]));
          break;
        }
        if (r.tick != info->ready) {
          fail("spawn_latency", r.tick, fmt::format("tile {} ready at {} but completed at {}", f[0], info->ready, r.tick));
        }
        info->phase = Phase::kActive;
        info->active_at = r.tick;
        break;
      }
      case RecordKind::kRetire: {
        TileInfo* info = find_tile(tile_at(f[0]));
        if (!info || info->phase != Phase::kActive) {
          fail("lifecycle", r.tick, fmt::format("retire of tile {} that is not active", f[0]));
        } else {
          info->phase = Phase::kRetiring;
        }
        break;
      }
      case RecordKind::kDestroy: on_destroy(r); break;
      case RecordKind::kLaunch: {
        const TileId tile = tile_at(f[0]);
        TileInfo* info = find_tile(tile);
        if (!info || info->phase != Phase::kActive || info->launched_at) {
          fail("lifecycle", r.tick, fmt::format("launch of tile {} that is not a fresh active tile", f[0]));
          break;
        }
        info->launched_at = r.tick;
        launched_.insert(tile);
        suspicion_.erase(tile);
        break;
      }
      case RecordKind::kIssue: issued_at_[f[0]] = r.tick; break;
      case RecordKind::kDecide: on_decide(r); break;
      case RecordKind::kUnreachable: pending_votes_.erase(f[0]); break;
      case RecordKind::kCommit: {
        if (f[0] != prefix_digest_.size()) fail("state_transfer", r.tick, "commit out of op_seq order");
        const core::LogEntry entry{f[0], f[1], f[2], f[3] != 0};
        prefix_digest_.push_back(core::fold_digest(prefix_digest_.back(), entry));
        break;
      }
      case RecordKind::kInstall: {
        const std::uint64_t prefix = f[1];
        if (prefix >= prefix_digest_.size() || prefix_digest_[prefix] != f[2]) {
          fail("state_transfer", r.tick,
               fmt::format("tile {} installed a log that is not the committed prefix of length {}", f[0], prefix));
        }
        break;
      }
      case RecordKind::kRejuvRequest: on_request(r); break;
      case RecordKind::kRejuvenation: on_rejuvenation(r); break;
      case RecordKind::kRejuvAbort: targeted_.erase(tile_at(f[0])); break;
      case RecordKind::kWarn:
        if (r.sub == static_cast<std::uint8_t>(sim::Warning::kStaleTarget)) targeted_.erase(tile_at(f[0]));
        break;
      case RecordKind::kResize: {
        const int t_new = static_cast<int>(f[1]);
        if (f[3] != static_cast<std::uint64_t>(core::required_replicas(t_new, s_.quorum.mode))) {
          fail("replica_count", r.tick, fmt::format("resize to t={} left {} replicas", t_new, f[3]));
        }
        t_ = t_new;
        resized_in_event_ = true;
        break;
      }
      case RecordKind::kCrack: {
        if (!cracked_at_.emplace(static_cast<std::uint32_t>(f[0]), r.tick).second) {
          fail("knowledge_persistence", r.tick, fmt::format("template {} cracked twice", f[0]));
        }
        break;
      }
      case RecordKind::kCompromise: on_compromise(r); break;
      case RecordKind::kTrigger:
        if (r.sub == static_cast<std::uint8_t>(sim::TriggerTag::kRandom)) {
          if (r.tick - last_random_trigger_ > s_.trigger.max_delay) {
            fail("random_cadence", r.tick, fmt::format("random trigger gap {} exceeds T", r.tick - last_random_trigger_));
          }
          last_random_trigger_ = r.tick;
        }
        break;
      default: break;
    }
  }

  void on_spawn(const TraceRecord& r) {
    const auto& f = r.f;  // tile, template, pblock, port, start, ready
    const TileId tile = tile_at(f[0]);
    if (tiles_.contains(tile)) fail("lifecycle", r.tick, fmt::format("tile {} spawned twice", f[0]));
    const auto pblock = static_cast<std::uint32_t>(f[2]);
    if (pblock >= occupied_.size() || occupied_[pblock]) {
      fail("slot_conservation", r.tick, fmt::format("tile {} placed on unavailable pblock {}", f[0], pblock));
    } else {
      occupied_[pblock] = true;
    }
    if (f[1] >= s_.templates.size()) {
      fail("lifecycle", r.tick, fmt::format("tile {} uses unknown template {}", f[0], f[1]));
      return;
    }
    const bool icap = f[3] == static_cast<std::uint64_t>(fabric::PortKind::kIcap);
    const std::uint64_t bandwidth = icap ? s_.ports.icap_bandwidth : s_.ports.pcap_bandwidth;
    const std::uint64_t size = s_.templates[f[1]].bitstream_size;
    const Tick service = (size + bandwidth - 1) / bandwidth;
    Tick& port_free = icap ? icap_free_ : pcap_free_;
    if (f[4] != std::max(r.tick, port_free) || f[5] != f[4] + service) {
      fail("spawn_latency", r.tick,
           fmt::format("tile {} start {} ready {}, expected start {} service {}", f[0], f[4], f[5],
                       std::max(r.tick, port_free), service));
    }
    port_free = f[5];
    tiles_[tile] = TileInfo{static_cast<std::uint32_t>(f[1]), pblock, Phase::kSpawning, f[5], {}, {}};
  }

  void on_destroy(const TraceRecord& r) {
    const TileId tile = tile_at(r.f[0]);
    TileInfo* info = find_tile(tile);
    if (!info || info->phase == Phase::kDestroyed || info->phase == Phase::kSpawning) {
      fail("lifecycle", r.tick, fmt::format("destroy of tile {} that is not running", r.f[0]));
      return;
    }
    info->phase = Phase::kDestroyed;
    occupied_[info->pblock] = false;
    launched_.erase(tile);
    compromised_.erase(tile);
    suspicion_.erase(tile);
    destroyed_in_event_.insert(tile);
  }

  void on_deliver(const TraceRecord& r) {
    const auto& f = r.f;
    if (r.sub != static_cast<std::uint8_t>(sim::MsgType::kResponse) || r.actor != kCoreLogic) return;
    const TileId tile = tile_at(f[1]);
    const std::uint64_t op_seq = f[2];
    const std::uint64_t value = f[3];
    responses_[tile].emplace_back(op_seq, value);
    if (const auto d = decided_.find(op_seq); d != decided_.end()) {
      // Late response: the Monitor still sees it inside the response window.
      if (r.tick < issued_at_[op_seq] + window_ && value != d->second) ++suspicion_[tile];
    } else {
      pending_votes_[op_seq].emplace_back(tile, value);
    }
  }

  void on_decide(const TraceRecord& r) {
    const std::uint64_t op_seq = r.f[0];
    decided_[op_seq] = r.f[1];
    for (const auto& [tile, value] : pending_votes_[op_seq]) {
      if (value != r.f[1]) ++suspicion_[tile];
    }
    pending_votes_.erase(op_seq);
  }

  std::uint64_t divergences_since_launch(TileId tile) const {
    const auto it = responses_.find(tile);
    if (it == responses_.end()) return 0;
    std::uint64_t count = 0;
    for (const auto& [op_seq, value] : it->second) {
      const auto d = decided_.find(op_seq);
      if (d != decided_.end() && d->second != value) ++count;
    }
    return count;
  }

  std::vector<TileId> candidates() const {
    std::vector<TileId> out;
    for (TileId tile : launched_) {
      if (!targeted_.contains(tile)) out.push_back(tile);
    }
    return out;
  }

  void on_request(const TraceRecord& r) {
    const TileId target = tile_at(r.f[0]);
    const std::uint64_t score = r.f[1];
    const auto origin = static_cast<sim::Origin>(r.sub);
    const std::vector<TileId> pool = candidates();
    if (std::find(pool.begin(), pool.end(), target) == pool.end()) {
      fail("lifecycle", r.tick, fmt::format("request targets tile {} that is not an eligible replica", r.f[0]));
    }
    auto exposure = [&](TileId tile) { return r.tick - tiles_.at(tile).launched_at.value_or(r.tick); };

    if (origin == sim::Origin::kReactive) {
      const std::uint64_t seen = divergences_since_launch(target);
      if (seen < s_.trigger.suspicion_threshold) {
        fail("reactive_soundness", r.tick,
             fmt::format("tile {} rejuvenated after {} divergences (k = {})", r.f[0], seen, s_.trigger.suspicion_threshold));
      }
      suspicion_.erase(target);
    } else if (origin == sim::Origin::kPeriodic && !pool.empty()) {
      TileId best = pool.front();
      for (TileId tile : pool) {
        if (exposure(tile) > exposure(best)) best = tile;  // pool is ascending: ties keep the lowest id
      }
      if (best != target) {
        fail("periodic_target", r.tick, fmt::format("chose tile {}, round-robin order gives {}", r.f[0], best.value));
      }
      if (tiles_.contains(target) && score != exposure(target)) {
        fail("exposure_reset", r.tick, fmt::format("tile {} exposure {} but scored {}", r.f[0], exposure(target), score));
      }
    } else if (origin == sim::Origin::kProactive && !pool.empty()) {
      const auto& w = s_.trigger.weights;
      auto score_of = [&](TileId tile) {
        const auto it = suspicion_.find(tile);
        return w.exposure * exposure(tile) + w.suspicion * (it == suspicion_.end() ? 0 : it->second);
      };
      TileId best = pool.front();
      for (TileId tile : pool) {
        if (score_of(tile) > score_of(best)) best = tile;
      }
      if (best != target) {
        fail("proactive_target", r.tick, fmt::format("chose tile {}, argmax gives {}", r.f[0], best.value));
      }
      if (tiles_.contains(target) && score != score_of(target)) {
        fail("exposure_reset", r.tick, fmt::format("tile {} scored {}, expected {}", r.f[0], score, score_of(target)));
      }
    }
    targeted_.insert(target);
  }

  void on_rejuvenation(const TraceRecord& r) {
    const auto& f = r.f;  // retired, new_tile, requested_at, spawned_at, transferred_at
    const TileId retired = tile_at(f[0]);
    const TileId fresh = tile_at(f[1]);
    if (!(f[2] <= f[3] && f[3] <= f[4] && f[4] <= r.tick)) {
      fail("rejuvenation_shape", r.tick, "timestamps not monotone");
    }
    const TileInfo* old_info = find_tile(retired);
    const TileInfo* new_info = find_tile(fresh);
    if (!old_info || !new_info) {
      fail("rejuvenation_shape", r.tick, "rejuvenation names unknown tiles");
      return;
    }
    if (s_.templates.size() > 1 && old_info->tmpl == new_info->tmpl) {
      fail("rejuvenation_shape", r.tick, fmt::format("tile {} replaced by the same template {}", f[0], old_info->tmpl));
    }
    if (!destroyed_in_event_.contains(retired) || new_info->launched_at != r.tick) {
      fail("rejuvenation_shape", r.tick, "retired tile not destroyed alongside the replacement launch");
    }
    if (new_info->active_at != f[3]) fail("rejuvenation_shape", r.tick, "spawned_at differs from spawn completion");
    targeted_.erase(retired);
    ++rejuvenations_;
    if (last_rejuvenation_ && r.tick - *last_rejuvenation_ > max_rejuv_gap_) max_rejuv_gap_ = r.tick - *last_rejuvenation_;
    if (!last_rejuvenation_) first_rejuvenation_ = r.tick;
    last_rejuvenation_ = r.tick;
  }

  void on_compromise(const TraceRecord& r) {
    const TileId tile = tile_at(r.f[0]);
    const auto tmpl = static_cast<std::uint32_t>(r.f[1]);
    const TileInfo* info = find_tile(tile);
    const auto crack = cracked_at_.find(tmpl);
    const Tick latency = tmpl < s_.templates.size() ? s_.templates[tmpl].exploit_latency : 0;
    if (!info || info->tmpl != tmpl || !info->active_at || crack == cracked_at_.end() ||
        r.tick < crack->second + latency || r.tick < *info->active_at + latency) {
      fail("compromise_precondition", r.tick, fmt::format("tile {} compromised without crack plus exploit time", r.f[0]));
    }
    compromised_.insert(tile);
  }

  void end_event(const TraceRecord& last) {
    if (launched_.size() >= static_cast<std::size_t>(n_now())) booted_ = true;
    if (booted_ && launched_.size() + 1 < static_cast<std::size_t>(n_now())) {
      fail("replica_count", last.tick, fmt::format("{} launched replicas with n = {}", launched_.size(), n_now()));
    }
    if (resized_in_event_ && launched_.size() != static_cast<std::size_t>(n_now())) {
      fail("replica_count", last.tick, fmt::format("resize left {} launched replicas, n = {}", launched_.size(), n_now()));
    }
    if (s_.adversary.compromise_cap && compromised_.size() > *s_.adversary.compromise_cap) {
      fail("compromise_cap", last.tick, fmt::format("{} compromised tiles exceed cap", compromised_.size()));
    }
    resized_in_event_ = false;
    destroyed_in_event_.clear();
  }

  void finish() {
    for (const auto& [id, msg] : sent_) {
      if (msg.at + msg.delay <= s_.horizon) {
        fail("bus_reliability", msg.at, fmt::format("message {} never delivered", id));
      }
    }
    if (s_.trigger.policy == policies::Policy::kRandomDefault && s_.horizon >= 10 * s_.trigger.max_delay) {
      const Tick bound = 10 * s_.trigger.max_delay;
      if (!last_rejuvenation_ || *first_rejuvenation_ > bound || max_rejuv_gap_ > bound ||
          s_.horizon - *last_rejuvenation_ > bound) {
        fail("random_cadence", s_.horizon, fmt::format("a window of {} ticks passed without a rejuvenation", bound));
      }
    }
  }

  const cli::Scenario& s_;
  int t_;
  Tick window_;
  std::vector<bool> occupied_;
  Tick icap_free_ = 0;
  Tick pcap_free_ = 0;
  std::map<TileId, TileInfo> tiles_;
  std::set<TileId> launched_;
  std::set<TileId> targeted_;
  std::set<TileId> compromised_;
  std::set<TileId> destroyed_in_event_;
  bool resized_in_event_ = false;
  bool booted_ = false;

  std::unordered_map<std::uint64_t, SentMessage> sent_;
  std::unordered_map<std::uint64_t, Tick> issued_at_;
  std::unordered_map<std::uint64_t, std::uint64_t> decided_;
  std::unordered_map<std::uint64_t, std::vector<std::pair<TileId, std::uint64_t>>> pending_votes_;
  std::map<TileId, std::vector<std::pair<std::uint64_t, std::uint64_t>>> responses_;
  std::map<TileId, std::uint64_t> suspicion_;
  std::vector<std::uint64_t> prefix_digest_;
  std::map<std::uint32_t, Tick> cracked_at_;

  Tick last_random_trigger_ = 0;
  std::uint64_t rejuvenations_ = 0;
  std::optional<Tick> first_rejuvenation_;
  std::optional<Tick> last_rejuvenation_;
  Tick max_rejuv_gap_ = 0;

  std::vector<AuditFinding> findings_;
};

}  // namespace

std::vector<AuditFinding> audit(const sim::Trace& trace, const cli::Scenario& scenario) {
  return Auditor(scenario).run(trace);
}

std::string format_findings(const std::vector<AuditFinding>& findings, std::size_t limit) {
  std::string out;
  for (std::size_t i = 0; i < findings.size() && i < limit; ++i) {
    out += fmt::format("{} @{}: {}\n", findings[i].property, findings[i].tick, findings[i].detail);
  }
  if (findings.size() > limit) out += fmt::format("... {} more\n", findings.size() - limit);
  return out;
}

}  // namespace rejuv::metrics
