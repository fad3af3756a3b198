#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "rejuv/adversary/adversary.hpp"
#include "rejuv/core/quorum.hpp"
#include "rejuv/core/replica.hpp"
#include "rejuv/fabric/bus.hpp"
#include "rejuv/fabric/fabric.hpp"
#include "rejuv/sim/engine.hpp"

namespace rejuv::core {

struct Vote {
  TileId tile;
  std::uint64_t value = 0;
};

/// One agreement instance. `q` is fixed at issue time, so a resize never
/// changes the rules of an instance already in flight. `recipients` starts as
/// the launched set and gains any tile launched while the instance is open.
struct AgreementRecord {
  std::uint64_t op_seq = 0;
  std::uint64_t op = 0;
  Tick issued_at = 0;
  Tick deadline = 0;  // pushed back when a replacement tile joins
  int q = 1;
  std::vector<TileId> recipients;
  std::vector<Vote> responses;  // arrival order
  std::optional<std::uint64_t> decided;
  std::optional<Tick> decided_at;
  bool closed = false;
};

struct RejuvenationRecord {
  TileId retired;
  TileId new_tile;
  TemplateIndex retired_template;
  TemplateIndex new_template;
  sim::Origin origin = sim::Origin::kManual;
  Tick requested_at = 0;
  Tick spawned_at = 0;
  Tick state_transferred_at = 0;
  Tick launched_at = 0;
};

enum class RejuvStatus : std::uint8_t { kStarted, kDeferred, kSkipped };

struct CoreHooks {
  std::function<void(const AgreementRecord&)> on_decided;
  /// A response that arrived after its instance was decided, within the
  /// response window. `record.responses` already includes it.
  std::function<void(const AgreementRecord&, const Vote&)> on_late_response;
  std::function<void(TileId, Tick)> on_launched;
  std::function<void(TileId)> on_destroyed;
  /// Picks `count` tiles to retire on scale-in. Defaults to oldest launch first.
  std::function<std::vector<TileId>(const std::vector<TileId>&, std::size_t)> select_victims;
};

/// The trusted orchestrator.
///
/// Agreement: every operation gets a sequence number and is broadcast to the
/// launched tiles; the first outcome reported by q tiles is decided. An
/// instance closes as decided, or as unreachable once every recipient
/// answered (or the 2*d_max+1 response window expired) without a quorum.
/// Closed instances commit to the authoritative log in op_seq order and the
/// commit is broadcast to the launched tiles.
///
/// Rejuvenation runs as spawn -> state transfer -> destroy retired -> launch.
/// The replacement is spawned before the retired tile goes away, so at least
/// one spare pblock is needed; without one the request is deferred.
class CoreLogic {
 public:
  CoreLogic(sim::Engine& engine, fabric::Fabric& fabric, fabric::Bus& bus,
            adversary::Adversary& adversary, QuorumConfig config, fabric::PortKind port,
            CoreHooks hooks = {});

  /// Spawns the initial n tiles, template i % library size for tile i.
  void boot();

  /// Issues one application operation.
  void invoke(std::uint64_t op);

  /// Uniform draw over the library minus `exclude`. A single-template library
  /// returns `exclude` and records a diversity warning.
  TemplateIndex select_template(TemplateIndex exclude);

  RejuvStatus rejuvenate(TileId target, sim::Origin origin, std::uint64_t score = 0);

  /// Queues a change of the tolerated fault count; applied when no
  /// rejuvenation is in progress.
  void adjust_replication(int t_new);

  void on_message(const fabric::Message& message);
  void on_spawn_complete(TileId tile);
  void on_timer(sim::TimerTag tag, std::uint64_t ref);

  const QuorumConfig& config() const noexcept { return config_; }
  /// Tiles taking part in agreement, in launch order.
  const std::vector<TileId>& launched() const noexcept { return launched_; }
  bool is_launched(TileId tile) const;
  /// Launched tiles not already selected for rejuvenation, ascending id.
  std::vector<TileId> eligible_targets() const;
  bool is_targeted(TileId tile) const { return targeted_.contains(tile); }

  const ReplicaState& authoritative_log() const noexcept { return authoritative_; }
  const ReplicaState* replica(TileId tile) const;
  const std::vector<RejuvenationRecord>& rejuvenations() const noexcept { return rejuvenations_; }
  std::uint64_t issued() const noexcept { return issued_; }
  std::size_t open_agreements() const noexcept { return agreements_.size(); }
  std::size_t active_rejuvenations() const noexcept { return rejuv_sessions_.size(); }
  bool resizing() const noexcept { return resize_.has_value(); }

  Tick response_window() const noexcept { return 2 * bus_.model().d_max + 1; }

 private:
  struct ReplicaAgent {
    ReplicaState state;
    CounterMachine machine;
    std::uint64_t executed = 0;
    std::map<std::uint64_t, std::pair<std::uint64_t, bool>> exec_buffer;  // seq -> (op, reply)
    std::map<std::uint64_t, LogEntry> commit_buffer;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> waiting_requests;  // (request, prefix)
  };

  enum class Purpose : std::uint8_t { kBoot, kRejuvenation, kResize };

  struct RejuvSession {
    RejuvenationRecord record;
  };

  struct Reply {
    TileId tile;
    std::uint64_t digest = 0;
    bool forged = false;
  };

  struct TransferSession {
    std::uint64_t id = 0;
    TileId tile;
    std::uint64_t prefix = 0;
    Purpose purpose = Purpose::kRejuvenation;
    std::set<TileId> expected;
    std::vector<Reply> replies;
    std::optional<ReplicaState> adopted;
    bool closed = false;
  };

  struct ResizeOp {
    int t_old = 0;
    int t_new = 0;
    bool scale_in = false;
    std::vector<TileId> staged;
    std::size_t ready = 0;
  };

  struct DeferredRejuv {
    TileId target;
    sim::Origin origin;
    Tick requested_at;
  };

  // Core Logic side.
  void handle_response(const fabric::Message& message);
  void handle_state_reply(const fabric::Message& message);
  void decide(AgreementRecord& record, std::uint64_t value);
  void close_unreachable(AgreementRecord& record);
  void try_commit();
  void launch(TileId tile, std::uint64_t installed_prefix);
  void destroy(TileId tile, sim::DestroyReason reason);
  void start_rejuvenation(const DeferredRejuv& request);
  void begin_state_transfer(TileId tile, Purpose purpose);
  void adopt(TransferSession& session, std::uint64_t digest);
  void fail_transfer(TransferSession& session);
  void install(TransferSession& session);
  void finish_rejuvenation(TileId new_tile);
  void abort_rejuvenation(TileId new_tile);
  void pump_resize();
  void finish_scale_out();
  void check_quiesce();
  void retry_deferred();
  TemplateIndex select_template_for_growth();

  // Tile side.
  void tile_receive(TileId tile, const fabric::Message& message);
  void drain_execution(TileId tile, ReplicaAgent& agent);
  void drain_commits(TileId tile, ReplicaAgent& agent);
  void answer_state_request(TileId tile, ReplicaAgent& agent, std::uint64_t request,
                            std::uint64_t prefix);

  void send(ActorId from, ActorId to, sim::MsgType type, std::array<std::uint64_t, 4> words,
            std::vector<LogEntry> entries = {});

  sim::Engine& engine_;
  fabric::Fabric& fabric_;
  fabric::Bus& bus_;
  adversary::Adversary& adversary_;
  QuorumConfig config_;
  fabric::PortKind port_;
  CoreHooks hooks_;

  std::unordered_map<TileId, ReplicaAgent> agents_;
  std::vector<TileId> launched_;
  std::set<TileId> targeted_;
  std::map<TileId, Purpose> spawn_purpose_;

  std::uint64_t issued_ = 0;
  std::map<std::uint64_t, AgreementRecord> agreements_;  // uncommitted instances
  // Decided instances still inside their response window, for late responses.
  std::unordered_map<std::uint64_t, AgreementRecord> recently_decided_;
  ReplicaState authoritative_;
  std::deque<std::uint64_t> held_ops_;

  std::map<TileId, RejuvSession> rejuv_sessions_;  // keyed by new tile
  std::deque<DeferredRejuv> deferred_;
  std::vector<RejuvenationRecord> rejuvenations_;

  std::uint64_t next_request_ = 1;
  std::map<std::uint64_t, TransferSession> transfers_;
  // Replies a compromised tile answered with a forged digest: (request, tile).
  std::set<std::pair<std::uint64_t, TileId>> forged_replies_;

  std::optional<ResizeOp> resize_;
  std::deque<int> pending_resizes_;
};

}  // namespace rejuv::core
