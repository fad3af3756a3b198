#include "rejuv/core/core_logic.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace rejuv::core {

using sim::MsgType;
using sim::RecordKind;

CoreLogic::CoreLogic(sim::Engine& engine, fabric::Fabric& fabric, fabric::Bus& bus,
                     adversary::Adversary& adversary, QuorumConfig config, fabric::PortKind port,
                     CoreHooks hooks)
    : engine_(engine),
      fabric_(fabric),
      bus_(bus),
      adversary_(adversary),
      config_(config),
      port_(port),
      hooks_(std::move(hooks)) {
  (void)config_.n();  // validates t
}

void CoreLogic::send(ActorId from, ActorId to, MsgType type, std::array<std::uint64_t, 4> words,
                     std::vector<LogEntry> entries) {
  fabric::Message message;
  message.from = from;
  message.to = to;
  message.type = type;
  message.words = words;
  message.entries = std::move(entries);
  bus_.send(std::move(message));
}

bool CoreLogic::is_launched(TileId tile) const {
  return std::find(launched_.begin(), launched_.end(), tile) != launched_.end();
}

std::vector<TileId> CoreLogic::eligible_targets() const {
  std::vector<TileId> out;
  for (TileId t : launched_) {
    if (!targeted_.contains(t)) out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

const ReplicaState* CoreLogic::replica(TileId tile) const {
  const auto it = agents_.find(tile);
  return it == agents_.end() ? nullptr : &it->second.state;
}

// --- Boot and agreement ------------------------------------------------------

void CoreLogic::boot() {
  const auto& library = fabric_.library();
  if (library.empty()) throw Error(Errc::kEmptyLibrary, "cannot boot without templates");
  const int n = config_.n();
  for (int i = 0; i < n; ++i) {
    const TemplateIndex tmpl{static_cast<std::uint32_t>(i % static_cast<int>(library.size()))};
    const TileId tile = fabric_.spawn_tile(tmpl, port_);
    spawn_purpose_[tile] = Purpose::kBoot;
  }
}

void CoreLogic::invoke(std::uint64_t op) {
  if (resize_ && resize_->scale_in) {
    held_ops_.push_back(op);
    return;
  }
  const int q = config_.q();
  if (launched_.size() < static_cast<std::size_t>(q)) {
    engine_.note(RecordKind::kInsufficient, kCoreLogic,
                 {op, launched_.size(), static_cast<std::uint64_t>(q)});
    return;
  }
  const std::uint64_t seq = ++issued_;
  AgreementRecord& record = agreements_[seq];
  record.op_seq = seq;
  record.op = op;
  record.issued_at = engine_.now();
  record.deadline = engine_.now() + response_window();
  record.q = q;
  record.recipients = launched_;
  engine_.note(RecordKind::kIssue, kCoreLogic,
               {seq, op, record.recipients.size(), static_cast<std::uint64_t>(q)});
  for (TileId tile : record.recipients) {
    send(kCoreLogic, actor_of(tile), MsgType::kExecute, {seq, op, 1, 0});
  }
  engine_.schedule(record.deadline, sim::EventKind::kTimer, kCoreLogic,
                   static_cast<std::uint8_t>(sim::TimerTag::kAgreementTimeout), seq);
}

namespace {

bool accepts_vote(const AgreementRecord& record, TileId tile) {
  if (std::find(record.recipients.begin(), record.recipients.end(), tile) == record.recipients.end()) {
    return false;
  }
  return std::none_of(record.responses.begin(), record.responses.end(),
                      [&](const Vote& v) { return v.tile == tile; });
}

}  // namespace

void CoreLogic::handle_response(const fabric::Message& message) {
  const TileId tile{message.from};
  const auto it = agreements_.find(message.words[0]);
  if (it == agreements_.end() || it->second.closed) {
    const auto late = recently_decided_.find(message.words[0]);
    if (late == recently_decided_.end() || !accepts_vote(late->second, tile)) return;
    late->second.responses.push_back(Vote{tile, message.words[1]});
    if (hooks_.on_late_response) hooks_.on_late_response(late->second, late->second.responses.back());
    return;
  }
  AgreementRecord& record = it->second;
  if (!accepts_vote(record, tile)) return;

  const std::uint64_t value = message.words[1];
  record.responses.push_back(Vote{tile, value});
  const auto matches = std::count_if(record.responses.begin(), record.responses.end(),
                                     [&](const Vote& v) { return v.value == value; });
  if (matches >= record.q) {
    decide(record, value);
  } else if (record.responses.size() == record.recipients.size()) {
    close_unreachable(record);
  }
  try_commit();
}

void CoreLogic::decide(AgreementRecord& record, std::uint64_t value) {
  record.decided = value;
  record.decided_at = engine_.now();
  record.closed = true;
  const auto votes = std::count_if(record.responses.begin(), record.responses.end(),
                                   [&](const Vote& v) { return v.value == value; });
  engine_.note(RecordKind::kDecide, kCoreLogic,
               {record.op_seq, value, record.issued_at, static_cast<std::uint64_t>(record.q),
                static_cast<std::uint64_t>(votes)});
  if (record.responses.size() < record.recipients.size()) recently_decided_[record.op_seq] = record;
  if (hooks_.on_decided) hooks_.on_decided(record);
}

void CoreLogic::close_unreachable(AgreementRecord& record) {
  record.closed = true;
  engine_.note(RecordKind::kUnreachable, kCoreLogic,
               {record.op_seq, record.issued_at, static_cast<std::uint64_t>(record.q),
                record.responses.size()});
}

void CoreLogic::try_commit() {
  while (!agreements_.empty() && agreements_.begin()->second.closed) {
    const AgreementRecord& record = agreements_.begin()->second;
    const LogEntry entry{record.op_seq, record.op, record.decided.value_or(0),
                         record.decided.has_value()};
    authoritative_.append(entry);
    engine_.note(RecordKind::kCommit, kCoreLogic,
                 {entry.seq, entry.op, entry.outcome, entry.decided ? 1u : 0u});
    for (TileId tile : launched_) {
      send(kCoreLogic, actor_of(tile), MsgType::kCommit,
           {entry.seq, entry.op, entry.outcome, entry.decided ? 1u : 0u});
    }
    agreements_.erase(agreements_.begin());
  }
  check_quiesce();
}

void CoreLogic::on_message(const fabric::Message& message) {
  if (message.to != kCoreLogic) {
    tile_receive(TileId{message.to}, message);
    return;
  }
  switch (message.type) {
    case MsgType::kResponse: handle_response(message); break;
    case MsgType::kStateReply: handle_state_reply(message); break;
    default: break;
  }
}

void CoreLogic::on_timer(sim::TimerTag tag, std::uint64_t ref) {
  switch (tag) {
    case sim::TimerTag::kAgreementTimeout: {
      const auto it = agreements_.find(ref);
      if (it != agreements_.end() && !it->second.closed && engine_.now() < it->second.deadline) break;
      recently_decided_.erase(ref);
      if (it != agreements_.end() && !it->second.closed) {
        close_unreachable(it->second);
        try_commit();
      }
      break;
    }
    case sim::TimerTag::kStateTimeout: {
      const auto it = transfers_.find(ref);
      if (it != transfers_.end() && !it->second.closed) fail_transfer(it->second);
      break;
    }
    case sim::TimerTag::kStateInstall: {
      const auto it = transfers_.find(ref);
      if (it != transfers_.end()) install(it->second);
      break;
    }
    default: break;
  }
}

// --- Tile lifecycle ----------------------------------------------------------

void CoreLogic::on_spawn_complete(TileId tile) {
  fabric_.complete_spawn(tile);
  const fabric::Tile& info = fabric_.tile(tile);
  engine_.current().f = {tile.value, info.tmpl.value, info.pblock.value, 0, 0, 0};
  agents_.emplace(tile, ReplicaAgent{});

  const auto purpose_it = spawn_purpose_.find(tile);
  const Purpose purpose = purpose_it == spawn_purpose_.end() ? Purpose::kBoot : purpose_it->second;
  spawn_purpose_.erase(tile);
  switch (purpose) {
    case Purpose::kBoot:
      launch(tile, 0);
      break;
    case Purpose::kRejuvenation:
      rejuv_sessions_.at(tile).record.spawned_at = engine_.now();
      begin_state_transfer(tile, Purpose::kRejuvenation);
      break;
    case Purpose::kResize:
      if (!resize_ || std::find(resize_->staged.begin(), resize_->staged.end(), tile) ==
                          resize_->staged.end()) {
        destroy(tile, sim::DestroyReason::kAbort);  // resize was abandoned while spawning
      } else {
        begin_state_transfer(tile, Purpose::kResize);
      }
      break;
  }
}

void CoreLogic::launch(TileId tile, std::uint64_t installed_prefix) {
  launched_.push_back(tile);
  engine_.note(RecordKind::kLaunch, kCoreLogic,
               {tile.value, fabric_.tile(tile).tmpl.value, installed_prefix});

  // Bring the tile up to date: commits after its installed prefix, then the
  // closed but uncommitted operations, which it executes without answering.
  // Instances still collecting responses take the tile as a recipient.
  std::vector<LogEntry> catchup;
  const auto& log = authoritative_.entries();
  for (std::size_t i = installed_prefix; i < log.size(); ++i) catchup.push_back(log[i]);
  const std::size_t committed = catchup.size();
  std::vector<const AgreementRecord*> joined;
  for (auto& [seq, record] : agreements_) {
    if (record.closed) {
      catchup.push_back(LogEntry{seq, record.op, 0, false});
    } else {
      record.recipients.push_back(tile);
      joined.push_back(&record);
      if (engine_.now() + response_window() > record.deadline) {
        record.deadline = engine_.now() + response_window();
        engine_.schedule(record.deadline, sim::EventKind::kTimer, kCoreLogic,
                         static_cast<std::uint8_t>(sim::TimerTag::kAgreementTimeout), seq);
      }
    }
  }
  if (!catchup.empty()) {
    const std::uint64_t pending = catchup.size() - committed;
    send(kCoreLogic, actor_of(tile), MsgType::kCatchup, {installed_prefix + 1, committed, pending, 0},
         std::move(catchup));
  }
  for (const AgreementRecord* record : joined) {
    send(kCoreLogic, actor_of(tile), MsgType::kExecute, {record->op_seq, record->op, 1, 0});
  }
  if (hooks_.on_launched) hooks_.on_launched(tile, engine_.now());
}

void CoreLogic::destroy(TileId tile, sim::DestroyReason reason) {
  fabric_.destroy_tile(tile, reason);
  launched_.erase(std::remove(launched_.begin(), launched_.end(), tile), launched_.end());
  agents_.erase(tile);
  adversary_.on_tile_destroyed(tile);
  if (hooks_.on_destroyed) hooks_.on_destroyed(tile);
}

// --- Rejuvenation ------------------------------------------------------------

TemplateIndex CoreLogic::select_template(TemplateIndex exclude) {
  const std::size_t size = fabric_.library().size();
  if (size == 0) throw Error(Errc::kEmptyLibrary, "no softcore templates");
  if (size == 1) {
    engine_.note(RecordKind::kWarn, kCoreLogic, {exclude.value}, sim::Warning::kDiversityUnavailable);
    return TemplateIndex{0};
  }
  const auto draw = static_cast<std::uint32_t>(engine_.uniform(0, static_cast<std::int64_t>(size) - 2));
  return TemplateIndex{draw >= exclude.value ? draw + 1 : draw};
}

TemplateIndex CoreLogic::select_template_for_growth() {
  const std::size_t size = fabric_.library().size();
  if (size == 0) throw Error(Errc::kEmptyLibrary, "no softcore templates");
  std::vector<std::uint32_t> deployed(size, 0);
  for (const fabric::Tile& t : fabric_.tiles()) {
    if (t.lifecycle != fabric::Lifecycle::kDestroyed) ++deployed[t.tmpl.value];
  }
  const std::uint32_t least = *std::min_element(deployed.begin(), deployed.end());
  std::vector<std::uint32_t> candidates;
  for (std::uint32_t i = 0; i < size; ++i) {
    if (deployed[i] == least) candidates.push_back(i);
  }
  const auto pick = engine_.uniform(0, static_cast<std::int64_t>(candidates.size()) - 1);
  return TemplateIndex{candidates[static_cast<std::size_t>(pick)]};
}

RejuvStatus CoreLogic::rejuvenate(TileId target, sim::Origin origin, std::uint64_t score) {
  if (!fabric_.contains(target)) throw Error(Errc::kUnknownTile, fmt::format("tile {}", target.value));
  if (!is_launched(target)) {
    engine_.note(RecordKind::kWarn, kCoreLogic, {target.value}, sim::Warning::kNotLaunched);
    return RejuvStatus::kSkipped;
  }
  if (targeted_.contains(target)) {
    engine_.note(RecordKind::kWarn, kCoreLogic, {target.value}, sim::Warning::kAlreadyTargeted);
    return RejuvStatus::kSkipped;
  }
  engine_.note(RecordKind::kRejuvRequest, kCoreLogic, {target.value, score}, origin);
  targeted_.insert(target);
  const DeferredRejuv request{target, origin, engine_.now()};
  if (resize_ || !pending_resizes_.empty() || !deferred_.empty() || fabric_.free_pblocks() == 0) {
    deferred_.push_back(request);
    engine_.note(RecordKind::kRejuvDeferred, kCoreLogic, {target.value});
    return RejuvStatus::kDeferred;
  }
  start_rejuvenation(request);
  return RejuvStatus::kStarted;
}

void CoreLogic::start_rejuvenation(const DeferredRejuv& request) {
  const fabric::Tile& old_tile = fabric_.tile(request.target);
  const TemplateIndex retired_template = old_tile.tmpl;
  if (old_tile.lifecycle == fabric::Lifecycle::kActive) fabric_.retire(request.target);
  const TemplateIndex tmpl = select_template(retired_template);
  const TileId fresh = fabric_.spawn_tile(tmpl, port_);
  spawn_purpose_[fresh] = Purpose::kRejuvenation;

  RejuvSession session;
  session.record.retired = request.target;
  session.record.new_tile = fresh;
  session.record.retired_template = retired_template;
  session.record.new_template = tmpl;
  session.record.origin = request.origin;
  session.record.requested_at = request.requested_at;
  rejuv_sessions_.emplace(fresh, session);
}

void CoreLogic::retry_deferred() {
  if (resize_ || !pending_resizes_.empty()) return;
  while (!deferred_.empty() && fabric_.free_pblocks() > 0) {
    const DeferredRejuv request = deferred_.front();
    deferred_.pop_front();
    if (!is_launched(request.target)) {
      targeted_.erase(request.target);
      engine_.note(RecordKind::kWarn, kCoreLogic, {request.target.value}, sim::Warning::kStaleTarget);
      continue;
    }
    start_rejuvenation(request);
  }
}

void CoreLogic::finish_rejuvenation(TileId new_tile) {
  auto node = rejuv_sessions_.extract(new_tile);
  RejuvenationRecord record = node.mapped().record;
  record.state_transferred_at = engine_.now();
  if (fabric_.tile(record.retired).alive()) destroy(record.retired, sim::DestroyReason::kRejuvenation);
  launch(new_tile, agents_.at(new_tile).state.size());
  record.launched_at = engine_.now();
  engine_.note(RecordKind::kRejuvenation, kCoreLogic,
               {record.retired.value, record.new_tile.value, record.requested_at, record.spawned_at,
                record.state_transferred_at});
  rejuvenations_.push_back(record);
  targeted_.erase(record.retired);
  adversary_.on_rejuvenation_launch(engine_);
  pump_resize();
  retry_deferred();
}

void CoreLogic::abort_rejuvenation(TileId new_tile) {
  auto node = rejuv_sessions_.extract(new_tile);
  const RejuvenationRecord& record = node.mapped().record;
  if (fabric_.tile(new_tile).alive()) destroy(new_tile, sim::DestroyReason::kAbort);
  engine_.note(RecordKind::kRejuvAbort, kCoreLogic, {record.retired.value, new_tile.value});
  targeted_.erase(record.retired);
  pump_resize();
  retry_deferred();
}

// --- State transfer ----------------------------------------------------------

void CoreLogic::begin_state_transfer(TileId tile, Purpose purpose) {
  TransferSession session;
  session.id = next_request_++;
  session.tile = tile;
  session.prefix = authoritative_.size();
  session.purpose = purpose;
  session.expected.insert(launched_.begin(), launched_.end());
  auto& stored = transfers_.emplace(session.id, std::move(session)).first->second;

  const auto threshold = static_cast<std::size_t>(config_.t) + 1;
  if (stored.expected.size() < threshold) {
    fail_transfer(stored);
    return;
  }
  for (TileId source : stored.expected) {
    send(kCoreLogic, actor_of(source), MsgType::kStateRequest, {stored.id, stored.prefix, 0, 0});
  }
  engine_.schedule(engine_.now() + response_window(), sim::EventKind::kTimer, kCoreLogic,
                   static_cast<std::uint8_t>(sim::TimerTag::kStateTimeout), stored.id);
}

void CoreLogic::handle_state_reply(const fabric::Message& message) {
  const auto it = transfers_.find(message.words[0]);
  if (it == transfers_.end() || it->second.closed) return;
  TransferSession& session = it->second;
  const TileId tile{message.from};
  if (!session.expected.contains(tile)) return;
  if (std::any_of(session.replies.begin(), session.replies.end(),
                  [&](const Reply& r) { return r.tile == tile; })) {
    return;
  }
  const std::uint64_t digest = message.words[2];
  // Simulator bookkeeping so that adopting a forged digest installs the forged log.
  const bool forged = forged_replies_.erase({session.id, tile}) > 0;
  session.replies.push_back(Reply{tile, digest, forged});
  const auto matches = std::count_if(session.replies.begin(), session.replies.end(),
                                     [&](const Reply& r) { return r.digest == digest; });
  if (matches >= config_.t + 1) {
    adopt(session, digest);
  } else if (session.replies.size() == session.expected.size()) {
    fail_transfer(session);
  }
}

void CoreLogic::adopt(TransferSession& session, std::uint64_t digest) {
  std::optional<ReplicaState> log;
  TileId source{};
  for (const Reply& reply : session.replies) {
    if (reply.digest != digest) continue;
    const auto agent = agents_.find(reply.tile);
    if (agent == agents_.end() || agent->second.state.size() < session.prefix) continue;
    log = agent->second.state.truncated(session.prefix);
    if (reply.forged) {
      const auto& entries = log->entries();
      log->replace_last(adversary_.forge_entry(entries.empty() ? nullptr : &entries.back(),
                                               session.prefix));
    }
    source = reply.tile;
    break;
  }
  if (!log) {
    fail_transfer(session);
    return;
  }
  const auto matches = std::count_if(session.replies.begin(), session.replies.end(),
                                     [&](const Reply& r) { return r.digest == digest; });
  session.closed = true;
  engine_.note(RecordKind::kStateAdopt, kCoreLogic,
               {session.tile.value, session.id, session.prefix, digest, source.value,
                static_cast<std::uint64_t>(matches)});
  const std::uint64_t bandwidth = bus_.model().state_bandwidth;
  const Tick transfer = std::max<Tick>(1, (log->size() + bandwidth - 1) / bandwidth);
  session.adopted = std::move(log);
  engine_.schedule(engine_.now() + transfer, sim::EventKind::kTimer, kCoreLogic,
                   static_cast<std::uint8_t>(sim::TimerTag::kStateInstall), session.id);
}

void CoreLogic::fail_transfer(TransferSession& session) {
  session.closed = true;
  engine_.note(RecordKind::kStateUnreachable, kCoreLogic,
               {session.tile.value, session.id, session.prefix, session.replies.size()});
  const TileId tile = session.tile;
  const Purpose purpose = session.purpose;
  transfers_.erase(session.id);

  if (purpose == Purpose::kRejuvenation) {
    abort_rejuvenation(tile);
    return;
  }
  if (purpose == Purpose::kResize && resize_) {
    const ResizeOp op = *resize_;
    resize_.reset();
    for (TileId staged : op.staged) {
      if (fabric_.tile(staged).alive()) destroy(staged, sim::DestroyReason::kAbort);
    }
    engine_.note(RecordKind::kResizeError, kCoreLogic,
                 {static_cast<std::uint64_t>(op.t_old), static_cast<std::uint64_t>(op.t_new),
                  op.staged.size(), fabric_.free_pblocks()},
                 sim::ResizeError::kStateTransferFailed);
    pump_resize();
    retry_deferred();
  }
}

void CoreLogic::install(TransferSession& session) {
  const TileId tile = session.tile;
  const Purpose purpose = session.purpose;
  ReplicaState log = std::move(*session.adopted);
  transfers_.erase(session.id);
  if (!fabric_.tile(tile).alive()) return;  // abandoned resize

  ReplicaAgent& agent = agents_.at(tile);
  agent.machine = CounterMachine{};
  for (const LogEntry& e : log.entries()) agent.machine.apply(e.op);
  agent.executed = log.size();
  agent.state = std::move(log);
  engine_.note(RecordKind::kInstall, kCoreLogic, {tile.value, agent.state.size(), agent.state.digest()});

  if (purpose == Purpose::kRejuvenation) {
    finish_rejuvenation(tile);
  } else if (purpose == Purpose::kResize && resize_) {
    if (++resize_->ready == resize_->staged.size()) finish_scale_out();
  }
}

// --- Resizing ----------------------------------------------------------------

void CoreLogic::adjust_replication(int t_new) {
  if (t_new < 0) throw Error(Errc::kNegativeT, fmt::format("t_new = {}", t_new));
  pending_resizes_.push_back(t_new);
  pump_resize();
}

void CoreLogic::pump_resize() {
  while (!resize_ && !pending_resizes_.empty() && rejuv_sessions_.empty()) {
    const int t_new = pending_resizes_.front();
    pending_resizes_.pop_front();
    const int t_old = config_.t;
    if (t_new == t_old) continue;

    if (t_new > t_old) {
      const std::size_t target = static_cast<std::size_t>(required_replicas(t_new, config_.mode));
      const std::size_t needed = target > launched_.size() ? target - launched_.size() : 0;
      const std::uint32_t free = fabric_.free_pblocks();
      if (needed > free) {
        engine_.note(RecordKind::kResizeError, kCoreLogic,
                     {static_cast<std::uint64_t>(t_old), static_cast<std::uint64_t>(t_new), needed, free},
                     sim::ResizeError::kNoFreePblock);
        continue;
      }
      resize_ = ResizeOp{t_old, t_new, false, {}, 0};
      for (std::size_t i = 0; i < needed; ++i) {
        const TileId tile = fabric_.spawn_tile(select_template_for_growth(), port_);
        spawn_purpose_[tile] = Purpose::kResize;
        resize_->staged.push_back(tile);
      }
      if (needed == 0) finish_scale_out();
      return;
    }
    resize_ = ResizeOp{t_old, t_new, true, {}, 0};
    check_quiesce();
  }
  if (!resize_) retry_deferred();
}

void CoreLogic::finish_scale_out() {
  const ResizeOp op = *resize_;
  const std::size_t n_old = launched_.size();
  config_.t = op.t_new;
  for (TileId tile : op.staged) launch(tile, agents_.at(tile).state.size());
  engine_.note(RecordKind::kResize, kCoreLogic,
               {static_cast<std::uint64_t>(op.t_old), static_cast<std::uint64_t>(op.t_new), n_old,
                launched_.size()});
  resize_.reset();
  pump_resize();
  retry_deferred();
}

void CoreLogic::check_quiesce() {
  if (!resize_ || !resize_->scale_in || !agreements_.empty()) return;
  const ResizeOp op = *resize_;
  const std::size_t n_old = launched_.size();
  const std::size_t keep = static_cast<std::size_t>(required_replicas(op.t_new, config_.mode));
  const std::size_t surplus = n_old > keep ? n_old - keep : 0;

  std::vector<TileId> victims;
  if (hooks_.select_victims) {
    victims = hooks_.select_victims(launched_, surplus);
  } else {
    victims.assign(launched_.begin(), launched_.begin() + static_cast<std::ptrdiff_t>(surplus));
  }
  for (TileId victim : victims) {
    if (fabric_.tile(victim).lifecycle == fabric::Lifecycle::kActive) fabric_.retire(victim);
    destroy(victim, sim::DestroyReason::kScaleIn);
  }
  config_.t = op.t_new;
  engine_.note(RecordKind::kResize, kCoreLogic,
               {static_cast<std::uint64_t>(op.t_old), static_cast<std::uint64_t>(op.t_new), n_old,
                launched_.size()});
  resize_.reset();

  std::deque<std::uint64_t> held;
  held.swap(held_ops_);
  for (std::uint64_t op_value : held) invoke(op_value);
  pump_resize();
  retry_deferred();
}

// --- Tile side ---------------------------------------------------------------

void CoreLogic::tile_receive(TileId tile, const fabric::Message& message) {
  const auto it = agents_.find(tile);
  if (it == agents_.end()) return;
  ReplicaAgent& agent = it->second;
  const auto& w = message.words;
  switch (message.type) {
    case MsgType::kExecute:
      agent.exec_buffer.emplace(w[0], std::make_pair(w[1], w[2] != 0));
      drain_execution(tile, agent);
      break;
    case MsgType::kCommit:
      agent.commit_buffer.emplace(w[0], LogEntry{w[0], w[1], w[2], w[3] != 0});
      drain_commits(tile, agent);
      break;
    case MsgType::kStateRequest:
      if (agent.state.size() >= w[1]) {
        answer_state_request(tile, agent, w[0], w[1]);
      } else {
        agent.waiting_requests.emplace_back(w[0], w[1]);
      }
      break;
    case MsgType::kCatchup: {
      const std::size_t committed = w[1];
      for (std::size_t i = 0; i < message.entries.size(); ++i) {
        const LogEntry& e = message.entries[i];
        if (i < committed) agent.commit_buffer.emplace(e.seq, e);
        agent.exec_buffer.emplace(e.seq, std::make_pair(e.op, false));
      }
      drain_execution(tile, agent);
      drain_commits(tile, agent);
      break;
    }
    default: break;
  }
}

void CoreLogic::drain_execution(TileId tile, ReplicaAgent& agent) {
  auto& buffer = agent.exec_buffer;
  while (!buffer.empty() && buffer.begin()->first <= agent.executed + 1) {
    const auto [seq, job] = *buffer.begin();
    buffer.erase(buffer.begin());
    if (seq <= agent.executed) continue;
    const std::uint64_t outcome = agent.machine.apply(job.first);
    agent.executed = seq;
    if (!job.second) continue;
    std::uint64_t answer = outcome;
    if (fabric_.tile(tile).health == fabric::Health::kCompromised) {
      answer = adversary_.respond(seq, outcome);
    }
    send(actor_of(tile), kCoreLogic, MsgType::kResponse, {seq, answer, 0, 0});
  }
}

void CoreLogic::drain_commits(TileId tile, ReplicaAgent& agent) {
  auto& buffer = agent.commit_buffer;
  while (!buffer.empty() && buffer.begin()->first <= agent.state.size() + 1) {
    const LogEntry entry = buffer.begin()->second;
    buffer.erase(buffer.begin());
    if (entry.seq <= agent.state.size()) continue;
    agent.state.append(entry);
  }
  auto& waiting = agent.waiting_requests;
  for (auto it = waiting.begin(); it != waiting.end();) {
    if (it->second <= agent.state.size()) {
      const auto [request, prefix] = *it;
      it = waiting.erase(it);
      answer_state_request(tile, agent, request, prefix);
    } else {
      ++it;
    }
  }
}

void CoreLogic::answer_state_request(TileId tile, ReplicaAgent& agent, std::uint64_t request,
                                     std::uint64_t prefix) {
  std::uint64_t digest = agent.state.digest_at(prefix);
  bool forged = false;
  if (fabric_.tile(tile).health == fabric::Health::kCompromised &&
      adversary_.lies_about_state(prefix)) {
    const auto& entries = agent.state.entries();
    if (prefix == 0) {
      digest = fold_digest(kEmptyDigest, adversary_.forge_entry(nullptr, prefix));
    } else {
      digest = fold_digest(agent.state.digest_at(prefix - 1),
                           adversary_.forge_entry(&entries[prefix - 1], prefix));
    }
    forged = true;
  }
  if (forged) forged_replies_.insert({request, tile});
  send(actor_of(tile), kCoreLogic, MsgType::kStateReply, {request, prefix, digest, 0});
}

}  // namespace rejuv::core
