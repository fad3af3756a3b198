#include "rejuv/metrics/report.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "rejuv/core/quorum.hpp"

namespace rejuv::metrics {

using sim::RecordKind;
using sim::TraceRecord;

namespace {

/// The reference application: a register that adds every operation to its
/// value and answers with the new value. Deliberately separate from the tile
/// execution path.
class ReferenceCounter {
 public:
  std::uint64_t apply(std::uint64_t op) {
    total_ += op;
    return total_;
  }

 private:
  std::uint64_t total_ = 0;
};

[[noreturn]] void malformed(const TraceRecord& r, std::string_view what) {
  throw Error(Errc::kMalformedTrace, fmt::format("record at tick {} seq {}: {}", r.tick, r.seq, what));
}

struct Response {
  TileId tile;
  std::uint64_t value;
  bool compromised;
};

class Checker {
 public:
  explicit Checker(const cli::Scenario& scenario)
      : scenario_(scenario), q_(scenario.quorum.q()), mode_(scenario.quorum.mode) {}

  RunReport run(const sim::Trace& trace) {
    report_.window = scenario_.adversary.reference_window;
    report_.counts.records = trace.records.size();
    const TraceRecord* previous = nullptr;
    bool open = false;
    for (const TraceRecord& r : trace.records) {
      if (previous && (r.tick < previous->tick || (r.tick == previous->tick && r.seq < previous->seq))) {
        malformed(r, "records out of (tick, seq) order");
      }
      if (sim::is_event_kind(r.kind)) {
        if (open) end_event(*previous);
        open = true;
      } else if (!open) {
        malformed(r, "annotation before any event");
      }
      apply(r);
      previous = &r;
    }
    if (open) end_event(*previous);

    const Tick end = scenario_.horizon + 1;
    std::vector<std::pair<Tick, Tick>> intervals = closed_intervals_;
    for (const auto& [tile, since] : compromised_since_) intervals.emplace_back(since, end);
    report_.compromises_per_window = max_in_window(intervals, report_.window);

    report_.rejuvenation_latency = summarize(std::move(rejuv_latency_));
    report_.consensus_latency = summarize(std::move(consensus_latency_));
    report_.state_update_time = summarize(std::move(state_update_));
    return std::move(report_);
  }

 private:
  void apply(const TraceRecord& r) {
    const auto& f = r.f;
    auto& counts = report_.counts;
    switch (r.kind) {
      case RecordKind::kSpawnComplete:
        alive_.insert(TileId{static_cast<std::uint32_t>(f[0])});
        break;
      case RecordKind::kDestroy: {
        const TileId tile{static_cast<std::uint32_t>(f[0])};
        if (!alive_.erase(tile)) malformed(r, "destroy of a tile that is not running");
        launched_.erase(tile);
        if (const auto it = compromised_since_.find(tile); it != compromised_since_.end()) {
          closed_intervals_.emplace_back(it->second, r.tick);
          compromised_since_.erase(it);
        }
        break;
      }
      case RecordKind::kLaunch:
        launched_.insert(TileId{static_cast<std::uint32_t>(f[0])});
        break;
      case RecordKind::kCompromise: {
        const TileId tile{static_cast<std::uint32_t>(f[0])};
        if (!alive_.contains(tile)) malformed(r, "compromise of a tile that is not running");
        compromised_since_.emplace(tile, r.tick);
        ++counts.compromises;
        break;
      }
      case RecordKind::kCrack: ++counts.cracks; break;
      case RecordKind::kResize:
        q_ = core::quorum_size(static_cast<int>(f[1]), mode_);
        ++counts.resizes;
        break;
      case RecordKind::kResizeError: ++counts.resize_errors; break;
      case RecordKind::kIssue: {
        if (f[0] != reference_.size() + 1) malformed(r, "op_seq out of order");
        reference_.push_back(counter_.apply(f[1]));
        ++counts.ops_issued;
        break;
      }
      case RecordKind::kSend: ++counts.messages; break;
      case RecordKind::kDrop: ++counts.drops; break;
      case RecordKind::kDeliver:
        if (r.sub == static_cast<std::uint8_t>(sim::MsgType::kResponse) && r.actor == kCoreLogic) {
          const TileId tile{static_cast<std::uint32_t>(f[1])};
          responses_[f[2]].push_back(Response{tile, f[3], compromised_since_.contains(tile)});
        }
        break;
      case RecordKind::kDecide: on_decide(r); break;
      case RecordKind::kUnreachable:
        responses_.erase(f[0]);
        ++counts.unreachable;
        break;
      case RecordKind::kInsufficient: ++counts.insufficient; break;
      case RecordKind::kRejuvRequest:
        if (r.sub == static_cast<std::uint8_t>(sim::Origin::kReactive)) ++counts.reactive_requests;
        break;
      case RecordKind::kRejuvenation:
        // fields: retired, new_tile, requested_at, spawned_at, transferred_at; launched at r.tick
        if (!(f[2] <= f[3] && f[3] <= f[4] && f[4] <= r.tick)) malformed(r, "rejuvenation timestamps out of order");
        rejuv_latency_.push_back(r.tick - f[2]);
        state_update_.push_back(f[4] - f[3]);
        ++counts.rejuvenations;
        break;
      case RecordKind::kRejuvAbort: ++counts.rejuv_aborts; break;
      default: break;
    }
  }

  void on_decide(const TraceRecord& r) {
    const std::uint64_t op_seq = r.f[0];
    const std::uint64_t outcome = r.f[1];
    const Tick issued_at = r.f[2];
    const auto q = r.f[3];
    if (op_seq == 0 || op_seq > reference_.size()) malformed(r, "decide for an operation never issued");
    if (issued_at > r.tick) malformed(r, "decided before issue");
    ++report_.counts.decided;
    consensus_latency_.push_back(r.tick - issued_at);
    if (outcome != reference_[op_seq - 1]) {
      report_.violations.push_back({r.tick, op_seq, ViolationKind::kWrongDecision});
    }
    std::map<std::uint64_t, std::uint64_t> compromised_votes;
    for (const Response& response : responses_[op_seq]) {
      if (response.compromised) ++compromised_votes[response.value];
    }
    for (const auto& [value, votes] : compromised_votes) {
      if (votes >= q) {
        report_.violations.push_back({r.tick, op_seq, ViolationKind::kQuorumOfCompromised});
        break;
      }
    }
    responses_.erase(op_seq);
  }

  void end_event(const TraceRecord& last) {
    const std::uint64_t running = alive_.size();
    if (report_.replica_count_timeline.empty() || report_.replica_count_timeline.back().value != running) {
      report_.replica_count_timeline.push_back({last.tick, running});
    }
    const std::uint64_t compromised = compromised_since_.size();
    if (report_.compromise_timeline.empty() ? compromised != 0
                                            : report_.compromise_timeline.back().value != compromised) {
      report_.compromise_timeline.push_back({last.tick, compromised});
    }

    std::size_t bad = 0;
    for (TileId tile : launched_) bad += compromised_since_.contains(tile) ? 1 : 0;
    const bool breached = bad > 0 && launched_.size() - bad < static_cast<std::size_t>(q_);
    if (breached && !in_breach_) report_.violations.push_back({last.tick, std::nullopt, ViolationKind::kInvariantBreach});
    in_breach_ = breached;
  }

  const cli::Scenario& scenario_;
  int q_;
  core::QuorumMode mode_;
  RunReport report_;

  std::set<TileId> alive_;
  std::set<TileId> launched_;
  std::map<TileId, Tick> compromised_since_;
  std::vector<std::pair<Tick, Tick>> closed_intervals_;
  bool in_breach_ = false;

  ReferenceCounter counter_;
  std::vector<std::uint64_t> reference_;  // outcome by op_seq - 1
  std::unordered_map<std::uint64_t, std::vector<Response>> responses_;

  std::vector<std::uint64_t> rejuv_latency_;
  std::vector<std::uint64_t> consensus_latency_;
  std::vector<std::uint64_t> state_update_;
};

std::string dist_json(std::string_view name, const Distribution& d) {
  if (d.empty()) return fmt::format(R"({{"type":"distribution","name":"{}","count":0,"summary":"n/a"}})", name);
  return fmt::format(R"({{"type":"distribution","name":"{}","count":{},"min":{},"mean":{:.3f},"p95":{},"max":{}}})",
                     name, d.count, d.min, d.mean, d.p95, d.max);
}

std::string dist_text(const Distribution& d) {
  if (d.empty()) return "n/a";
  return fmt::format("n={} min={} mean={:.3f} p95={} max={}", d.count, d.min, d.mean, d.p95, d.max);
}

}  // namespace

Distribution summarize(std::vector<std::uint64_t> sample) {
  Distribution d;
  if (sample.empty()) return d;
  std::sort(sample.begin(), sample.end());
  d.count = sample.size();
  d.min = sample.front();
  d.max = sample.back();
  long double sum = 0;
  for (std::uint64_t v : sample) sum += static_cast<long double>(v);
  d.mean = static_cast<double>(sum / static_cast<long double>(sample.size()));
  const std::size_t rank = (95 * sample.size() + 99) / 100;  // ceil(0.95 n)
  d.p95 = sample[rank - 1];
  return d;
}

std::string_view violation_name(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::kWrongDecision: return "WrongDecision";
    case ViolationKind::kQuorumOfCompromised: return "QuorumOfCompromised";
    case ViolationKind::kInvariantBreach: return "InvariantBreach";
  }
  return "?";
}

std::optional<Tick> RunReport::first_violation() const {
  std::optional<Tick> first;
  for (const auto& v : violations) {
    if (!first || v.tick < *first) first = v.tick;
  }
  return first;
}

std::uint64_t max_in_window(const std::vector<std::pair<Tick, Tick>>& intervals, Tick window) {
  // Interval [c, e) meets window [s, s + W - 1] for s in [c - W + 1, e - 1].
  std::vector<std::pair<std::int64_t, int>> edges;
  for (const auto& [from, to] : intervals) {
    if (to <= from) continue;
    const std::int64_t first = std::max<std::int64_t>(0, static_cast<std::int64_t>(from) - static_cast<std::int64_t>(window) + 1);
    const std::int64_t last = static_cast<std::int64_t>(to) - 1;
    edges.emplace_back(first, +1);
    edges.emplace_back(last + 1, -1);
  }
  std::sort(edges.begin(), edges.end());  // -1 sorts before +1 at the same start
  std::int64_t running = 0;
  std::int64_t best = 0;
  for (const auto& [at, delta] : edges) {
    running += delta;
    best = std::max(best, running);
  }
  return static_cast<std::uint64_t>(best);
}

RunReport check(const sim::Trace& trace, const cli::Scenario& scenario) {
  return Checker(scenario).run(trace);
}

std::string serialize_report(const RunReport& report) {
  const auto& c = report.counts;
  std::string out;
  out += fmt::format(
      R"({{"type":"summary","records":{},"ops_issued":{},"decided":{},"unreachable":{},"insufficient":{},"rejuvenations":{},"rejuv_aborts":{},"reactive_requests":{},"cracks":{},"compromises":{},"resizes":{},"resize_errors":{},"messages":{},"drops":{},"violations":{},"first_violation":{}}})",
      c.records, c.ops_issued, c.decided, c.unreachable, c.insufficient, c.rejuvenations, c.rejuv_aborts,
      c.reactive_requests, c.cracks, c.compromises, c.resizes, c.resize_errors, c.messages, c.drops,
      report.violations.size(), report.first_violation() ? fmt::format("{}", *report.first_violation()) : "null");
  out += '\n';
  out += dist_json("rejuvenation_latency", report.rejuvenation_latency) + '\n';
  out += dist_json("consensus_latency", report.consensus_latency) + '\n';
  out += dist_json("state_update_time", report.state_update_time) + '\n';
  out += fmt::format(R"({{"type":"compromises_per_window","window":{},"max":{}}})", report.window,
                     report.compromises_per_window);
  out += '\n';
  for (const auto& p : report.replica_count_timeline) {
    out += fmt::format(R"({{"type":"replica_count","tick":{},"running":{}}})", p.tick, p.value) + '\n';
  }
  for (const auto& p : report.compromise_timeline) {
    out += fmt::format(R"({{"type":"compromised","tick":{},"running":{}}})", p.tick, p.value) + '\n';
  }
  for (const auto& v : report.violations) {
    out += fmt::format(R"({{"type":"violation","kind":"{}","tick":{},"op_seq":{}}})", violation_name(v.kind), v.tick,
                       v.op_seq ? fmt::format("{}", *v.op_seq) : "null");
    out += '\n';
  }
  return out;
}

std::string format_table(const RunReport& report) {
  const auto& c = report.counts;
  std::string out;
  out += fmt::format("{:<24} {}\n", "records", c.records);
  out += fmt::format("{:<24} {} issued, {} decided, {} unreachable, {} refused\n", "operations", c.ops_issued,
                     c.decided, c.unreachable, c.insufficient);
  out += fmt::format("{:<24} {} completed, {} aborted, {} reactive requests\n", "rejuvenations", c.rejuvenations,
                     c.rejuv_aborts, c.reactive_requests);
  out += fmt::format("{:<24} {} cracks, {} compromises\n", "adversary", c.cracks, c.compromises);
  out += fmt::format("{:<24} {} applied, {} refused\n", "resizes", c.resizes, c.resize_errors);
  out += fmt::format("{:<24} {}\n", "rejuvenation latency", dist_text(report.rejuvenation_latency));
  out += fmt::format("{:<24} {}\n", "consensus latency", dist_text(report.consensus_latency));
  out += fmt::format("{:<24} {}\n", "state update time", dist_text(report.state_update_time));
  out += fmt::format("{:<24} {} (window {})\n", "compromised per window", report.compromises_per_window,
                     report.window);
  constexpr std::size_t kShown = 12;
  const auto& timeline = report.replica_count_timeline;
  std::string counts;
  for (std::size_t i = 0; i < timeline.size() && i < kShown; ++i) {
    counts += fmt::format(" {}@{}", timeline[i].value, timeline[i].tick);
  }
  if (timeline.size() > kShown) counts += fmt::format(" ... ({} changes)", timeline.size());
  out += fmt::format("{:<24}{}\n", "running replicas", counts.empty() ? " -" : counts);
  out += fmt::format("{:<24} {}\n", "violations", report.violations.size());
  constexpr std::size_t kListed = 20;
  for (std::size_t i = 0; i < report.violations.size() && i < kListed; ++i) {
    const auto& v = report.violations[i];
    out += fmt::format("  {:<22} tick {}{}\n", violation_name(v.kind), v.tick,
                       v.op_seq ? fmt::format(" op_seq {}", *v.op_seq) : "");
  }
  if (report.violations.size() > kListed) {
    out += fmt::format("  ... {} more in the structured report\n", report.violations.size() - kListed);
  }
  return out;
}

std::string compare(const RunReport& a, const RunReport& b) {
  std::string out;
  auto line = [&](std::string_view name, const auto& x, const auto& y) {
    if (x != y) out += fmt::format("{}: {} -> {}\n", name, x, y);
  };
  auto dist = [&](std::string_view name, const Distribution& x, const Distribution& y) {
    line(fmt::format("{}.count", name), x.count, y.count);
    if (x.empty() || y.empty()) return;
    line(fmt::format("{}.min", name), x.min, y.min);
    line(fmt::format("{}.mean", name), fmt::format("{:.3f}", x.mean), fmt::format("{:.3f}", y.mean));
    line(fmt::format("{}.p95", name), x.p95, y.p95);
    line(fmt::format("{}.max", name), x.max, y.max);
  };
  line("ops_issued", a.counts.ops_issued, b.counts.ops_issued);
  line("decided", a.counts.decided, b.counts.decided);
  line("unreachable", a.counts.unreachable, b.counts.unreachable);
  line("rejuvenations", a.counts.rejuvenations, b.counts.rejuvenations);
  line("rejuv_aborts", a.counts.rejuv_aborts, b.counts.rejuv_aborts);
  line("cracks", a.counts.cracks, b.counts.cracks);
  line("compromises", a.counts.compromises, b.counts.compromises);
  line("violations", a.violations.size(), b.violations.size());
  line("compromises_per_window", a.compromises_per_window, b.compromises_per_window);
  dist("rejuvenation_latency", a.rejuvenation_latency, b.rejuvenation_latency);
  dist("consensus_latency", a.consensus_latency, b.consensus_latency);
  dist("state_update_time", a.state_update_time, b.state_update_time);
  return out;
}

}  // namespace rejuv::metrics
