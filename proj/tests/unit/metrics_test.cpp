#include <doctest.h>

#include <set>

#include "rejuv/cli/simulation.hpp"
#include "rejuv/metrics/audit.hpp"
#include "rejuv/metrics/report.hpp"
#include "rejuv/sim/error.hpp"
#include "rejuv/sim/rng.hpp"
#include "support.hpp"

using namespace rejuv;
using namespace rejuv::metrics;
using sim::RecordKind;
using sim::TraceRecord;

namespace {

class TraceBuilder {
 public:
  TraceBuilder& event(Tick tick, RecordKind kind, std::uint8_t sub, sim::Fields f, ActorId actor = 0) {
    current_seq_ = next_seq_++;
    push(tick, kind, sub, f, actor);
    return *this;
  }
  TraceBuilder& note(RecordKind kind, std::uint8_t sub, sim::Fields f) {
    push(last_tick_, kind, sub, f, 0);
    return *this;
  }
  TraceBuilder& response(Tick tick, std::uint32_t tile, std::uint64_t op_seq, std::uint64_t value) {
    return event(tick, RecordKind::kDeliver, static_cast<std::uint8_t>(sim::MsgType::kResponse),
                 {next_msg_++, tile, op_seq, value, 0, 0});
  }
  sim::Trace build() const { return trace_; }

 private:
  void push(Tick tick, RecordKind kind, std::uint8_t sub, sim::Fields f, ActorId actor) {
    TraceRecord r;
    r.tick = tick;
    r.seq = current_seq_;
    r.kind = kind;
    r.sub = sub;
    r.actor = actor;
    r.f = f;
    trace_.records.push_back(r);
    last_tick_ = tick;
  }

  sim::Trace trace_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t current_seq_ = 0;
  std::uint64_t next_msg_ = 1;
  Tick last_tick_ = 0;
};

constexpr std::uint8_t kNoSub = 0;

// Four replicas, three operations; tiles 4, 3 and 2 are compromised in turn,
// the third operation is decided wrongly by compromised votes only, and tile
// 4 is rejuvenated into tile 5.
sim::Trace three_op_fixture() {
  TraceBuilder b;
  for (std::uint32_t tile = 1; tile <= 4; ++tile) {
    b.event(tile * 10, RecordKind::kSpawnComplete, kNoSub, {tile, tile - 1, tile - 1})
        .note(RecordKind::kLaunch, kNoSub, {tile, tile - 1, 0});
  }
  b.event(50, RecordKind::kTimer, 1, {0}).note(RecordKind::kIssue, kNoSub, {1, 5, 4, 3});
  b.response(52, 1, 1, 5).response(52, 2, 1, 5).response(53, 3, 1, 5)
      .note(RecordKind::kDecide, kNoSub, {1, 5, 50, 3, 3});
  b.event(60, RecordKind::kAdversaryStep, kNoSub, {1}).note(RecordKind::kCompromise, kNoSub, {4, 3});
  b.event(70, RecordKind::kTimer, 1, {0}).note(RecordKind::kIssue, kNoSub, {2, 7, 4, 3});
  b.response(71, 4, 2, 99).response(72, 1, 2, 12).response(72, 2, 2, 12).response(73, 3, 2, 12)
      .note(RecordKind::kDecide, kNoSub, {2, 12, 70, 3, 3});
  b.event(80, RecordKind::kAdversaryStep, kNoSub, {1}).note(RecordKind::kCompromise, kNoSub, {3, 2});
  b.event(80, RecordKind::kSpawnComplete, kNoSub, {5, 1, 4});
  b.event(85, RecordKind::kAdversaryStep, kNoSub, {1}).note(RecordKind::kCompromise, kNoSub, {2, 1});
  b.event(90, RecordKind::kTimer, 1, {0}).note(RecordKind::kIssue, kNoSub, {3, 1, 4, 3});
  b.response(91, 3, 3, 50).response(92, 4, 3, 50).response(93, 2, 3, 50)
      .note(RecordKind::kDecide, kNoSub, {3, 50, 90, 3, 3});
  b.event(100, RecordKind::kTimer, 4, {1})
      .note(RecordKind::kDestroy, static_cast<std::uint8_t>(sim::DestroyReason::kRejuvenation), {4, 3, 3})
      .note(RecordKind::kLaunch, kNoSub, {5, 1, 3})
      .note(RecordKind::kRejuvenation, kNoSub, {4, 5, 60, 80, 95});
  return b.build();
}

}  // namespace

TEST_CASE("summary statistics use nearest-rank p95") {
  std::vector<std::uint64_t> sample;
  for (std::uint64_t i = 20; i >= 1; --i) sample.push_back(i);
  const Distribution d = summarize(sample);
  CHECK(d.count == 20);
  CHECK(d.min == 1);
  CHECK(d.max == 20);
  CHECK(d.mean == doctest::Approx(10.5));
  CHECK(d.p95 == 19);
  CHECK(summarize({7}).p95 == 7);
  CHECK(summarize({1, 2, 3, 4, 5, 6, 7, 8, 9, 100}).p95 == 100);
  CHECK(summarize({}).empty());
}

TEST_CASE("hand-built three-operation trace yields the expected report") {
  const auto report = check(three_op_fixture(), testing::small_scenario());

  CHECK(report.counts.ops_issued == 3);
  CHECK(report.counts.decided == 3);
  CHECK(report.counts.compromises == 3);
  CHECK(report.counts.rejuvenations == 1);

  const std::vector<QuorumViolation> expected = {
      {80, std::nullopt, ViolationKind::kInvariantBreach},
      {93, 3, ViolationKind::kWrongDecision},
      {93, 3, ViolationKind::kQuorumOfCompromised},
  };
  CHECK(report.violations == expected);
  CHECK(report.first_violation() == 80);

  CHECK(report.consensus_latency == Distribution{3, 3, 3.0, 3, 3});
  CHECK(report.rejuvenation_latency == Distribution{1, 40, 40.0, 40, 40});
  CHECK(report.state_update_time == Distribution{1, 15, 15.0, 15, 15});

  const std::vector<TimelinePoint> replicas = {{10, 1}, {20, 2}, {30, 3}, {40, 4}, {80, 5}, {100, 4}};
  CHECK(report.replica_count_timeline == replicas);
  const std::vector<TimelinePoint> compromised = {{60, 1}, {80, 2}, {85, 3}, {100, 2}};
  CHECK(report.compromise_timeline == compromised);
  CHECK(report.compromises_per_window == 3);
}

TEST_CASE("a compromised vote below the quorum is not a violation") {
  auto trace = three_op_fixture();
  // Cut the trace before tile 3 is compromised.
  std::erase_if(trace.records, [](const TraceRecord& r) { return r.tick >= 80; });
  const auto report = check(trace, testing::small_scenario());
  CHECK(report.violations.empty());
}

TEST_CASE("structured report lines") {
  const auto report = check(three_op_fixture(), testing::small_scenario());
  const std::string text = serialize_report(report);
  CHECK(text.rfind(R"({"type":"summary","records":)", 0) == 0);
  CHECK(text.find(R"("violations":3,"first_violation":80})") != std::string::npos);
  CHECK(text.find(R"({"type":"distribution","name":"consensus_latency","count":3,"min":3,"mean":3.000,"p95":3,"max":3})") !=
        std::string::npos);
  CHECK(text.find(R"({"type":"violation","kind":"InvariantBreach","tick":80,"op_seq":null})") != std::string::npos);
  CHECK(text.find(R"({"type":"compromises_per_window","window":1000,"max":3})") != std::string::npos);

  const RunReport empty = check(sim::Trace{}, testing::small_scenario());
  CHECK(serialize_report(empty).find(R"("name":"rejuvenation_latency","count":0,"summary":"n/a")") !=
        std::string::npos);
  CHECK(format_table(empty).find("n/a") != std::string::npos);
}

TEST_CASE("compare lists differing metrics") {
  const auto a = check(three_op_fixture(), testing::small_scenario());
  CHECK(compare(a, a).empty());
  RunReport b = a;
  b.counts.decided = 2;
  b.violations.pop_back();
  const std::string diff = compare(a, b);
  CHECK(diff.find("decided: 3 -> 2") != std::string::npos);
  CHECK(diff.find("violations: 3 -> 2") != std::string::npos);
}

TEST_CASE("sliding-window maximum agrees with brute force") {
  sim::Rng rng(8);
  for (int round = 0; round < 200; ++round) {
    std::vector<std::pair<Tick, Tick>> intervals;
    const auto count = rng.uniform(0, 8);
    for (int i = 0; i < count; ++i) {
      const auto from = static_cast<Tick>(rng.uniform(0, 200));
      intervals.emplace_back(from, from + static_cast<Tick>(rng.uniform(0, 60)));
    }
    const auto window = static_cast<Tick>(rng.uniform(1, 80));
    std::uint64_t brute = 0;
    for (Tick start = 0; start <= 300; ++start) {
      std::uint64_t hits = 0;
      for (const auto& [from, to] : intervals) {
        if (from < to && from <= start + window - 1 && to > start) ++hits;
      }
      brute = std::max(brute, hits);
    }
    CAPTURE(round);
    CHECK(max_in_window(intervals, window) == brute);
  }
}

TEST_CASE("out-of-order traces are malformed") {
  auto trace = three_op_fixture();
  std::swap(trace.records[0], trace.records[2]);
  CHECK_THROWS_AS(check(trace, testing::small_scenario()), Error);

  sim::Trace orphan;
  orphan.records.push_back(TraceRecord{5, 0, RecordKind::kIssue, 0, 0, {1, 1, 4, 3}});
  CHECK_THROWS_AS(check(orphan, testing::small_scenario()), Error);

  auto unknown = three_op_fixture();
  for (auto& r : unknown.records) {
    if (r.kind == RecordKind::kDecide) r.f[0] = 9;
  }
  CHECK_THROWS_AS(check(unknown, testing::small_scenario()), Error);
}

TEST_CASE("audit flags a forged rejuvenation shape") {
  auto s = testing::small_scenario(1500);
  s.trigger.policy = policies::Policy::kRandomDefault;
  auto trace = cli::run_scenario(s);
  CHECK(audit(trace, s).empty());

  for (auto& r : trace.records) {
    if (r.kind == RecordKind::kInstall) {
      r.f[2] ^= 1;  // digest no longer matches the committed prefix
      break;
    }
  }
  const auto findings = audit(trace, s);
  REQUIRE_FALSE(findings.empty());
  std::set<std::string> properties;
  for (const auto& f : findings) properties.insert(f.property);
  CHECK(properties.contains("state_transfer"));
  CHECK(format_findings(findings).find("state_transfer") != std::string::npos);
}

TEST_CASE("audit flags a send outside the delay bounds") {
  auto s = testing::small_scenario(400);
  auto trace = cli::run_scenario(s);
  for (auto& r : trace.records) {
    if (r.kind == RecordKind::kSend) {
      r.f[2] = 9;
      break;
    }
  }
  std::set<std::string> properties;
  for (const auto& f : audit(trace, s)) properties.insert(f.property);
  CHECK(properties.contains("bus_reliability"));
}
