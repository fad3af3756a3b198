// Acceptance suite. Prints one PASS/FAIL line per criterion, exits 1 if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/core.h>

#include "rejuv/cli/commands.hpp"
#include "rejuv/cli/simulation.hpp"
#include "rejuv/cli/trace_file.hpp"
#include "rejuv/core/quorum.hpp"
#include "rejuv/metrics/audit.hpp"
#include "rejuv/metrics/report.hpp"

namespace fs = std::filesystem;
using namespace rejuv;
using sim::RecordKind;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

cli::Scenario shipped(const std::string& name) {
  return cli::load_scenario(fs::path(REJUV_SCENARIO_DIR) / (name + ".json"));
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct NamedTrace {
  std::string label;
  cli::Scenario scenario;
  sim::Trace trace;
};

// Traces shared between criteria: A2 feeds A4 and A5, A3 feeds A4 and A5.
std::vector<NamedTrace> g_traces;

// Sequential counter reference: outcome of op k is the sum of the first k operands.
std::map<std::uint64_t, std::uint64_t> reference_outcomes(const sim::Trace& trace) {
  std::map<std::uint64_t, std::uint64_t> outcomes;
  std::uint64_t sum = 0;
  for (const auto& r : trace.records) {
    if (r.kind != RecordKind::kIssue) continue;
    sum += r.f[1];
    outcomes[r.f[0]] = sum;
  }
  return outcomes;
}

Outcome a1_quorum_math() {
  Outcome o;
  for (int t = 0; t <= 10; ++t) {
    if (core::required_replicas(t, core::QuorumMode::kClassic) != 3 * t + 1 ||
        core::quorum_size(t, core::QuorumMode::kClassic) != 2 * t + 1 ||
        core::required_replicas(t, core::QuorumMode::kHybrid) != 2 * t + 1 ||
        core::quorum_size(t, core::QuorumMode::kHybrid) != t + 1) {
      o.fail(fmt::format("mismatch at t={}", t));
    }
  }
  if (o.pass) o.detail = "t in [0,10], classic and hybrid exact";
  return o;
}

// Hand-rolled accumulation: boot spawns are served FIFO on one port from tick
// 0; each template is studied one tick per running tile, starting the tick
// after the tile becomes ready; tiles fall exploit_latency after the crack.
// Returns the tick at which more than t tiles are compromised.
std::optional<Tick> exhaustion_oracle(const cli::Scenario& s) {
  const auto n = static_cast<std::size_t>(s.quorum.n());
  const std::uint64_t bandwidth =
      s.ports.use == fabric::PortKind::kIcap ? s.ports.icap_bandwidth : s.ports.pcap_bandwidth;
  std::vector<Tick> ready(n);
  std::vector<std::size_t> tmpl(n);
  Tick port_free = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tmpl[i] = i % s.templates.size();
    const std::uint64_t size = s.templates[tmpl[i]].bitstream_size;
    port_free += static_cast<Tick>((size + bandwidth - 1) / bandwidth);
    ready[i] = port_free;
  }
  std::vector<Tick> study(s.templates.size(), 0);
  std::vector<std::optional<Tick>> cracked(s.templates.size());
  std::vector<Tick> fallen;
  for (Tick now = 1; now <= s.horizon; ++now) {
    for (std::size_t i = 0; i < n; ++i) {
      if (ready[i] < now && !cracked[tmpl[i]]) ++study[tmpl[i]];
    }
    for (std::size_t k = 0; k < s.templates.size(); ++k) {
      if (!cracked[k] && study[k] > 0 && study[k] >= s.templates[k].analysis_threshold) cracked[k] = now;
    }
    std::size_t down = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (cracked[tmpl[i]] && now >= *cracked[tmpl[i]] + s.templates[tmpl[i]].exploit_latency) ++down;
    }
    if (down > static_cast<std::size_t>(s.quorum.t)) return now;
  }
  return std::nullopt;
}

Outcome a2_exhaustion_vs_outpacing() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();

  const cli::Scenario exhaustion = shipped("exhaustion");
  sim::Trace exhausted = cli::run_scenario(exhaustion);
  const auto report = metrics::check(exhausted, exhaustion);
  const auto expected = exhaustion_oracle(exhaustion);
  const auto first = report.first_violation();
  if (!expected) o.fail("oracle predicts no violation");
  if (!first) o.fail("no violation with rejuvenation disabled");
  Tick gap = 0;
  if (expected && first) {
    gap = *first > *expected ? *first - *expected : *expected - *first;
    if (gap > 1) o.fail(fmt::format("first violation at {} but oracle says {}", *first, *expected));
  }
  g_traces.push_back({"exhaustion", exhaustion, std::move(exhausted)});

  const cli::Scenario outpacing = shipped("outpacing");
  constexpr std::uint64_t kSeeds = 30;
  std::uint64_t violations = 0;
  std::uint64_t compromises = 0;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    cli::Scenario s = outpacing;
    s.seed = seed;
    sim::Trace trace = cli::run_scenario(s);
    const auto r = metrics::check(trace, s);
    violations += r.violations.size();
    compromises += r.counts.compromises;
    g_traces.push_back({fmt::format("outpacing seed {}", seed), s, std::move(trace)});
  }
  if (violations) o.fail(fmt::format("{} violations under random rejuvenation", violations));
  if (compromises) o.fail(fmt::format("{} compromises under random rejuvenation", compromises));
  const double elapsed = seconds_since(start);
  if (elapsed >= 10.0) o.fail(fmt::format("took {:.2f} s", elapsed));
  if (o.pass) {
    o.detail = fmt::format("(a) first violation {} at tick {}, oracle {}; (b) {} seeds clean; {:.2f} s",
                           metrics::violation_name(report.violations.front().kind), *first, *expected, kSeeds,
                           elapsed);
  }
  return o;
}

Outcome a3_determinism() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir = fs::temp_directory_path() / fmt::format("rejuv-acceptance-{}", ::getpid());
  fs::create_directories(dir);
  int runs = 0;
  for (const std::string name : {"default", "periodic", "reactive"}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      cli::Scenario s = shipped(name);
      s.seed = seed;
      sim::Trace first = cli::run_scenario(s);
      const std::string a = cli::serialize_trace(s, first);
      const std::string b = cli::serialize_trace(s, cli::run_scenario(s));
      if (a != b) o.fail(fmt::format("{} seed {} differs between runs", name, seed));
      const fs::path file = dir / fmt::format("{}-{}.jsonl", name, seed);
      cli::write_file(file, a);
      std::ostringstream out, err;
      const int code = cli::cmd_replay(file, out, err);
      if (code != cli::kExitOk) o.fail(fmt::format("replay of {} seed {} exited {}", name, seed, code));
      g_traces.push_back({fmt::format("{} seed {}", name, seed), s, std::move(first)});
      ++runs;
    }
  }
  fs::remove_all(dir);
  const double elapsed = seconds_since(start);
  if (elapsed >= 10.0) o.fail(fmt::format("took {:.2f} s", elapsed));
  if (o.pass) o.detail = fmt::format("{} scenario/seed pairs identical, replay exit 0; {:.2f} s", runs, elapsed);
  return o;
}

Outcome a4_oracle_equivalence() {
  Outcome o;
  std::uint64_t checked = 0;
  for (const auto& [label, scenario, trace] : g_traces) {
    if (label == "exhaustion") continue;  // compromise exceeds t there by construction
    const auto reference = reference_outcomes(trace);
    for (const auto& r : trace.records) {
      if (r.kind != RecordKind::kDecide) continue;
      const auto it = reference.find(r.f[0]);
      if (it == reference.end() || it->second != r.f[1]) {
        o.fail(fmt::format("{}: op {} decided {}", label, r.f[0], r.f[1]));
      }
      ++checked;
    }
  }

  // Every arrival order of 4 responses over 3 values, against a counter.
  int exhaustive = 0;
  for (int code = 0; code < 81; ++code) {
    std::array<std::uint64_t, 4> arrivals{};
    for (int i = 0, c = code; i < 4; ++i, c /= 3) arrivals[i] = static_cast<std::uint64_t>(c % 3);
    std::optional<std::uint64_t> expected;
    std::array<int, 3> tally{};
    for (auto v : arrivals) {
      if (++tally[v] == 3 && !expected) expected = v;
    }
    if (core::match_outcomes(arrivals, 3) != expected) o.fail(fmt::format("matching rule differs for code {}", code));
    ++exhaustive;
  }
  if (o.pass) o.detail = fmt::format("{} decisions match; {} response sequences match", checked, exhaustive);
  return o;
}

Outcome a5_rejuvenation_shape() {
  Outcome o;
  const std::set<std::string> relevant = {"rejuvenation_shape", "state_transfer", "replica_count"};
  std::uint64_t rejuvenations = 0;
  for (const auto& [label, scenario, trace] : g_traces) {
    for (const auto& f : metrics::audit(trace, scenario)) {
      if (relevant.contains(f.property)) o.fail(fmt::format("{}: {} at {}: {}", label, f.property, f.tick, f.detail));
    }
    for (const auto& r : trace.records) rejuvenations += r.kind == RecordKind::kRejuvenation ? 1 : 0;
  }
  if (rejuvenations == 0) o.fail("no rejuvenations to check");
  if (o.pass) o.detail = fmt::format("{} rejuvenations over {} traces", rejuvenations, g_traces.size());
  return o;
}

Outcome a6_diversity() {
  Outcome o;
  sim::Engine engine(2024);
  fabric::Fabric fabric(engine, 5, 20, 100);
  for (const char* id : {"rv32-a", "rv32-b", "mb-c", "leon-d"}) fabric.register_template({id, "riscv", 1000, 200, 50});
  fabric::Bus bus(engine, fabric, fabric::BusModel{1, 3, 1000});
  adversary::Adversary adversary(adversary::AdversaryConfig{}, 4, 2024);
  core::CoreLogic core(engine, fabric, bus, adversary, core::QuorumConfig{}, fabric::PortKind::kIcap);

  constexpr int kDraws = 10000;
  constexpr std::uint32_t kExcluded = 1;
  std::array<int, 4> counts{};
  for (int i = 0; i < kDraws; ++i) ++counts.at(core.select_template(TemplateIndex{kExcluded}).value);
  if (counts[kExcluded] != 0) o.fail("excluded template selected");
  std::string freqs;
  for (std::uint32_t k = 0; k < 4; ++k) {
    if (k == kExcluded) continue;
    const double freq = counts[k] / static_cast<double>(kDraws);
    freqs += fmt::format(" {:.4f}", freq);
    if (freq < 0.30 || freq > 0.37) o.fail(fmt::format("template {} frequency {:.4f}", k, freq));
  }
  if (o.pass) o.detail = "frequencies" + freqs;
  return o;
}

Outcome a7_port_ordering() {
  Outcome o;
  std::map<std::string, double> mean_latency;
  for (const auto& [name, expected] : {std::pair<std::string, Tick>{"icap", 10}, {"pcap", 50}}) {
    const cli::Scenario s = shipped(name);
    const sim::Trace trace = cli::run_scenario(s);
    std::uint64_t spawns = 0;
    for (const auto& r : trace.records) {
      if (r.kind != RecordKind::kSpawn) continue;
      ++spawns;
      // f = {tile, template, pblock, port, start, ready}
      if (r.f[5] - r.f[4] != expected) {
        o.fail(fmt::format("{} spawn of tile {} took {}", name, r.f[0], r.f[5] - r.f[4]));
      }
    }
    const auto report = metrics::check(trace, s);
    if (report.rejuvenation_latency.empty()) o.fail(name + " has no rejuvenations");
    mean_latency[name] = report.rejuvenation_latency.mean;
    if (spawns == 0) o.fail(name + " has no spawns");
  }
  if (!(mean_latency["icap"] < mean_latency["pcap"])) {
    o.fail(fmt::format("mean rejuvenation latency icap {:.1f} >= pcap {:.1f}", mean_latency["icap"],
                       mean_latency["pcap"]));
  }
  if (o.pass) {
    o.detail = fmt::format("spawns 10 vs 50 ticks; mean rejuvenation latency icap {:.1f} < pcap {:.1f}",
                           mean_latency["icap"], mean_latency["pcap"]);
  }
  return o;
}

// Launched-tile bookkeeping over a trace.
struct Roster {
  std::map<std::uint64_t, Tick> launched_at;  // running tiles
  std::size_t peak = 0;

  void apply(const sim::TraceRecord& r) {
    if (r.kind == RecordKind::kLaunch) launched_at[r.f[0]] = r.tick;
    if (r.kind == RecordKind::kDestroy) launched_at.erase(r.f[0]);
    peak = std::max(peak, launched_at.size());
  }
};

Outcome a8_resizing() {
  Outcome o;
  constexpr Tick kScaleOut = 2000;

  // Scale out with enough free pblocks, then back in.
  cli::Scenario s = shipped("resize");
  s.trigger.policy = policies::Policy::kNone;  // the fabric only changes through resizing
  const sim::Trace trace = cli::run_scenario(s);
  std::optional<Tick> scale_in;
  for (const auto& r : trace.records) {
    if (r.kind == RecordKind::kResize && r.f[0] == 2 && r.f[1] == 1) scale_in = r.tick;
  }
  Roster roster;
  std::vector<std::uint64_t> expected_victims;
  std::vector<std::uint64_t> victims;
  std::uint64_t other_destroys = 0;
  for (const auto& r : trace.records) {
    if (scale_in && r.tick >= *scale_in && expected_victims.empty()) {
      // Most exposed first: earliest launch, ties to the lower tile id.
      std::vector<std::pair<Tick, std::uint64_t>> order;
      for (const auto& [tile, at] : roster.launched_at) order.emplace_back(at, tile);
      std::sort(order.begin(), order.end());
      for (std::size_t i = 0; i < 3 && i < order.size(); ++i) expected_victims.push_back(order[i].second);
      std::sort(expected_victims.begin(), expected_victims.end());
    }
    if (r.kind == RecordKind::kDestroy) {
      if (r.sub == static_cast<std::uint8_t>(sim::DestroyReason::kScaleIn)) {
        victims.push_back(r.f[0]);
      } else {
        ++other_destroys;
      }
    }
    roster.apply(r);
  }
  std::sort(victims.begin(), victims.end());
  if (roster.peak != 7) o.fail(fmt::format("scale-out peaked at {} tiles", roster.peak));
  if (other_destroys) o.fail(fmt::format("{} destroys besides the scale-in", other_destroys));
  if (!scale_in) o.fail("no scale-in resize");
  if (victims.size() != 3 || victims != expected_victims) o.fail("scale-in victims differ from exposure order");
  if (roster.launched_at.size() != 4) o.fail(fmt::format("{} tiles after scale-in", roster.launched_at.size()));

  // Scale out with only two free pblocks.
  const cli::Scenario tight = shipped("resize_short");
  const sim::Trace refused = cli::run_scenario(tight);
  Roster tight_roster;
  bool errored = false;
  for (const auto& r : refused.records) {
    tight_roster.apply(r);
    if (r.kind == RecordKind::kResizeError && r.tick == kScaleOut &&
        r.sub == static_cast<std::uint8_t>(sim::ResizeError::kNoFreePblock)) {
      errored = true;
    }
    if (r.kind == RecordKind::kResize && r.tick >= kScaleOut) o.fail("resize applied without free pblocks");
  }
  if (!errored) o.fail("no no_free_pblock error");
  if (tight_roster.peak != 4 || tight_roster.launched_at.size() != 4) o.fail("replica count changed without room");

  if (o.pass) {
    o.detail = fmt::format("n 4 -> 7 with 0 destroys; no_free_pblock keeps n=4; scale-in retired tiles {}, {}, {}",
                           victims[0], victims[1], victims[2]);
  }
  return o;
}

Outcome a9_reactive() {
  Outcome o;
  const cli::Scenario s = shipped("reactive");
  const sim::Trace trace = cli::run_scenario(s);
  const auto reference = reference_outcomes(trace);
  const Tick round = 2 * s.bus.d_max + 1;

  std::map<std::uint64_t, Tick> first_divergence;
  std::map<std::uint64_t, Tick> requested;
  std::map<std::uint64_t, Tick> completed;
  for (const auto& r : trace.records) {
    if (r.kind == RecordKind::kDeliver && r.sub == static_cast<std::uint8_t>(sim::MsgType::kResponse)) {
      // f = {msg, from, op_seq, outcome}
      const auto it = reference.find(r.f[2]);
      if (it != reference.end() && it->second != r.f[3]) first_divergence.emplace(r.f[1], r.tick);
    }
    if (r.kind == RecordKind::kRejuvRequest && r.sub == static_cast<std::uint8_t>(sim::Origin::kReactive)) {
      requested.emplace(r.f[0], r.tick);
    }
    if (r.kind == RecordKind::kRejuvenation) completed.emplace(r.f[0], r.tick);
  }
  if (first_divergence.empty()) o.fail("no divergent responses");
  Tick worst_request = 0;
  Tick worst_completion = 0;
  for (const auto& [tile, at] : first_divergence) {
    const auto req = requested.find(tile);
    if (req == requested.end()) {
      o.fail(fmt::format("tile {} diverged at {} but was never targeted", tile, at));
      continue;
    }
    worst_request = std::max(worst_request, req->second - at);
    if (req->second - at > round) o.fail(fmt::format("tile {} targeted {} ticks after divergence", tile, req->second - at));
    const auto done = completed.find(tile);
    if (done == completed.end()) {
      if (req->second + 1000 < s.horizon) o.fail(fmt::format("tile {} never rejuvenated", tile));
      continue;
    }
    worst_completion = std::max(worst_completion, done->second - at);
  }

  const cli::Scenario silent = shipped("reactive_silent");
  const auto silent_report = metrics::check(cli::run_scenario(silent), silent);
  if (silent_report.counts.reactive_requests != 0) {
    o.fail(fmt::format("{} reactive requests against a silent adversary", silent_report.counts.reactive_requests));
  }
  if (silent_report.counts.compromises == 0) o.fail("silent adversary compromised nothing");
  if (o.pass) {
    o.detail = fmt::format(
        "{} divergent tiles targeted within {} ticks (bound {}), rejuvenated within {}; silent: 0 reactive, {} compromises",
        first_divergence.size(), worst_request, round, worst_completion, silent_report.counts.compromises);
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"A1", a1_quorum_math},        {"A2", a2_exhaustion_vs_outpacing}, {"A3", a3_determinism},
      {"A4", a4_oracle_equivalence}, {"A5", a5_rejuvenation_shape},     {"A6", a6_diversity},
      {"A7", a7_port_ordering},      {"A8", a8_resizing},               {"A9", a9_reactive},
  };
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::printf("%s %s %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
