#include "rejuv/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <ostream>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "rejuv/cli/scenario.hpp"
#include "rejuv/cli/simulation.hpp"
#include "rejuv/cli/trace_file.hpp"
#include "rejuv/metrics/report.hpp"

namespace rejuv::cli {

namespace fs = std::filesystem;

namespace {

struct SeedResult {
  std::uint64_t seed = 0;
  std::size_t violations = 0;
  std::optional<Tick> first_violation;
  std::string error;
};

SeedResult run_one(Scenario scenario, const fs::path& dir, std::string* table) {
  SeedResult result{scenario.seed, 0, std::nullopt, {}};
  try {
    const sim::Trace trace = run_scenario(scenario);
    const metrics::RunReport report = metrics::check(trace, scenario);
    fs::create_directories(dir);
    const fs::path trace_path = dir / "trace.jsonl";
    write_file(trace_path, serialize_trace(scenario, trace));
    write_file(report_path_for(trace_path), metrics::serialize_report(report));
    result.violations = report.violations.size();
    result.first_violation = report.first_violation();
    if (table) *table = metrics::format_table(report);
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  return result;
}

}  // namespace

fs::path report_path_for(const fs::path& trace) {
  fs::path path = trace;
  path.replace_extension();
  path += ".report.jsonl";
  return path;
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  Scenario scenario;
  try {
    scenario = load_scenario(options.scenario);
    if (options.seed) scenario.seed = *options.seed;
    if (options.horizon) scenario.horizon = *options.horizon;
    validate(scenario);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  if (options.seeds == 0) {
    err << "error: --seeds must be at least 1\n";
    return kExitError;
  }

  if (options.seeds == 1) {
    std::string table;
    const SeedResult result = run_one(scenario, options.out, &table);
    if (!result.error.empty()) {
      err << "error: " << result.error << '\n';
      return kExitError;
    }
    out << table;
    out << fmt::format("trace: {}\n", (options.out / "trace.jsonl").string());
    return result.violations == 0 ? kExitOk : kExitViolation;
  }

  std::vector<SeedResult> results(options.seeds);
  std::atomic<unsigned> next{0};
  const unsigned workers = std::max(1u, std::min(options.seeds, options.threads != 0
                                                                     ? options.threads
                                                                     : std::max(1u, std::thread::hardware_concurrency())));
  auto work = [&] {
    for (unsigned i = next++; i < options.seeds; i = next++) {
      Scenario copy = scenario;
      copy.seed = scenario.seed + i;
      results[i] = run_one(std::move(copy), options.out / fmt::format("seed-{}", scenario.seed + i), nullptr);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& thread : pool) thread.join();

  int code = kExitOk;
  for (const SeedResult& r : results) {
    if (!r.error.empty()) {
      out << fmt::format("seed {}: error: {}\n", r.seed, r.error);
      code = kExitError;
    } else {
      out << fmt::format("seed {}: {} violations{}\n", r.seed, r.violations,
                         r.first_violation ? fmt::format(", first at tick {}", *r.first_violation) : "");
      if (r.violations > 0 && code == kExitOk) code = kExitViolation;
    }
  }
  return code;
}

int cmd_replay(const fs::path& trace_path, std::ostream& out, std::ostream& err) {
  std::string original;
  Scenario scenario;
  try {
    original = read_file(trace_path);
    const std::size_t header_end = original.find('\n');
    if (header_end == std::string::npos) throw Error(Errc::kMalformedTrace, "missing header");
    const auto header = nlohmann::json::parse(original.substr(0, header_end), nullptr, false);
    if (header.is_discarded() || !header.is_object() || header.value("type", "") != "header" ||
        header.value("format", "") != kTraceFormat || !header.contains("scenario")) {
      throw Error(Errc::kMalformedTrace, "missing or malformed header");
    }
    scenario = parse_scenario(header["scenario"].dump());

    // The body is compared byte for byte below; only the footer must be intact.
    std::string_view body(original);
    if (!body.ends_with('\n')) throw Error(Errc::kMalformedTrace, "truncated trace");
    body.remove_suffix(1);
    const auto footer = nlohmann::json::parse(body.substr(body.rfind('\n') + 1), nullptr, false);
    if (footer.is_discarded() || !footer.is_object() || footer.value("type", "") != "end") {
      throw Error(Errc::kMalformedTrace, "missing footer");
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  std::string replayed;
  try {
    replayed = serialize_trace(scenario, run_scenario(scenario));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  if (replayed == original) {
    out << fmt::format("replay matches: {} bytes\n", original.size());
    return kExitOk;
  }
  const auto mismatch = std::mismatch(original.begin(), original.end(), replayed.begin(), replayed.end());
  const auto line = 1 + std::count(original.begin(), mismatch.first, '\n');
  out << fmt::format("replay differs at line {} (byte {})\n", line, mismatch.first - original.begin());
  return kExitViolation;
}

int cmd_report(const fs::path& trace_path, std::ostream& out, std::ostream& err) {
  try {
    const TraceFile file = parse_trace(read_file(trace_path));
    const metrics::RunReport report = metrics::check(file.trace, file.scenario);
    write_file(report_path_for(trace_path), metrics::serialize_report(report));
    out << metrics::format_table(report);
    return report.violations.empty() ? kExitOk : kExitViolation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace rejuv::cli
