#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "rejuv/sim/types.hpp"

namespace rejuv::cli {

/// Exit codes shared by the commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitViolation = 2;  // run/report: safety violations; replay: byte mismatch

struct RunOptions {
  std::filesystem::path scenario;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "out";
  std::optional<Tick> horizon;
  /// Runs seeds seed .. seed + seeds - 1, each into out/seed-<seed>/.
  unsigned seeds = 1;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Writes <out>/trace.jsonl and <out>/trace.report.jsonl and prints the report table.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

/// Re-runs the scenario embedded in the trace header and compares bytes.
int cmd_replay(const std::filesystem::path& trace, std::ostream& out, std::ostream& err);

/// Recomputes the report of a trace, writes <stem>.report.jsonl beside it.
int cmd_report(const std::filesystem::path& trace, std::ostream& out, std::ostream& err);

std::filesystem::path report_path_for(const std::filesystem::path& trace);

}  // namespace rejuv::cli
