#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "rejuv/cli/scenario.hpp"
#include "rejuv/sim/trace.hpp"

namespace rejuv::cli {

inline constexpr std::string_view kTraceFormat = "rejuvsim-trace";
inline constexpr int kTraceVersion = 1;

/// Trace file layout, one JSON object per line:
///   {"type":"header","format":"rejuvsim-trace","version":1,"scenario":{...}}
///   one line per trace record
///   {"type":"end","records":N}
std::string serialize_trace(const Scenario& scenario, const sim::Trace& trace);

struct TraceFile {
  Scenario scenario;
  sim::Trace trace;
};

/// Throws Error(kMalformedTrace) on a missing or malformed header, record,
/// or footer, and on a footer count that disagrees with the body.
TraceFile parse_trace(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace rejuv::cli
