#include "rejuv/cli/trace_file.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace rejuv::cli {

namespace {

[[noreturn]] void malformed(std::size_t line, std::string_view what) {
  throw Error(Errc::kMalformedTrace, fmt::format("line {}: {}", line, what));
}

}  // namespace

std::string serialize_trace(const Scenario& scenario, const sim::Trace& trace) {
  std::string out;
  out.reserve(trace.records.size() * 96 + 1024);
  out += fmt::format(R"({{"type":"header","format":"{}","version":{},"scenario":{}}})", kTraceFormat,
                     kTraceVersion, serialize_scenario(scenario));
  out += '\n';
  for (const auto& record : trace.records) {
    sim::append_record(out, record);
    out += '\n';
  }
  out += fmt::format(R"({{"type":"end","records":{}}})", trace.records.size());
  out += '\n';
  return out;
}

TraceFile parse_trace(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  if (lines.empty()) malformed(1, "empty trace");

  TraceFile file;
  try {
    const auto header = nlohmann::json::parse(lines.front());
    if (!header.is_object() || header.value("type", "") != "header") malformed(1, "missing header");
    if (header.value("format", "") != kTraceFormat) malformed(1, "unknown format");
    if (header.value("version", 0) != kTraceVersion) malformed(1, "unsupported version");
    if (!header.contains("scenario")) malformed(1, "header without scenario");
    file.scenario = parse_scenario(header["scenario"].dump());
  } catch (const nlohmann::json::exception& e) {
    malformed(1, e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::kMalformedTrace) throw;
    malformed(1, e.what());
  }

  if (lines.size() < 2) malformed(lines.size() + 1, "missing footer");
  std::uint64_t declared = 0;
  try {
    const auto footer = nlohmann::json::parse(lines.back());
    if (!footer.is_object() || footer.value("type", "") != "end" || !footer.contains("records") ||
        !footer["records"].is_number_unsigned()) {
      malformed(lines.size(), "missing footer");
    }
    declared = footer["records"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception&) {
    malformed(lines.size(), "missing footer");
  }

  const std::size_t body = lines.size() - 2;
  if (declared != body) malformed(lines.size(), fmt::format("footer declares {} records, found {}", declared, body));
  file.trace.records.reserve(body);
  for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
    try {
      file.trace.records.push_back(sim::parse_record(lines[i]));
    } catch (const Error& e) {
      malformed(i + 1, e.what());
    }
  }
  return file;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, fmt::format("cannot open {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIo, fmt::format("cannot write {}", path.string()));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::kIo, fmt::format("write failed: {}", path.string()));
}

}  // namespace rejuv::cli
