#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rejuv/adversary/adversary.hpp"
#include "rejuv/core/quorum.hpp"
#include "rejuv/fabric/bus.hpp"
#include "rejuv/fabric/fabric.hpp"
#include "rejuv/policies/policies.hpp"

namespace rejuv::cli {

struct PortSpec {
  std::uint64_t pcap_bandwidth = 20;
  std::uint64_t icap_bandwidth = 100;
  fabric::PortKind use = fabric::PortKind::kIcap;

  friend bool operator==(const PortSpec&, const PortSpec&) = default;
};

enum class Arrival : std::uint8_t { kPeriodic, kRandom };

struct WorkloadSpec {
  Tick start = 1;
  Arrival arrival = Arrival::kPeriodic;
  Tick period = 10;
  Tick a_min = 5;
  Tick a_max = 15;
  std::optional<std::uint64_t> op_count;
  std::uint64_t op_min = 1;
  std::uint64_t op_max = 100;
  std::string op_kind = "counter";

  friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

struct ResizeStep {
  Tick at = 0;
  int t = 1;

  friend bool operator==(const ResizeStep&, const ResizeStep&) = default;
};

struct Scenario {
  std::uint64_t seed = 1;
  Tick horizon = 10000;
  std::vector<fabric::SoftcoreTemplate> templates;
  std::uint32_t pblocks = 5;
  PortSpec ports;
  fabric::BusModel bus{1, 3, 1000};
  core::QuorumConfig quorum;
  WorkloadSpec workload;
  policies::TriggerConfig trigger;
  adversary::AdversaryConfig adversary;
  std::vector<ResizeStep> resize;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Parses a scenario document. Missing keys take their defaults; unknown keys
/// are rejected. Defaults that depend on other fields (trigger.P) are filled
/// in, so the result serializes with every value explicit.
/// Throws Error(kParseError) with line or field, then Error(kValidationError).
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

/// Throws Error(kValidationError) naming the violated rule.
void validate(const Scenario& scenario);

/// Canonical single-line JSON with every field present, fixed key order.
std::string serialize_scenario(const Scenario& scenario);

std::string_view arrival_name(Arrival arrival) noexcept;
std::string_view port_name(fabric::PortKind port) noexcept;
std::string_view behavior_name(adversary::Behavior behavior) noexcept;
std::string_view memory_name(adversary::AnalysisMemory memory) noexcept;

}  // namespace rejuv::cli
