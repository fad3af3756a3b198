#pragma once

#include <string>
#include <vector>

#include "rejuv/cli/scenario.hpp"
#include "rejuv/sim/trace.hpp"

namespace rejuv::metrics {

struct AuditFinding {
  std::string property;
  Tick tick = 0;
  std::string detail;
};

/// Replays a trace against the protocol rules and returns every breach.
///
/// Properties: ordering, bus_reliability, slot_conservation, lifecycle,
/// spawn_latency, rejuvenation_shape, state_transfer, replica_count,
/// reactive_soundness, periodic_target, proactive_target, exposure_reset,
/// random_cadence, compromise_precondition, compromise_cap,
/// knowledge_persistence.
std::vector<AuditFinding> audit(const sim::Trace& trace, const cli::Scenario& scenario);

std::string format_findings(const std::vector<AuditFinding>& findings, std::size_t limit = 20);

}  // namespace rejuv::metrics
