#pragma once

#include <string>

#include "rejuv/cli/scenario.hpp"

namespace rejuv::testing {

inline std::string scenario_path(const std::string& name) {
  return std::string(REJUV_SCENARIO_DIR) + "/" + name + ".json";
}

inline cli::Scenario shipped(const std::string& name) { return cli::load_scenario(scenario_path(name)); }

/// Four templates, Classic t=1, ICAP, bus 1..3, adversary off, no rejuvenation.
inline cli::Scenario small_scenario(Tick horizon = 2000) {
  cli::Scenario s;
  s.horizon = horizon;
  s.templates = {{"rv32-a", "riscv", 1000, 200, 50},
                 {"rv32-b", "riscv", 1000, 200, 50},
                 {"mb-c", "microblaze", 1000, 200, 50},
                 {"leon-d", "leon", 1000, 200, 50}};
  s.pblocks = 5;
  s.workload.start = 50;
  s.trigger.period = s.trigger.effective_period();
  return s;
}

}  // namespace rejuv::testing
