#pragma once

#include <memory>

#include "rejuv/adversary/adversary.hpp"
#include "rejuv/cli/scenario.hpp"
#include "rejuv/core/core_logic.hpp"
#include "rejuv/fabric/bus.hpp"
#include "rejuv/fabric/fabric.hpp"
#include "rejuv/policies/policies.hpp"
#include "rejuv/sim/engine.hpp"

namespace rejuv::cli {

/// One isolated run of a scenario. Everything random draws from the engine's
/// generator, seeded with `scenario.seed`.
///
/// Tick 0 carries a boot timer that spawns the initial replicas and arms the
/// workload, the trigger policy, the adversary clock and the resize schedule.
class Simulation {
 public:
  explicit Simulation(Scenario scenario);

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Runs to the scenario horizon. Call once.
  const sim::Trace& run();

  const Scenario& scenario() const noexcept { return scenario_; }
  sim::Engine& engine() noexcept { return engine_; }
  const fabric::Fabric& fabric() const noexcept { return fabric_; }
  const core::CoreLogic& core() const noexcept { return *core_; }
  const adversary::Adversary& adversary() const noexcept { return adversary_; }
  const policies::Trigger& trigger() const noexcept { return trigger_; }
  std::uint64_t ops_generated() const noexcept { return ops_generated_; }

 private:
  void dispatch(const sim::SimEvent& event);
  void on_boot();
  void on_op_arrival();
  Tick next_interarrival();

  Scenario scenario_;
  sim::Engine engine_;
  fabric::Fabric fabric_;
  fabric::Bus bus_;
  adversary::Adversary adversary_;
  policies::Trigger trigger_;
  std::unique_ptr<core::CoreLogic> core_;
  std::uint64_t ops_generated_ = 0;
  bool ran_ = false;
};

/// Convenience wrapper: runs `scenario` and returns its trace.
sim::Trace run_scenario(const Scenario& scenario);

}  // namespace rejuv::cli
