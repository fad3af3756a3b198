#include "rejuv/cli/simulation.hpp"

namespace rejuv::cli {

Simulation::Simulation(Scenario scenario)
    : scenario_(std::move(scenario)),
      engine_(scenario_.seed),
      fabric_(engine_, scenario_.pblocks, scenario_.ports.pcap_bandwidth, scenario_.ports.icap_bandwidth),
      bus_(engine_, fabric_, scenario_.bus),
      adversary_(scenario_.adversary, scenario_.templates.size(), scenario_.seed),
      trigger_(scenario_.trigger, engine_) {
  validate(scenario_);
  for (const auto& tmpl : scenario_.templates) fabric_.register_template(tmpl);
  core_ = std::make_unique<core::CoreLogic>(engine_, fabric_, bus_, adversary_, scenario_.quorum,
                                            scenario_.ports.use, trigger_.hooks());
  trigger_.attach(*core_);
}

const sim::Trace& Simulation::run() {
  if (ran_) throw Error(Errc::kInvalidLifecycle, "simulation already ran");
  ran_ = true;
  engine_.schedule(0, sim::EventKind::kTimer, kCoreLogic, static_cast<std::uint8_t>(sim::TimerTag::kBoot));
  return engine_.run_until(scenario_.horizon, [this](const sim::SimEvent& event) { dispatch(event); });
}

void Simulation::on_boot() {
  core_->boot();
  engine_.schedule(scenario_.workload.start, sim::EventKind::kTimer, kCoreLogic,
                   static_cast<std::uint8_t>(sim::TimerTag::kOpArrival));
  trigger_.start();
  if (scenario_.adversary.enabled) engine_.schedule(1, sim::EventKind::kAdversaryStep, kCoreLogic, 0, 1);
  for (std::size_t i = 0; i < scenario_.resize.size(); ++i) {
    engine_.schedule(scenario_.resize[i].at, sim::EventKind::kTimer, kCoreLogic,
                     static_cast<std::uint8_t>(sim::TimerTag::kResize), i);
  }
}

Tick Simulation::next_interarrival() {
  const auto& w = scenario_.workload;
  if (w.arrival == Arrival::kPeriodic) return w.period;
  return static_cast<Tick>(engine_.uniform(static_cast<std::int64_t>(w.a_min), static_cast<std::int64_t>(w.a_max)));
}

void Simulation::on_op_arrival() {
  const auto& w = scenario_.workload;
  const auto op = static_cast<std::uint64_t>(
      engine_.uniform(static_cast<std::int64_t>(w.op_min), static_cast<std::int64_t>(w.op_max)));
  ++ops_generated_;
  core_->invoke(op);
  if (!w.op_count || ops_generated_ < *w.op_count) {
    engine_.schedule(engine_.now() + next_interarrival(), sim::EventKind::kTimer, kCoreLogic,
                     static_cast<std::uint8_t>(sim::TimerTag::kOpArrival));
  }
}

void Simulation::dispatch(const sim::SimEvent& event) {
  switch (event.kind) {
    case sim::EventKind::kDeliver:
      if (auto message = bus_.deliver(event.ref)) core_->on_message(*message);
      break;
    case sim::EventKind::kSpawnComplete:
      core_->on_spawn_complete(TileId{static_cast<std::uint32_t>(event.ref)});
      break;
    case sim::EventKind::kAdversaryStep:
      adversary_.step(event.ref, fabric_, engine_);
      engine_.schedule(engine_.now() + 1, sim::EventKind::kAdversaryStep, kCoreLogic, 0, 1);
      break;
    case sim::EventKind::kTrigger:
      trigger_.on_fire(static_cast<sim::TriggerTag>(event.tag));
      break;
    case sim::EventKind::kTimer:
      switch (static_cast<sim::TimerTag>(event.tag)) {
        case sim::TimerTag::kBoot: on_boot(); break;
        case sim::TimerTag::kOpArrival: on_op_arrival(); break;
        case sim::TimerTag::kResize: core_->adjust_replication(scenario_.resize.at(event.ref).t); break;
        default: core_->on_timer(static_cast<sim::TimerTag>(event.tag), event.ref); break;
      }
      break;
  }
}

sim::Trace run_scenario(const Scenario& scenario) {
  Simulation simulation(scenario);
  simulation.run();
  return simulation.engine().take_trace();
}

}  // namespace rejuv::cli
