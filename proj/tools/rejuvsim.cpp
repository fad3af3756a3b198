#include <iostream>

#include <CLI11.hpp>

#include "rejuv/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rejuvsim: discrete-event simulator of diverse-softcore rejuvenation"};
  app.require_subcommand(1);

  rejuv::cli::RunOptions run;
  std::uint64_t seed = 0;
  rejuv::Tick horizon = 0;
  auto* run_cmd = app.add_subcommand("run", "run a scenario and write its trace and report");
  run_cmd->add_option("--scenario", run.scenario, "scenario file (JSON)")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed, "override the scenario seed");
  run_cmd->add_option("--out", run.out, "output directory")->capture_default_str();
  auto* horizon_opt = run_cmd->add_option("--horizon", horizon, "override the horizon in ticks");
  run_cmd->add_option("--seeds", run.seeds, "sweep this many consecutive seeds")->check(CLI::PositiveNumber);
  run_cmd->add_option("--threads", run.threads, "worker threads for --seeds (0: all cores)");

  std::string replay_path;
  auto* replay_cmd = app.add_subcommand("replay", "re-run a trace's scenario and compare bytes");
  replay_cmd->add_option("trace", replay_path, "trace file")->required();

  std::string report_path;
  auto* report_cmd = app.add_subcommand("report", "recompute the report of a trace");
  report_cmd->add_option("trace", report_path, "trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rejuv::cli::kExitError;
  }

  if (*run_cmd) {
    if (*seed_opt) run.seed = seed;
    if (*horizon_opt) run.horizon = horizon;
    return rejuv::cli::cmd_run(run, std::cout, std::cerr);
  }
  if (*replay_cmd) return rejuv::cli::cmd_replay(replay_path, std::cout, std::cerr);
  return rejuv::cli::cmd_report(report_path, std::cout, std::cerr);
}
