// etfc: run, verify and inspect event-triggered formation scenarios.
//
// Exit codes: 0 ok, 1 a certification check failed, 2 invalid input,
// 3 runtime fault inside the simulation.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "etfc/errors.hpp"
#include "etfc/io.hpp"
#include "etfc/simulation.hpp"

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kInvalid = 2, kFault = 3 };

void print_report(const etfc::Report& report) {
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "  ok    " : "  FAIL  ") << c.name;
    if (!c.detail.empty()) std::cout << ": " << c.detail;
    std::cout << '\n';
  }
  std::cout << (report.all_passed() ? "all checks passed" : "certification FAILED") << '\n';
}

int cmd_run(const std::string& scenario, const std::string& out_dir) {
  const int digits = etfc::output_precision();
  const etfc::ScenarioConfig cfg = etfc::load_scenario(scenario);
  const etfc::RunResult result = etfc::run(cfg);
  const etfc::Report report =
      etfc::certify_trace(cfg.formation, result.trace, result.triggers, result.bounds,
                          etfc::certify_options(cfg, result.controller));
  etfc::write_run_outputs(out_dir, cfg, result, report, digits);

  std::cout << "mode " << etfc::to_string(cfg.mode) << ", horizon " << cfg.horizon << ", "
            << result.triggers.size() << " triggers, " << result.trace.size()
            << " samples -> " << out_dir << '\n';
  print_report(report);
  return report.all_passed() ? kOk : kCheckFailed;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw etfc::ConfigError("cannot read " + path);
  return is;
}

int cmd_verify(const std::string& trace_path, const std::string& triggers_path,
               const std::string& scenario) {
  const etfc::ScenarioConfig cfg = etfc::load_scenario(scenario);
  std::ifstream ts = open_input(trace_path);
  std::ifstream gs = open_input(triggers_path);
  const auto trace = etfc::read_trace_csv(ts, cfg);
  const auto triggers = etfc::read_triggers_csv(gs, cfg);
  if (trace.empty()) throw etfc::ConfigError(trace_path + ": no samples");
  const double last = trace.back().time;
  if (last > cfg.horizon + 1e-9 * std::max(1.0, cfg.horizon))
    throw etfc::ConfigError("trace ends at t=" + std::to_string(last) +
                            " beyond the scenario horizon " + std::to_string(cfg.horizon));
  for (const auto& r : triggers)
    if (r.time > cfg.horizon + 1e-9 * std::max(1.0, cfg.horizon))
      throw etfc::ConfigError("trigger at t=" + std::to_string(r.time) +
                              " beyond the scenario horizon " + std::to_string(cfg.horizon));

  const etfc::Report report = etfc::replay_check(cfg, trace, triggers);
  print_report(report);
  return report.all_passed() ? kOk : kCheckFailed;
}

int cmd_bounds(const std::string& scenario) {
  const etfc::ScenarioConfig cfg = etfc::load_scenario(scenario);
  const etfc::Controller ctl = etfc::resolve(cfg);
  const etfc::BoundSet b = etfc::compute_bounds(cfg, ctl);
  std::cout << etfc::bounds_json(cfg, ctl, b).dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-triggered formation control with connectivity preservation"};
  app.require_subcommand(1);

  std::string scenario, out_dir, trace_path, triggers_path;
  auto* run = app.add_subcommand("run", "Simulate a scenario and write trace, triggers, bounds and report");
  run->add_option("scenario", scenario, "Scenario file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();

  auto* verify = app.add_subcommand("verify", "Certify an existing trace against a scenario");
  verify->add_option("trace", trace_path, "trace.csv")->required();
  verify->add_option("triggers", triggers_path, "triggers.csv")->required();
  verify->add_option("scenario", scenario, "Scenario file")->required();

  auto* bounds = app.add_subcommand("bounds", "Print beta0, gains and the bound set as JSON");
  bounds->add_option("scenario", scenario, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*run) return cmd_run(scenario, out_dir);
    if (*verify) return cmd_verify(trace_path, triggers_path, scenario);
    return cmd_bounds(scenario);
  } catch (const etfc::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const etfc::SimulationFault& e) {
    std::cerr << "fault at t=" << e.time();
    if (e.agent() >= 0) std::cerr << " (agent " << e.agent() + 1 << ")";
    std::cerr << ": " << e.what() << '\n';
    return kFault;
  } catch (const std::exception& e) {
    std::cerr << "fault: " << e.what() << '\n';
    return kFault;
  }
}
