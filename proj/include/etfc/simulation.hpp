#pragma once

#include <cstddef>
#include <vector>

#include "etfc/bounds.hpp"
#include "etfc/scenario.hpp"
#include "etfc/trace.hpp"

namespace etfc {

/// True state right after an event, together with every agent's held
/// control (u_i in single mode, u^d_i in double mode). Between consecutive
/// segments the closed loop evolves in closed form.
struct Segment {
  double start = 0.0;
  Points x;
  Points q;
  Points control;
};

struct RunResult {
  Controller controller;
  BoundSet bounds;
  std::vector<Segment> segments;
  std::vector<TraceSample> trace;
  std::vector<TriggerRecord> triggers;
};

enum class Execution { serial, parallel };

struct RunOptions {
  Execution sampling = Execution::parallel;
  std::size_t max_events = 5'000'000;
};

/// Runs the event loop on [0, horizon]. Throws ConfigError for invalid input
/// and SimulationFault (with time and agent) for failures inside the loop.
RunResult run(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// Grid k * sample_dt up to the horizon (horizon always included) merged with
/// every trigger time, sorted and deduplicated.
std::vector<double> sample_times(double horizon, double dt,
                                 const std::vector<TriggerRecord>& triggers);

/// State of the whole network at time t, reconstructed from the last segment
/// that starts at or before t.
TraceSample sample_at(const ScenarioConfig& cfg, const Controller& ctl,
                      const std::vector<Segment>& segments, double t);

/// Serial reference and OpenMP kernel for the same sampling; results are
/// identical element for element.
std::vector<TraceSample> sample_trace_serial(const ScenarioConfig& cfg, const Controller& ctl,
                                             const std::vector<Segment>& segments,
                                             const std::vector<double>& times);
std::vector<TraceSample> sample_trace_parallel(const ScenarioConfig& cfg, const Controller& ctl,
                                               const std::vector<Segment>& segments,
                                               const std::vector<double>& times);

/// Re-validates the scenario, recomputes bounds and certifies an external trace.
Report replay_check(const ScenarioConfig& cfg, const std::vector<TraceSample>& trace,
                    const std::vector<TriggerRecord>& triggers);

struct BatchItem {
  bool ok = false;
  std::string error;
  RunResult result;
  Report report;
};

/// Runs and certifies many scenarios. Each scenario is independent; the
/// parallel variant distributes them over OpenMP threads.
std::vector<BatchItem> run_batch_serial(const std::vector<ScenarioConfig>& cfgs);
std::vector<BatchItem> run_batch_parallel(const std::vector<ScenarioConfig>& cfgs);

}  // namespace etfc
