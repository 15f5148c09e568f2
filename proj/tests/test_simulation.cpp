#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "etfc/errors.hpp"
#include "etfc/simulation.hpp"
#include "etfc/single.hpp"
#include "support/fixtures.hpp"

using namespace etfc;
using etfc::support::v2;

namespace {

bool same(const Points& a, const Points& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

}  // namespace

TEST(Simulation, RestOnFormationOnlyTriggersAtStart) {
  for (Mode mode : {Mode::single, Mode::double_integrator}) {
    ScenarioConfig cfg = mode == Mode::single ? support::triangle_single(5) : support::triangle_double(5);
    cfg.x0 = check_feasible(cfg.formation).witness;
    if (mode == Mode::double_integrator) cfg.q0.assign(3, Vec::Zero(2));
    const RunResult r = run(cfg);
    ASSERT_EQ(r.triggers.size(), 3u);
    for (int i = 0; i < 3; ++i) {
      EXPECT_EQ(r.triggers[static_cast<std::size_t>(i)].agent, i);
      EXPECT_EQ(r.triggers[static_cast<std::size_t>(i)].time, 0.0);
    }
    for (const TraceSample& s : r.trace) EXPECT_TRUE(same(s.positions, cfg.x0));
    EXPECT_EQ(r.trace.size(), 501u);
  }
}

TEST(Simulation, RunsAreBitIdentical) {
  for (Mode mode : {Mode::single, Mode::double_integrator}) {
    const ScenarioConfig cfg = mode == Mode::single ? support::triangle_single(6) : support::triangle_double(6);
    const RunResult a = run(cfg);
    const RunResult b = run(cfg);
    ASSERT_EQ(a.triggers.size(), b.triggers.size());
    for (std::size_t k = 0; k < a.triggers.size(); ++k) {
      EXPECT_EQ(a.triggers[k].time, b.triggers[k].time);
      EXPECT_EQ(a.triggers[k].agent, b.triggers[k].agent);
      EXPECT_EQ(a.triggers[k].control, b.triggers[k].control);
    }
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t k = 0; k < a.trace.size(); ++k) {
      EXPECT_EQ(a.trace[k].time, b.trace[k].time);
      EXPECT_TRUE(same(a.trace[k].positions, b.trace[k].positions));
      EXPECT_TRUE(same(a.trace[k].velocities, b.trace[k].velocities));
    }
  }
}

TEST(Simulation, TriggerLogIsOrderedAndStartsWithEveryAgent) {
  const ScenarioConfig cfg = support::triangle_single(10);
  const RunResult r = run(cfg);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(r.triggers[static_cast<std::size_t>(i)].time, 0.0);
  for (std::size_t k = 1; k < r.triggers.size(); ++k) {
    const auto& a = r.triggers[k - 1];
    const auto& b = r.triggers[k];
    EXPECT_TRUE(a.time < b.time || (a.time == b.time && a.agent < b.agent));
  }
  EXPECT_GT(r.triggers.size(), 3u);
}

TEST(Simulation, TriggersHappenAtThresholdAndResetError) {
  const ScenarioConfig cfg = support::triangle_single(5);
  const RunResult r = run(cfg);
  ASSERT_EQ(r.segments.size(), r.triggers.size());
  const double delta = 2 * cfg.tol.tol_root;
  for (std::size_t k = 3; k < r.triggers.size(); ++k) {
    const TriggerRecord& t = r.triggers[k];
    const std::size_t iu = static_cast<std::size_t>(t.agent);
    // Controls held just before the event, state at the event.
    const Points& held = r.segments[k - 1].control;
    const Points& x = r.segments[k].x;
    const double before = error_single_from_state(cfg.formation, t.agent, x, held[iu]).norm();
    EXPECT_NEAR(before, t.error_norm, 1e-9 * cfg.alpha);
    EXPECT_LE(t.error_norm, cfg.alpha * std::exp(-cfg.beta * t.time) * (1 + 1e-12));
    // The crossing lies within one root bracket after the recorded time.
    Points later;
    for (std::size_t j = 0; j < x.size(); ++j) later.push_back(propagate_single(x[j], held[j], delta));
    const double after = error_single_from_state(cfg.formation, t.agent, later, held[iu]).norm();
    EXPECT_GT(after, cfg.alpha * std::exp(-cfg.beta * (t.time + delta))) << "trigger " << k;
  }
  for (const TraceSample& s : r.trace)
    for (double e : s.error_norms) EXPECT_LE(e, s.threshold + 1e-9);
}

TEST(Simulation, TraceTimesContainGridAndTriggers) {
  const ScenarioConfig cfg = support::triangle_single(2);
  const RunResult r = run(cfg);
  std::vector<double> times;
  for (const auto& s : r.trace) times.push_back(s.time);
  EXPECT_TRUE(std::is_sorted(times.begin(), times.end()));
  EXPECT_EQ(std::adjacent_find(times.begin(), times.end()), times.end());
  EXPECT_EQ(times.front(), 0.0);
  EXPECT_EQ(times.back(), 2.0);
  for (const auto& t : r.triggers)
    EXPECT_TRUE(std::binary_search(times.begin(), times.end(), t.time));
  EXPECT_TRUE(std::binary_search(times.begin(), times.end(), 0.01 * 37));
}

TEST(Simulation, SampleTimesIncludeHorizonOffGrid) {
  const auto t = sample_times(1.005, 0.01, {});
  EXPECT_EQ(t.back(), 1.005);
  EXPECT_DOUBLE_EQ(t[t.size() - 2], 1.0);
}

TEST(Simulation, SegmentsReproduceStateAtEachTrigger) {
  const ScenarioConfig cfg = support::triangle_double(3);
  const RunResult r = run(cfg);
  // Causality: knowledge sent at a trigger reflects the true state at that instant.
  for (const TriggerRecord& t : r.triggers) {
    const TraceSample s = sample_at(cfg, r.controller, r.segments, t.time);
    const auto nb = cfg.formation.graph().neighbors(t.agent);
    for (std::size_t n = 0; n < nb.size(); ++n) {
      const Vec rel = s.positions[static_cast<std::size_t>(t.agent)] -
                      s.positions[static_cast<std::size_t>(nb[n])];
      EXPECT_TRUE(rel.isApprox(t.payload_positions[n], 1e-12));
    }
  }
}

TEST(Simulation, InvalidParametersAreRejectedBeforeRunning) {
  ScenarioConfig cfg = support::triangle_single(1);
  cfg.beta = 2.0;
  try {
    run(cfg);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("beta=2 violates beta < beta0=1.5"), std::string::npos);
  }
  cfg = support::triangle_single(1);
  cfg.x0[2] = v2(10, 5.5);
  EXPECT_THROW(run(cfg), ConfigError);
  cfg = support::triangle_double(1);
  cfg.beta = 1.2;
  EXPECT_THROW(run(cfg), ConfigError);
  cfg = support::triangle_single(1);
  cfg.conservative_beta0 = true;  // beta0 = 1/6 < beta
  EXPECT_THROW(run(cfg), ConfigError);
  cfg.beta = 0.1;
  EXPECT_NO_THROW(run(cfg));
}

TEST(Simulation, EventBudgetFaultCarriesTimeAndAgent) {
  const ScenarioConfig cfg = support::triangle_single(5);
  RunOptions opts;
  opts.max_events = 4;
  try {
    run(cfg, opts);
    FAIL() << "expected SimulationFault";
  } catch (const SimulationFault& f) {
    EXPECT_GT(f.time(), 0.0);
    EXPECT_GE(f.agent(), 0);
  }
}

TEST(Simulation, EventCountStaysBelowZenoCap) {
  for (Mode mode : {Mode::single, Mode::double_integrator}) {
    const ScenarioConfig cfg = mode == Mode::single ? support::triangle_single(10) : support::triangle_double(10);
    const RunResult r = run(cfg);
    double cap = 3;
    for (double xi : r.bounds.xi_agent) cap += 10.0 / xi;
    EXPECT_LT(static_cast<double>(r.triggers.size()), cap);
  }
}
