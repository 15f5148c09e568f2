#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>

#include "etfc/errors.hpp"
#include "etfc/io.hpp"
#include "support/fixtures.hpp"

using namespace etfc;

namespace {

const char* kSingle = R"(
format_version: 1
mode: single
formation:
  p: 2
  delta: 4
  edges: [[1, 2], [1, 3], [2, 3]]
  d: [[0, -2], [-2, 0], [-2, 2]]
initial:
  x0: [[2, 4], [3.5, 7], [4.5, 5.5]]
controller:
  alpha: 10
  beta: 1
simulation:
  horizon: 3
)";

std::string with(const std::string& from, const std::string& to) {
  std::string s = kSingle;
  const auto at = s.find(from);
  EXPECT_NE(at, std::string::npos);
  return s.replace(at, from.size(), to);
}

}  // namespace

TEST(Io, FormatNumberUsesSignificantDigitsWithoutExponent) {
  EXPECT_EQ(format_number(0.0, 12), "0");
  EXPECT_EQ(format_number(2.0, 12), "2.00000000000");
  EXPECT_EQ(format_number(-1234.5, 6), "-1234.50");
  EXPECT_EQ(format_number(1.5e-7, 3), "0.000000150");
  EXPECT_EQ(format_number(9.9999999, 3), "10.0");
  EXPECT_EQ(format_number(123456789.0, 4), "123500000");
}

TEST(Io, PrecisionEnvironmentOverride) {
  ::unsetenv(kPrecisionEnv);
  EXPECT_EQ(output_precision(), 12);
  ::setenv(kPrecisionEnv, "15", 1);
  EXPECT_EQ(output_precision(), 15);
  ::setenv(kPrecisionEnv, "0", 1);
  EXPECT_THROW(output_precision(), ConfigError);
  ::setenv(kPrecisionEnv, "abc", 1);
  EXPECT_THROW(output_precision(), ConfigError);
  ::unsetenv(kPrecisionEnv);
}

TEST(Io, ParsesScenario) {
  const ScenarioConfig cfg = parse_scenario(kSingle);
  EXPECT_EQ(cfg.mode, Mode::single);
  EXPECT_EQ(cfg.formation.agent_count(), 3);
  EXPECT_EQ(cfg.formation.graph().edge(2).tail, 1);
  EXPECT_TRUE(cfg.formation.edge_displacement(2).isApprox(support::v2(-2, 2)));
  EXPECT_DOUBLE_EQ(cfg.horizon, 3.0);
  EXPECT_DOUBLE_EQ(cfg.sample_dt, 0.01);
  EXPECT_DOUBLE_EQ(cfg.a, 0.5);
  EXPECT_TRUE(cfg.q0.empty());
}

TEST(Io, RejectsUnknownAndMissingKeys) {
  EXPECT_THROW(parse_scenario(with("beta: 1", "beta: 1\n  gamma: 2")), ConfigError);
  EXPECT_THROW(parse_scenario(with("format_version: 1", "format_version: 1\nextra: 0")), ConfigError);
  EXPECT_THROW(parse_scenario(with("  delta: 4\n", "")), ConfigError);
  EXPECT_THROW(parse_scenario(with("format_version: 1", "format_version: 2")), ConfigError);
  EXPECT_THROW(parse_scenario(with("mode: single", "mode: triple")), ConfigError);
  EXPECT_THROW(parse_scenario(with("alpha: 10", "alpha: ten")), ConfigError);
  EXPECT_THROW(parse_scenario(with("[[1, 2], [1, 3], [2, 3]]", "[[1, 2], [1, 3], [2, 2]]")),
               ConfigError);
  EXPECT_THROW(parse_scenario(with("x0: [[2, 4], [3.5, 7], [4.5, 5.5]]",
                                   "x0: [[2, 4], [3.5, 7], [4.5, 5.5]]\n  q0: [[0,0],[0,0],[0,0]]")),
               ConfigError);
  EXPECT_THROW(parse_scenario("format_version: [1"), ConfigError);
  try {
    parse_scenario(with("beta: 1", "beta: 1\n  gamma: 2"));
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("controller.gamma"), std::string::npos);
  }
}

TEST(Io, DoubleModeDefaultsVelocitiesToZero) {
  const ScenarioConfig cfg = parse_scenario(with("mode: single", "mode: double"));
  ASSERT_EQ(cfg.q0.size(), 3u);
  EXPECT_TRUE(cfg.q0[1].isZero());
}

TEST(Io, TraceAndTriggerRoundTrip) {
  for (const char* mode : {"single", "double"}) {
    const ScenarioConfig cfg = parse_scenario(with("mode: single", std::string("mode: ") + mode));
    const RunResult r = run(cfg);
    std::stringstream ts, gs;
    write_trace_csv(ts, cfg, r.trace, 17);
    write_triggers_csv(gs, cfg, r.triggers, 17);
    const auto trace = read_trace_csv(ts, cfg);
    const auto triggers = read_triggers_csv(gs, cfg);
    ASSERT_EQ(trace.size(), r.trace.size());
    ASSERT_EQ(triggers.size(), r.triggers.size());
    for (std::size_t k = 0; k < trace.size(); ++k) {
      EXPECT_EQ(trace[k].time, r.trace[k].time);
      for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(trace[k].positions[i], r.trace[k].positions[i]);
    }
    for (std::size_t k = 0; k < triggers.size(); ++k) {
      EXPECT_EQ(triggers[k].agent, r.triggers[k].agent);
      EXPECT_EQ(triggers[k].control, r.triggers[k].control);
    }
  }
}

TEST(Io, ReaderRejectsForeignHeaderAndBadCells) {
  const ScenarioConfig cfg = parse_scenario(kSingle);
  std::stringstream wrong("t,x1_1\n0,1\n");
  EXPECT_THROW(read_trace_csv(wrong, cfg), ConfigError);
  std::stringstream bad("agent,t,u_1,u_2,error_norm\n1,0,abc,0,0\n");
  EXPECT_THROW(read_triggers_csv(bad, cfg), ConfigError);
  std::stringstream agent("agent,t,u_1,u_2,error_norm\n4,0,0,0,0\n");
  EXPECT_THROW(read_triggers_csv(agent, cfg), ConfigError);
}

TEST(Io, BoundsJsonCarriesGainsInDoubleMode) {
  const ScenarioConfig cfg = parse_scenario(with("mode: single", "mode: double"));
  const Controller ctl = resolve(cfg);
  const auto j = bounds_json(cfg, ctl, compute_bounds(cfg, ctl));
  EXPECT_NEAR(j["beta0"].get<double>(), 1.5, 1e-12);
  EXPECT_NEAR(j["gains"]["k3"].get<double>(), 0.6053, 1e-4);
  EXPECT_EQ(j["agents"].size(), 3u);
  const ScenarioConfig single = parse_scenario(kSingle);
  const Controller sc = resolve(single);
  EXPECT_FALSE(bounds_json(single, sc, compute_bounds(single, sc)).contains("gains"));
}
