#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "etfc/bounds.hpp"
#include "etfc/scenario.hpp"
#include "etfc/simulation.hpp"

namespace etfc {

inline constexpr int kScenarioFormatVersion = 1;
inline constexpr int kDefaultPrecision = 12;
inline constexpr const char* kPrecisionEnv = "ETFC_PRECISION";

/// Parses a YAML scenario. Unknown keys, missing required keys and malformed
/// values raise ConfigError naming the offending key.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Significant digits for numeric output: ETFC_PRECISION if set (1..17), else 12.
int output_precision();

/// Plain decimal notation (never an exponent) with `digits` significant digits.
std::string format_number(double v, int digits);

void write_trace_csv(std::ostream& os, const ScenarioConfig& cfg,
                     const std::vector<TraceSample>& trace, int digits);
void write_triggers_csv(std::ostream& os, const ScenarioConfig& cfg,
                        const std::vector<TriggerRecord>& triggers, int digits);

/// Readers check the header against the scenario and rebuild the derived
/// per-edge columns. Throw ConfigError on any mismatch or malformed row.
std::vector<TraceSample> read_trace_csv(std::istream& is, const ScenarioConfig& cfg);
std::vector<TriggerRecord> read_triggers_csv(std::istream& is, const ScenarioConfig& cfg);

nlohmann::json bounds_json(const ScenarioConfig& cfg, const Controller& ctl,
                           const BoundSet& bounds);
nlohmann::json report_json(const Report& report);

/// trace.csv, triggers.csv, bounds.json, report.json and the plot data files.
void write_run_outputs(const std::filesystem::path& dir, const ScenarioConfig& cfg,
                       const RunResult& result, const Report& report, int digits);

}  // namespace etfc
