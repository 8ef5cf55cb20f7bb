// Named scenarios behind the command-line front end. Each writes CSV tables
// plus a plain-text summary into an output directory.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ghz/config.hpp"

namespace ghz {

enum class Scenario { HvTable, Basis45Table, DelayScan, SwapReport, Feasibility };

std::optional<Scenario> parse_scenario(std::string_view name);
std::string_view to_string(Scenario scenario);

struct RunConfig {
  Scenario scenario = Scenario::HvTable;
  std::optional<std::filesystem::path> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> integration_time;
  std::optional<double> delay_fs;
  std::filesystem::path output_dir = ".";
};

struct ScenarioOutput {
  std::vector<std::filesystem::path> files;
  std::string summary;
};

/// Loads the configuration (or the defaults), applies flag overrides and
/// runs the scenario.
ScenarioOutput run_scenario(const RunConfig& run);
ScenarioOutput run_scenario(const RunConfig& run, SimulationConfig config);

/// Compact decimal rendering used in every CSV cell (%.12g).
std::string format_number(double value);

}  // namespace ghz
