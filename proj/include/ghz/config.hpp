// JSON configuration of the apparatus, rates and scenario parameters.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghz/experiment.hpp"

namespace ghz {

/// Event budget of a polarizer-based CHSH test on photons 1 and 4.
/// Each run records one four-detector outcome combination; the test needs
/// every (setting pair, outcome of 1/4, φ⁺ herald) configuration.
struct BellTestPlan {
  int configurations = 32;            // 4 setting pairs × 4 outcomes × 2 heralds
  double counts_per_configuration = 1200.0;
  double configuration_fraction = 1.0 / 16.0;  // mean share of four-folds per configuration

  /// Four-fold events that must be produced: configurations × counts / fraction.
  double target_events() const;
};

struct DelayScanPlan {
  std::vector<double> delays_fs;
  double time_per_point = 48000.0;
};

struct SimulationConfig {
  Apparatus apparatus = Apparatus::standard();
  RateModel rates;
  std::uint64_t seed = 20010101;
  double integration_time = 6000.0;
  /// Analyzer overrides per detector; unset entries keep the scenario's.
  std::array<std::optional<double>, kDetectorCount> analyzer_overrides{};
  DelayScanPlan scan{default_scan_delays(), 48000.0};
  BellTestPlan bell_test;
  /// Weight of the ideal GHZ branch in the swap-report mixture.
  double swap_state_weight = 0.89;

  static std::vector<double> default_scan_delays();
};

/// Throws ConfigError naming the offending key.
SimulationConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimulationConfig& config);

SimulationConfig load_config(const std::filesystem::path& path);

}  // namespace ghz
