// ghzsim: runs the four-photon GHZ / entanglement-swapping scenarios.
//
// Exit codes: 0 success, 1 usage, 2 configuration, 3 physically impossible
// conditioning (e.g. post-selection with zero probability).

#include <iostream>

#include <CLI11.hpp>

#include "ghz/config.hpp"
#include "ghz/errors.hpp"
#include "ghz/scenario.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPhysics = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Four-photon GHZ and entanglement-swapping simulator"};

  std::string scenario_name;
  std::string config_path;
  std::uint64_t seed = 0;
  double time = 0.0;
  double delay = 0.0;
  std::string out_dir = ".";
  bool print_default = false;

  app.add_option("--scenario", scenario_name,
                 "hv-table | basis45-table | delay-scan | swap-report | feasibility");
  app.add_option("--config", config_path, "JSON configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "Monte Carlo seed");
  auto* time_opt = app.add_option("--time", time, "integration time per table or scan point (s)");
  auto* delay_opt = app.add_option("--delay", delay, "photon 2/3 delay at the PBS (fs)");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--print-default-config", print_default, "print the default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (print_default) {
    std::cout << ghz::to_json(ghz::SimulationConfig{}).dump(2) << '\n';
    return 0;
  }
  if (scenario_name.empty()) {
    std::cerr << "error: --scenario is required\n" << app.help();
    return kExitUsage;
  }
  const auto scenario = ghz::parse_scenario(scenario_name);
  if (!scenario) {
    std::cerr << "error: unknown scenario '" << scenario_name << "'\n" << app.help();
    return kExitUsage;
  }

  ghz::RunConfig run;
  run.scenario = *scenario;
  if (!config_path.empty()) run.config_path = config_path;
  if (*seed_opt) run.seed = seed;
  if (*time_opt) run.integration_time = time;
  if (*delay_opt) run.delay_fs = delay;
  run.output_dir = out_dir;

  try {
    const auto out = ghz::run_scenario(run);
    std::cout << out.summary;
    for (const auto& f : out.files) std::cout << "wrote " << f.string() << '\n';
  } catch (const ghz::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ghz::ImpossibleOutcomeError& e) {
    std::cerr << "physics error: " << e.what() << '\n';
    return kExitPhysics;
  } catch (const ghz::RoutingError& e) {
    std::cerr << "physics error: " << e.what() << '\n';
    return kExitPhysics;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
