#include "ghz/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ghz/errors.hpp"
#include "ghz/swap.hpp"

namespace ghz {

namespace {

constexpr double kSecondsPerDay = 86400.0;
constexpr double kDaysPerMonth = 30.436875;

MeasurementSetting with_overrides(MeasurementSetting base, const SimulationConfig& config) {
  for (std::size_t k = 0; k < kDetectorCount; ++k) {
    if (config.analyzer_overrides[k]) base.analyzers[k] = config.analyzer_overrides[k];
  }
  return base;
}

void set_delay(Apparatus& apparatus, double delay_fs) {
  for (auto& e : apparatus.elements) {
    if (auto* d = std::get_if<DelayElement>(&e)) {
      d->delay_fs = delay_fs;
      return;
    }
  }
  apparatus.elements.emplace_back(DelayElement{delay_fs, kDefaultCoherenceTimeFs});
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : path_(path), out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
  }
  template <typename... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(std::uint64_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }

  std::filesystem::path path_;
  std::ofstream out_;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

ScenarioOutput table_scenario(const RunConfig& run, const SimulationConfig& config,
                              const MeasurementSetting& setting) {
  const std::string name(to_string(run.scenario));
  const auto& app = config.apparatus;
  const OutcomeTable probs = exact_outcome_probabilities(app, setting);
  const CountTable counts =
      monte_carlo_counts(app, setting, config.rates, config.integration_time, config.seed);
  const auto means = expected_counts(app, setting, config.rates, config.integration_time);

  ScenarioOutput out;
  {
    CsvWriter csv(run.output_dir / (name + "_probabilities.csv"));
    csv.row("outcome", "probability", "time", "seed");
    for (const auto& p : probs) {
      csv.row(p.outcome.key, p.probability, config.integration_time, config.seed);
    }
    out.files.push_back(csv.path());
  }
  {
    CsvWriter csv(run.output_dir / (name + "_counts.csv"));
    csv.row("outcome", "count", "time", "seed");
    for (const auto& c : counts.counts) {
      csv.row(c.outcome.key, c.count, counts.integration_time, counts.seed);
    }
    out.files.push_back(csv.path());
  }

  // Outcomes above the uniform share are the "desired" ones.
  const double uniform = 1.0 / static_cast<double>(probs.size());
  double desired_n = 0, desired_sum = 0, other_n = 0, other_sum = 0;
  double desired_mean = 0, other_mean = 0;
  int nonzero = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i].probability > kStateTolerance) ++nonzero;
    const double c = static_cast<double>(counts.counts[i].count);
    if (probs[i].probability > uniform + kStateTolerance) {
      ++desired_n;
      desired_sum += c;
      desired_mean += means[i];
    } else {
      ++other_n;
      other_sum += c;
      other_mean += means[i];
    }
  }
  std::ostringstream s;
  s << "scenario: " << name << "\n"
    << "integration time: " << format_number(config.integration_time) << " s\n"
    << "seed: " << config.seed << "\n"
    << "total four-fold counts: " << counts.total() << "\n"
    << "outcomes with nonzero probability: " << nonzero << " of " << probs.size() << "\n";
  if (desired_n > 0 && other_n > 0) {
    const double snr = other_sum > 0 ? (desired_sum / desired_n) / (other_sum / other_n)
                                     : std::numeric_limits<double>::infinity();
    s << "mean count per desired outcome: " << format_number(desired_sum / desired_n) << "\n"
      << "mean count per other outcome: " << format_number(other_sum / other_n) << "\n"
      << "signal to noise (counts): " << format_number(snr) << "\n"
      << "signal to noise (expected): "
      << format_number((desired_mean / desired_n) / (other_mean / other_n)) << "\n";
  }
  // Row 0 vs row 1 is the interference pair (e.g. ++++ vs +++-) whenever
  // either carries signal; in the H/V basis both are background only.
  if (probs.size() >= 2 && probs[0].probability + probs[1].probability > kStateTolerance) {
    const double n0 = static_cast<double>(counts.counts[0].count);
    const double n1 = static_cast<double>(counts.counts[1].count);
    const double p0 = probs[0].probability, p1 = probs[1].probability;
    s << "visibility " << probs[0].outcome.key << " vs " << probs[1].outcome.key
      << " (exact): " << format_number((p0 - p1) / (p0 + p1)) << "\n";
    if (n0 + n1 > 0) {
      s << "visibility " << probs[0].outcome.key << " vs " << probs[1].outcome.key
        << " (counts): " << format_number((n0 - n1) / (n0 + n1)) << "\n";
    }
  }
  out.summary = s.str();
  return out;
}

ScenarioOutput delay_scan_scenario(const RunConfig& run, const SimulationConfig& config) {
  const MeasurementSetting setting = with_overrides(MeasurementSetting::diagonal(), config);
  const auto points = delay_scan(config.apparatus, setting, config.scan.delays_fs, config.rates,
                                 config.scan.time_per_point, config.seed);
  const auto outcomes = enumerate_outcomes(setting);

  ScenarioOutput out;
  CsvWriter csv(run.output_dir / "delay-scan.csv");
  csv.row("delay_fs", "counts_pppp", "counts_pppm", "visibility", "visibility_error",
          "expected_visibility", "time", "seed");
  std::ostringstream s;
  s << "scenario: delay-scan\n"
    << "compared outcomes: " << outcomes[0].key << " vs " << outcomes[1].key << "\n"
    << "time per point: " << format_number(config.scan.time_per_point) << " s\n"
    << "seed: " << config.seed << "\n";
  double best_delay = 0.0, best_expected = -2.0;
  for (const auto& p : points) {
    Apparatus at = config.apparatus;
    set_delay(at, p.delay_fs);
    const auto means = expected_counts(at, setting, config.rates, config.scan.time_per_point);
    const double expected =
        means[0] + means[1] > 0 ? (means[0] - means[1]) / (means[0] + means[1]) : 0.0;
    if (expected > best_expected) {
      best_expected = expected;
      best_delay = p.delay_fs;
    }
    const std::uint64_t n0 = p.table.counts[0].count;
    const std::uint64_t n1 = p.table.counts[1].count;
    if (n0 + n1 == 0) {
      csv.row(p.delay_fs, n0, n1, "nan", "nan", expected, p.table.integration_time, p.table.seed);
      continue;
    }
    const std::vector<std::string> even{outcomes[0].key}, odd{outcomes[1].key};
    const VisibilityEstimate v = visibility_from_counts(p.table, even, odd);
    csv.row(p.delay_fs, n0, n1, v.value, v.error, expected, p.table.integration_time,
            p.table.seed);
  }
  s << "expected visibility peaks at delay " << format_number(best_delay) << " fs with "
    << format_number(best_expected) << "\n";
  out.files.push_back(csv.path());
  out.summary = s.str();
  return out;
}

ScenarioOutput swap_report_scenario(const RunConfig& run, const SimulationConfig& config) {
  const Conditioned fourfold = propagate(config.apparatus);
  if (!fourfold.state) {
    throw ImpossibleOutcomeError("the apparatus never produces a four-fold coincidence");
  }
  // Ideal GHZ branch plus its phase-flipped partner at the configured weight.
  Ensemble members = dephase_ensemble(*fourfold.state, 0.0, 0.0);
  if (members.size() != 2) {
    throw ImpossibleOutcomeError("post-selected state lacks the two-branch GHZ structure");
  }
  members[0].first = config.swap_state_weight;
  members[1].first = 1.0 - config.swap_state_weight;
  const DensityMatrix rho = mix(members);
  const SwapResult abstract = project_bell(rho, {Mode::k2p, Mode::k3p}, BellKind::PhiPlus);
  const SwapResult operational = phi_plus_via_45_coincidence(rho);
  const double agreement = (abstract.conditioned_state.matrix() -
                            operational.conditioned_state.matrix()).cwiseAbs().maxCoeff();

  const double overlap = distinguishability(config.apparatus.delay());
  const SwapResult delay_model = phi_plus_via_45_coincidence(dephase_by_distinguishability(
      *fourfold.state, overlap, config.apparatus.visibility_ceiling));

  const BellDecomposition source = bell_decompose(source_state(config.apparatus));

  ScenarioOutput out;
  const std::vector<std::pair<std::string, double>> rows = {
      {"state_weight", config.swap_state_weight},
      {"projection_probability", operational.projection_probability},
      {"fidelity", operational.fidelity_to_target},
      {"visibility_45", operational.visibility_45},
      {"chsh", operational.chsh},
      {"operational_vs_abstract_max_deviation", agreement},
      {"delay_model_weight", 0.5 * (1.0 + overlap * config.apparatus.visibility_ceiling)},
      {"delay_model_fidelity", delay_model.fidelity_to_target},
      {"delay_model_visibility_45", delay_model.visibility_45},
      {"delay_model_chsh", delay_model.chsh},
      {"source_coefficient_psi+psi+", source.coefficient(BellKind::PsiPlus, BellKind::PsiPlus).real()},
      {"source_coefficient_psi-psi-", source.coefficient(BellKind::PsiMinus, BellKind::PsiMinus).real()},
      {"source_coefficient_phi+phi+", source.coefficient(BellKind::PhiPlus, BellKind::PhiPlus).real()},
      {"source_coefficient_phi-phi-", source.coefficient(BellKind::PhiMinus, BellKind::PhiMinus).real()},
  };
  {
    CsvWriter csv(run.output_dir / "swap-report.csv");
    csv.row("quantity", "value");
    for (const auto& [k, v] : rows) csv.row(k, v);
    out.files.push_back(csv.path());
  }
  nlohmann::ordered_json j;
  for (const auto& [k, v] : rows) j[k] = v;
  const auto json_path = run.output_dir / "swap-report.json";
  write_text(json_path, j.dump(2) + "\n");
  out.files.push_back(json_path);

  std::ostringstream s;
  s << "scenario: swap-report\n"
    << "heralded pair 1/4 after ++/-- on 2'/3': fidelity to phi+ "
    << format_number(operational.fidelity_to_target) << ", visibility "
    << format_number(operational.visibility_45) << ", CHSH " << format_number(operational.chsh)
    << "\n"
    << "herald probability: " << format_number(operational.projection_probability) << "\n"
    << "operational vs abstract projection max deviation: " << format_number(agreement) << "\n";
  out.summary = s.str();
  return out;
}

ScenarioOutput feasibility_scenario(const RunConfig& run, const SimulationConfig& config) {
  const double target = config.bell_test.target_events();
  const double seconds = feasibility_estimate(target, config.rates);
  const double rate =
      config.rates.fourfold_rate_desired * std::pow(config.rates.detector_efficiency, 4);
  ScenarioOutput out;
  CsvWriter csv(run.output_dir / "feasibility.csv");
  csv.row("quantity", "value");
  csv.row("target_events", target);
  csv.row("effective_rate_per_s", rate);
  csv.row("seconds", seconds);
  csv.row("days", seconds / kSecondsPerDay);
  csv.row("months", seconds / kSecondsPerDay / kDaysPerMonth);
  out.files.push_back(csv.path());
  std::ostringstream s;
  s << "scenario: feasibility\n"
    << "target four-fold events: " << format_number(target) << "\n"
    << "effective four-fold rate: " << format_number(rate) << " /s\n"
    << "continuous measurement time: " << format_number(seconds) << " s ("
    << format_number(seconds / kSecondsPerDay / kDaysPerMonth) << " months)\n";
  out.summary = s.str();
  return out;
}

}  // namespace

std::optional<Scenario> parse_scenario(std::string_view name) {
  for (Scenario s : {Scenario::HvTable, Scenario::Basis45Table, Scenario::DelayScan,
                     Scenario::SwapReport, Scenario::Feasibility}) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

std::string_view to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::HvTable: return "hv-table";
    case Scenario::Basis45Table: return "basis45-table";
    case Scenario::DelayScan: return "delay-scan";
    case Scenario::SwapReport: return "swap-report";
    case Scenario::Feasibility: return "feasibility";
  }
  return "?";
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value == 0.0 ? 0.0 : value);
  return buf;
}

ScenarioOutput run_scenario(const RunConfig& run) {
  SimulationConfig config = run.config_path ? load_config(*run.config_path) : SimulationConfig{};
  return run_scenario(run, std::move(config));
}

ScenarioOutput run_scenario(const RunConfig& run, SimulationConfig config) {
  if (run.seed) config.seed = *run.seed;
  if (run.integration_time) {
    if (!(*run.integration_time >= 0.0)) throw ConfigError("--time", "must be nonnegative");
    config.integration_time = *run.integration_time;
    config.scan.time_per_point = *run.integration_time;
  }
  if (run.delay_fs) {
    if (!std::isfinite(*run.delay_fs)) throw ConfigError("--delay", "must be finite");
    set_delay(config.apparatus, *run.delay_fs);
  }
  std::filesystem::create_directories(run.output_dir);

  ScenarioOutput out;
  switch (run.scenario) {
    case Scenario::HvTable:
      out = table_scenario(run, config, with_overrides(MeasurementSetting::hv(), config));
      break;
    case Scenario::Basis45Table:
      out = table_scenario(run, config, with_overrides(MeasurementSetting::diagonal(), config));
      break;
    case Scenario::DelayScan: out = delay_scan_scenario(run, config); break;
    case Scenario::SwapReport: out = swap_report_scenario(run, config); break;
    case Scenario::Feasibility: out = feasibility_scenario(run, config); break;
  }
  const auto summary_path = run.output_dir / (std::string(to_string(run.scenario)) + "_summary.txt");
  write_text(summary_path, out.summary);
  out.files.push_back(summary_path);
  return out;
}

}  // namespace ghz
