#include "ghz/config.hpp"

#include <fstream>
#include <set>

#include "ghz/errors.hpp"

namespace ghz {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::string& where, std::set<std::string> allowed) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
    }
  }
}

template <typename T>
T read(const json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path, "wrong value type");
  }
}

double read_number(const json& j, const std::string& key, const std::string& path,
                   double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(path, "expected a number");
  return j.at(key).get<double>();
}

Mode read_mode(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a mode string such as \"2'\"");
  try {
    return parse_mode(j.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

std::array<Mode, 2> read_mode_pair(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected two modes");
  return {read_mode(j[0], path + "[0]"), read_mode(j[1], path + "[1]")};
}

Element read_element(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("type")) throw ConfigError(path + ".type", "missing");
  const std::string type = read<std::string>(j, "type", path + ".type", "");
  if (type == "pbs") {
    reject_unknown(j, path, {"type", "inputs", "outputs", "error_rate"});
    PbsElement pbs;
    if (j.contains("inputs")) pbs.inputs = read_mode_pair(j["inputs"], path + ".inputs");
    if (j.contains("outputs")) pbs.outputs = read_mode_pair(j["outputs"], path + ".outputs");
    pbs.error_rate = read_number(j, "error_rate", path + ".error_rate", 0.0);
    return pbs;
  }
  if (type == "polarizer") {
    reject_unknown(j, path, {"type", "mode", "angle_deg", "branch"});
    PolarizerElement pol;
    if (j.contains("mode")) pol.mode = read_mode(j["mode"], path + ".mode");
    pol.angle_deg = read_number(j, "angle_deg", path + ".angle_deg", pol.angle_deg);
    const auto branch = read<std::string>(j, "branch", path + ".branch", "pass");
    if (branch == "pass") pol.branch = PolarizerBranch::Pass;
    else if (branch == "reject") pol.branch = PolarizerBranch::Reject;
    else throw ConfigError(path + ".branch", "expected \"pass\" or \"reject\"");
    return pol;
  }
  if (type == "delay") {
    reject_unknown(j, path, {"type", "delay_fs", "coherence_time_fs"});
    DelayElement d;
    d.delay_fs = read_number(j, "delay_fs", path + ".delay_fs", 0.0);
    d.coherence_time_fs =
        read_number(j, "coherence_time_fs", path + ".coherence_time_fs", kDefaultCoherenceTimeFs);
    return d;
  }
  throw ConfigError(path + ".type", "unknown element type '" + type + "'");
}

Apparatus read_apparatus(const json& j) {
  const std::string path = "apparatus";
  reject_unknown(j, path, {"sources", "elements", "detectors", "visibility_ceiling"});
  Apparatus a = Apparatus::standard();
  if (j.contains("sources")) {
    if (!j["sources"].is_array()) throw ConfigError(path + ".sources", "expected an array");
    a.sources.clear();
    for (std::size_t i = 0; i < j["sources"].size(); ++i) {
      const auto& s = j["sources"][i];
      const std::string sp = path + ".sources[" + std::to_string(i) + "]";
      reject_unknown(s, sp, {"photons", "modes"});
      PairSource src;
      try {
        src.photons = s.at("photons").get<std::array<int, 2>>();
      } catch (const json::exception&) {
        throw ConfigError(sp + ".photons", "expected two photon indices");
      }
      if (!s.contains("modes")) throw ConfigError(sp + ".modes", "missing");
      src.modes = read_mode_pair(s["modes"], sp + ".modes");
      a.sources.push_back(src);
    }
  }
  if (j.contains("elements")) {
    if (!j["elements"].is_array()) throw ConfigError(path + ".elements", "expected an array");
    a.elements.clear();
    for (std::size_t i = 0; i < j["elements"].size(); ++i) {
      a.elements.push_back(
          read_element(j["elements"][i], path + ".elements[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("detectors")) {
    const auto& d = j["detectors"];
    reject_unknown(d, path + ".detectors", {"D1", "D2", "D3", "D4"});
    for (std::size_t k = 0; k < kDetectorCount; ++k) {
      const std::string name = "D" + std::to_string(k + 1);
      if (d.contains(name)) a.detectors[k] = read_mode(d[name], path + ".detectors." + name);
    }
  }
  a.visibility_ceiling =
      read_number(j, "visibility_ceiling", path + ".visibility_ceiling", a.visibility_ceiling);
  try {
    a.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  return a;
}

RateModel read_rates(const json& j) {
  const std::string path = "rates";
  reject_unknown(j, path,
                 {"fourfold_rate_desired", "background_fourfold_rate", "detector_efficiency",
                  "dark_count_rate", "coincidence_window"});
  RateModel r;
  r.fourfold_rate_desired = read_number(j, "fourfold_rate_desired",
                                        path + ".fourfold_rate_desired", r.fourfold_rate_desired);
  r.background_fourfold_rate =
      read_number(j, "background_fourfold_rate", path + ".background_fourfold_rate",
                  r.background_fourfold_rate);
  r.detector_efficiency = read_number(j, "detector_efficiency", path + ".detector_efficiency",
                                      r.detector_efficiency);
  r.dark_count_rate = read_number(j, "dark_count_rate", path + ".dark_count_rate",
                                  r.dark_count_rate);
  r.coincidence_window = read_number(j, "coincidence_window", path + ".coincidence_window",
                                     r.coincidence_window);
  try {
    r.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  return r;
}

json element_to_json(const Element& e) {
  if (const auto* pbs = std::get_if<PbsElement>(&e)) {
    return {{"type", "pbs"},
            {"inputs", {to_string(pbs->inputs[0]), to_string(pbs->inputs[1])}},
            {"outputs", {to_string(pbs->outputs[0]), to_string(pbs->outputs[1])}},
            {"error_rate", pbs->error_rate}};
  }
  if (const auto* pol = std::get_if<PolarizerElement>(&e)) {
    return {{"type", "polarizer"},
            {"mode", to_string(pol->mode)},
            {"angle_deg", pol->angle_deg},
            {"branch", pol->branch == PolarizerBranch::Pass ? "pass" : "reject"}};
  }
  const auto& d = std::get<DelayElement>(e);
  return {{"type", "delay"}, {"delay_fs", d.delay_fs}, {"coherence_time_fs", d.coherence_time_fs}};
}

}  // namespace

double BellTestPlan::target_events() const {
  return static_cast<double>(configurations) * counts_per_configuration / configuration_fraction;
}

std::vector<double> SimulationConfig::default_scan_delays() {
  std::vector<double> delays;
  for (int k = -11; k <= 11; ++k) delays.push_back(200.0 * k);
  return delays;
}

SimulationConfig config_from_json(const json& j) {
  reject_unknown(j, "",
                 {"apparatus", "rates", "seed", "integration_time_s", "analyzers", "delay_scan",
                  "bell_test", "swap_state_weight"});
  SimulationConfig c;
  if (j.contains("apparatus")) c.apparatus = read_apparatus(j["apparatus"]);
  if (j.contains("rates")) c.rates = read_rates(j["rates"]);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed", "expected an unsigned integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  c.integration_time = read_number(j, "integration_time_s", "integration_time_s", c.integration_time);
  if (!(c.integration_time >= 0.0)) throw ConfigError("integration_time_s", "must be nonnegative");

  if (j.contains("analyzers")) {
    const auto& a = j["analyzers"];
    reject_unknown(a, "analyzers", {"D1", "D2", "D3", "D4"});
    for (std::size_t k = 0; k < kDetectorCount; ++k) {
      const std::string name = "D" + std::to_string(k + 1);
      if (!a.contains(name)) continue;
      const double angle = read_number(a, name, "analyzers." + name, 0.0);
      if (!(angle >= 0.0 && angle < 180.0)) {
        throw ConfigError("analyzers." + name, "angle must lie in [0, 180)");
      }
      c.analyzer_overrides[k] = angle;
    }
  }
  if (j.contains("delay_scan")) {
    const auto& s = j["delay_scan"];
    reject_unknown(s, "delay_scan", {"delays_fs", "time_per_point_s"});
    if (s.contains("delays_fs")) {
      if (!s["delays_fs"].is_array() || s["delays_fs"].empty()) {
        throw ConfigError("delay_scan.delays_fs", "expected a nonempty array of numbers");
      }
      c.scan.delays_fs.clear();
      for (const auto& d : s["delays_fs"]) {
        if (!d.is_number()) throw ConfigError("delay_scan.delays_fs", "expected numbers");
        c.scan.delays_fs.push_back(d.get<double>());
      }
    }
    c.scan.time_per_point =
        read_number(s, "time_per_point_s", "delay_scan.time_per_point_s", c.scan.time_per_point);
    if (!(c.scan.time_per_point >= 0.0)) {
      throw ConfigError("delay_scan.time_per_point_s", "must be nonnegative");
    }
  }
  if (j.contains("bell_test")) {
    const auto& b = j["bell_test"];
    reject_unknown(b, "bell_test",
                   {"configurations", "counts_per_configuration", "configuration_fraction", "note"});
    c.bell_test.configurations =
        read<int>(b, "configurations", "bell_test.configurations", c.bell_test.configurations);
    c.bell_test.counts_per_configuration =
        read_number(b, "counts_per_configuration", "bell_test.counts_per_configuration",
                    c.bell_test.counts_per_configuration);
    c.bell_test.configuration_fraction =
        read_number(b, "configuration_fraction", "bell_test.configuration_fraction",
                    c.bell_test.configuration_fraction);
    if (c.bell_test.configurations < 0 || !(c.bell_test.counts_per_configuration >= 0.0)) {
      throw ConfigError("bell_test", "counts must be nonnegative");
    }
    if (!(c.bell_test.configuration_fraction > 0.0 && c.bell_test.configuration_fraction <= 1.0)) {
      throw ConfigError("bell_test.configuration_fraction", "must lie in (0, 1]");
    }
  }
  c.swap_state_weight = read_number(j, "swap_state_weight", "swap_state_weight",
                                    c.swap_state_weight);
  if (!(c.swap_state_weight >= 0.0 && c.swap_state_weight <= 1.0)) {
    throw ConfigError("swap_state_weight", "must lie in [0, 1]");
  }
  return c;
}

json to_json(const SimulationConfig& c) {
  json elements = json::array();
  for (const auto& e : c.apparatus.elements) elements.push_back(element_to_json(e));
  json sources = json::array();
  for (const auto& s : c.apparatus.sources) {
    sources.push_back({{"photons", s.photons},
                       {"modes", {to_string(s.modes[0]), to_string(s.modes[1])}}});
  }
  json detectors = json::object();
  for (std::size_t k = 0; k < kDetectorCount; ++k) {
    detectors["D" + std::to_string(k + 1)] = to_string(c.apparatus.detectors[k]);
  }
  json analyzers = json::object();
  for (std::size_t k = 0; k < kDetectorCount; ++k) {
    if (c.analyzer_overrides[k]) analyzers["D" + std::to_string(k + 1)] = *c.analyzer_overrides[k];
  }
  json out = {
      {"apparatus",
       {{"sources", sources},
        {"elements", elements},
        {"detectors", detectors},
        {"visibility_ceiling", c.apparatus.visibility_ceiling}}},
      {"rates",
       {{"fourfold_rate_desired", c.rates.fourfold_rate_desired},
        {"background_fourfold_rate", c.rates.background_fourfold_rate},
        {"detector_efficiency", c.rates.detector_efficiency},
        {"dark_count_rate", c.rates.dark_count_rate},
        {"coincidence_window", c.rates.coincidence_window}}},
      {"seed", c.seed},
      {"integration_time_s", c.integration_time},
      {"delay_scan", {{"delays_fs", c.scan.delays_fs}, {"time_per_point_s", c.scan.time_per_point}}},
      {"bell_test",
       {{"configurations", c.bell_test.configurations},
        {"counts_per_configuration", c.bell_test.counts_per_configuration},
        {"configuration_fraction", c.bell_test.configuration_fraction},
        {"note",
         "target four-folds = configurations * counts_per_configuration / "
         "configuration_fraction; 32 configurations = 4 CHSH setting pairs x 4 outcomes of "
         "photons 1/4 x 2 phi+ heralds (++, --) on 2'/3'"}}},
      {"swap_state_weight", c.swap_state_weight},
  };
  if (!analyzers.empty()) out["analyzers"] = analyzers;
  return out;
}

SimulationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace ghz
