#include "ghz/experiment.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <future>
#include <limits>
#include <set>
#include <stdexcept>

#include "ghz/errors.hpp"
#include "ghz/random.hpp"

namespace ghz {

namespace {

std::uint32_t detector_bit(std::size_t detector) {
  return 1u << (kDetectorCount - 1 - detector);
}

std::pair<char, char> port_labels(double angle_deg) {
  auto near = [&](double a) { return std::abs(angle_deg - a) < 1e-9; };
  if (near(0.0)) return {'H', 'V'};
  if (near(90.0)) return {'V', 'H'};
  if (near(45.0)) return {'+', '-'};
  if (near(135.0)) return {'-', '+'};
  return {'P', 'O'};
}

std::vector<const PbsElement*> pbs_elements(const Apparatus& apparatus) {
  std::vector<const PbsElement*> out;
  for (const auto& e : apparatus.elements) {
    if (const auto* pbs = std::get_if<PbsElement>(&e)) out.push_back(pbs);
  }
  return out;
}

Apparatus with_delay(Apparatus apparatus, double delay_fs) {
  for (auto& e : apparatus.elements) {
    if (auto* d = std::get_if<DelayElement>(&e)) {
      d->delay_fs = delay_fs;
      return apparatus;
    }
  }
  apparatus.elements.emplace_back(DelayElement{delay_fs, kDefaultCoherenceTimeFs});
  return apparatus;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration types

Apparatus Apparatus::standard() {
  Apparatus a;
  a.sources = {PairSource{{1, 2}, {Mode::k1, Mode::k2}}, PairSource{{3, 4}, {Mode::k3, Mode::k4}}};
  a.elements = {PbsElement{}, DelayElement{}};
  return a;
}

void Apparatus::validate() const {
  if (!(visibility_ceiling >= 0.0 && visibility_ceiling <= 1.0)) {
    throw std::invalid_argument("visibility ceiling must lie in [0, 1]");
  }
  std::set<int> photons;
  std::set<Mode> modes;
  for (const auto& s : sources) {
    for (int k = 0; k < 2; ++k) {
      if (!photons.insert(s.photons[k]).second) {
        throw std::invalid_argument("photon " + std::to_string(s.photons[k]) +
                                    " emitted by two sources");
      }
      if (!modes.insert(s.modes[k]).second) {
        throw std::invalid_argument("mode " + std::string(to_string(s.modes[k])) +
                                    " fed by two sources");
      }
    }
  }
  if (photons.size() != kDetectorCount) {
    throw std::invalid_argument("four-fold detection needs exactly four source photons");
  }
  int delays = 0;
  for (const auto& e : elements) {
    if (const auto* pbs = std::get_if<PbsElement>(&e)) {
      ghz::validate(*pbs);
      for (Mode in : pbs->inputs) {
        if (!modes.erase(in)) {
          throw std::invalid_argument("PBS input mode " + std::string(to_string(in)) +
                                      " carries no photon at this point of the chain");
        }
      }
      for (Mode out : pbs->outputs) {
        if (!modes.insert(out).second) {
          throw std::invalid_argument("PBS output mode " + std::string(to_string(out)) +
                                      " already in use");
        }
      }
    } else if (const auto* pol = std::get_if<PolarizerElement>(&e)) {
      ghz::validate(*pol);
      if (!modes.contains(pol->mode)) {
        throw std::invalid_argument("polarizer mode " + std::string(to_string(pol->mode)) +
                                    " carries no photon");
      }
    } else {
      ghz::validate(std::get<DelayElement>(e));
      if (++delays > 1) throw std::invalid_argument("at most one delay element");
    }
  }
  std::set<Mode> seen;
  for (Mode d : detectors) {
    if (!seen.insert(d).second) {
      throw std::invalid_argument("detector mode " + std::string(to_string(d)) +
                                  " watched twice");
    }
    if (!modes.contains(d)) {
      throw std::invalid_argument("detector mode " + std::string(to_string(d)) +
                                  " carries no photon at the end of the chain");
    }
  }
}

DelayElement Apparatus::delay() const {
  for (const auto& e : elements) {
    if (const auto* d = std::get_if<DelayElement>(&e)) return *d;
  }
  return DelayElement{};
}

MeasurementSetting MeasurementSetting::uniform(double angle_deg) {
  MeasurementSetting s;
  s.analyzers.fill(angle_deg);
  return s;
}

void MeasurementSetting::validate() const {
  for (const auto& a : analyzers) {
    if (a && !(*a >= 0.0 && *a < 180.0)) {
      throw std::invalid_argument("analyzer angle must lie in [0, 180) degrees");
    }
  }
}

void RateModel::validate() const {
  if (!(fourfold_rate_desired >= 0.0) || !(background_fourfold_rate >= 0.0) ||
      !(dark_count_rate >= 0.0)) {
    throw std::invalid_argument("rates must be nonnegative");
  }
  if (!(detector_efficiency > 0.0 && detector_efficiency <= 1.0)) {
    throw std::invalid_argument("detector efficiency must lie in (0, 1]");
  }
  if (!(coincidence_window > 0.0)) {
    throw std::invalid_argument("coincidence window must be positive");
  }
}

std::uint64_t CountTable::count(std::string_view key) const {
  for (const auto& c : counts) {
    if (c.outcome.key == key) return c.count;
  }
  throw std::out_of_range("no outcome '" + std::string(key) + "' in count table");
}

std::uint64_t CountTable::total() const {
  std::uint64_t sum = 0;
  for (const auto& c : counts) sum += c.count;
  return sum;
}

std::vector<Outcome> enumerate_outcomes(const MeasurementSetting& setting) {
  std::vector<std::size_t> analyzed;
  for (std::size_t k = 0; k < kDetectorCount; ++k) {
    if (setting.analyzers[k]) analyzed.push_back(k);
  }
  std::vector<Outcome> out;
  const std::uint32_t n = 1u << analyzed.size();
  for (std::uint32_t m = 0; m < n; ++m) {
    Outcome o;
    o.key.assign(kDetectorCount, '*');
    for (std::size_t j = 0; j < analyzed.size(); ++j) {
      const std::size_t k = analyzed[j];
      const bool orthogonal = (m >> (analyzed.size() - 1 - j)) & 1u;
      const auto [par, orth] = port_labels(*setting.analyzers[k]);
      o.key[k] = orthogonal ? orth : par;
      if (orthogonal) o.bits |= detector_bit(k);
    }
    out.push_back(std::move(o));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact algebra

Conditioned postselect_fourfold(const PureState& state, std::span<const Mode> modes) {
  if (std::set<Mode>(modes.begin(), modes.end()).size() != modes.size()) {
    throw std::invalid_argument("post-selection modes must be distinct");
  }
  const PureState hv = to_hv(state);
  PureState::Amplitudes amps;
  for (const auto& [ket, amp] : hv.amplitudes()) {
    if (ket.size() != modes.size()) continue;
    std::vector<Photon> relabelled;
    bool one_each = true;
    for (std::size_t k = 0; k < modes.size() && one_each; ++k) {
      const auto found = ket.in_mode(modes[k]);
      if (found.size() != 1) {
        one_each = false;
        break;
      }
      relabelled.push_back({{static_cast<int>(k) + 1, modes[k]}, found.front().pol});
    }
    if (!one_each) continue;
    amps[BasisKet(std::move(relabelled))] += amp;
  }
  PureState kept(std::move(amps));
  const double total = hv.squared_norm();
  const double probability = total > 0.0 ? kept.squared_norm() / total : 0.0;
  if (!(probability > 0.0)) return {std::nullopt, 0.0};
  return {normalized(kept), probability};
}

PureState source_state(const Apparatus& apparatus) {
  PureState state;
  for (const auto& s : apparatus.sources) {
    const PureState pair = spdc_pair(PhotonLabel{s.photons[0], s.modes[0]},
                                     PhotonLabel{s.photons[1], s.modes[1]});
    state = state.empty() ? pair : tensor(state, pair);
  }
  return state;
}

namespace {

struct ChainOutput {
  Conditioned fourfold;
  std::vector<PolarizerElement> polarizers;
};

ChainOutput run_chain(const Apparatus& apparatus, std::span<const PbsRouting> routings) {
  PureState state = source_state(apparatus);
  ChainOutput out;
  std::size_t pbs_index = 0;
  for (const auto& e : apparatus.elements) {
    if (const auto* pbs = std::get_if<PbsElement>(&e)) {
      const PbsRouting routing = pbs_index < routings.size() ? routings[pbs_index] : PbsRouting{};
      state = apply_pbs(state, *pbs, routing);
      ++pbs_index;
    } else if (const auto* pol = std::get_if<PolarizerElement>(&e)) {
      out.polarizers.push_back(*pol);
    }
  }
  // Any ket with two photons in one mode leaves another detector dark, so
  // post-selecting before the polarizers loses nothing.
  out.fourfold = postselect_fourfold(state, apparatus.detectors);
  return out;
}

// Dephasing acts at the PBS; chain polarizers then filter each member.
std::pair<Ensemble, double> conditioned_ensemble(const Apparatus& apparatus,
                                                 std::span<const PbsRouting> routings,
                                                 double overlap) {
  const ChainOutput chain = run_chain(apparatus, routings);
  if (!chain.fourfold.state) return {{}, 0.0};
  Ensemble members = dephase_ensemble(*chain.fourfold.state, overlap, apparatus.visibility_ceiling);
  double kept = 1.0;
  if (!chain.polarizers.empty()) {
    Ensemble filtered;
    kept = 0.0;
    for (const auto& [weight, member] : members) {
      Conditioned c{member, 1.0};
      for (const auto& pol : chain.polarizers) {
        if (!c.state) break;
        const Conditioned next = apply_polarizer(*c.state, pol);
        c = {next.state, c.probability * next.probability};
      }
      if (!c.state) continue;
      filtered.emplace_back(weight * c.probability, *c.state);
      kept += weight * c.probability;
    }
    for (auto& m : filtered) m.first /= kept;
    members = std::move(filtered);
  }
  return {std::move(members), chain.fourfold.probability * kept};
}

}  // namespace

Conditioned propagate(const Apparatus& apparatus, std::span<const PbsRouting> routings) {
  const ChainOutput chain = run_chain(apparatus, routings);
  Conditioned out = chain.fourfold;
  for (const auto& pol : chain.polarizers) {
    if (!out.state) break;
    const Conditioned next = apply_polarizer(*out.state, pol);
    out = {next.state, out.probability * next.probability};
  }
  return out;
}

OutcomeTable outcome_probabilities(const PureState& state, const MeasurementSetting& setting) {
  setting.validate();
  if (state.photon_count() != static_cast<int>(kDetectorCount)) {
    throw std::invalid_argument("outcome probabilities need a four-photon state");
  }
  PureState rotated = state;
  for (std::size_t k = 0; k < kDetectorCount; ++k) {
    rotated = change_basis(rotated, state.photons()[k], setting.analyzers[k].value_or(0.0));
  }
  const auto outcomes = enumerate_outcomes(setting);
  OutcomeTable table;
  for (const auto& o : outcomes) table.push_back({o, 0.0});

  std::uint32_t analyzed_mask = 0;
  for (std::size_t k = 0; k < kDetectorCount; ++k) {
    if (setting.analyzers[k]) analyzed_mask |= detector_bit(k);
  }
  const double norm2 = rotated.squared_norm();
  for (const auto& [ket, amp] : rotated.amplitudes()) {
    std::uint32_t bits = 0;
    for (std::size_t k = 0; k < kDetectorCount; ++k) {
      if (ket.photons()[k].pol == Pol::V) bits |= detector_bit(k);
    }
    bits &= analyzed_mask;
    for (auto& row : table) {
      if (row.outcome.bits == bits) {
        row.probability += std::norm(amp) / norm2;
        break;
      }
    }
  }
  return table;
}

OutcomeTable outcome_probabilities(const Ensemble& ensemble, const MeasurementSetting& setting) {
  OutcomeTable total;
  for (const auto& [weight, state] : ensemble) {
    const OutcomeTable part = outcome_probabilities(state, setting);
    if (total.empty()) {
      total = part;
      for (auto& row : total) row.probability *= weight;
    } else {
      for (std::size_t i = 0; i < total.size(); ++i) {
        total[i].probability += weight * part[i].probability;
      }
    }
  }
  return total;
}

OutcomeTable exact_outcome_probabilities(const Apparatus& apparatus,
                                         const MeasurementSetting& setting,
                                         const DelayElement& delay, double visibility_ceiling) {
  Apparatus configured = apparatus;
  configured.visibility_ceiling = visibility_ceiling;
  configured.validate();
  const auto [members, probability] =
      conditioned_ensemble(configured, {}, distinguishability(delay));
  if (!(probability > 0.0)) {
    throw ImpossibleOutcomeError("the apparatus never produces a four-fold coincidence");
  }
  return outcome_probabilities(members, setting);
}

OutcomeTable exact_outcome_probabilities(const Apparatus& apparatus,
                                         const MeasurementSetting& setting) {
  return exact_outcome_probabilities(apparatus, setting, apparatus.delay(),
                                     apparatus.visibility_ceiling);
}

double correlation(const OutcomeTable& table) {
  double e = 0.0;
  for (const auto& row : table) {
    e += (std::popcount(row.outcome.bits) % 2 == 0 ? 1.0 : -1.0) * row.probability;
  }
  return e;
}

// ---------------------------------------------------------------------------
// Monte Carlo

std::vector<double> expected_counts(const Apparatus& apparatus, const MeasurementSetting& setting,
                                    const RateModel& rates, double integration_time) {
  apparatus.validate();
  setting.validate();
  rates.validate();
  if (!(integration_time >= 0.0)) {
    throw std::invalid_argument("integration time must be nonnegative");
  }
  const auto outcomes = enumerate_outcomes(setting);
  std::vector<double> signal(outcomes.size(), 0.0);

  const double overlap = distinguishability(apparatus.delay());
  const double ideal_probability = conditioned_ensemble(apparatus, {}, overlap).second;
  if (!(ideal_probability > 0.0)) {
    throw ImpossibleOutcomeError("the apparatus never produces a four-fold coincidence");
  }

  // Independent wrong-port routing per photon and PBS, summed incoherently.
  const auto splitters = pbs_elements(apparatus);
  const std::size_t flips = 2 * splitters.size();
  for (std::uint32_t mask = 0; mask < (1u << flips); ++mask) {
    double weight = 1.0;
    std::vector<PbsRouting> routings(splitters.size());
    for (std::size_t b = 0; b < flips; ++b) {
      const bool flip = (mask >> b) & 1u;
      const double eps = splitters[b / 2]->error_rate;
      weight *= flip ? eps : 1.0 - eps;
      (b % 2 == 0 ? routings[b / 2].flip_first : routings[b / 2].flip_second) = flip;
    }
    if (weight == 0.0) continue;
    const auto [members, probability] = conditioned_ensemble(apparatus, routings, overlap);
    if (!(probability > 0.0)) continue;
    const OutcomeTable probs = outcome_probabilities(members, setting);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      signal[i] += weight * probability * probs[i].probability;
    }
  }

  const double eta4 = std::pow(rates.detector_efficiency, 4);
  const double w = rates.coincidence_window;
  const double accidental =
      4.0 * std::pow(rates.dark_count_rate, 4) * w * w * w / static_cast<double>(outcomes.size());
  std::vector<double> means(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const double genuine = rates.fourfold_rate_desired * eta4 * signal[i] / ideal_probability;
    means[i] = (genuine + rates.background_fourfold_rate + accidental) * integration_time;
  }
  return means;
}

namespace {

CountTable sample_table(const std::vector<Outcome>& outcomes, const std::vector<double>& means,
                        double integration_time, std::uint64_t seed, std::uint64_t stream) {
  RandomEngine engine = make_stream(seed, stream);
  CountTable table;
  table.integration_time = integration_time;
  table.seed = seed;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    table.counts.push_back({outcomes[i], sample_poisson(engine, means[i])});
  }
  return table;
}

}  // namespace

CountTable monte_carlo_counts(const Apparatus& apparatus, const MeasurementSetting& setting,
                              const RateModel& rates, double integration_time,
                              std::uint64_t seed) {
  const auto means = expected_counts(apparatus, setting, rates, integration_time);
  return sample_table(enumerate_outcomes(setting), means, integration_time, seed, 0);
}

std::vector<ScanPoint> delay_scan(const Apparatus& apparatus, const MeasurementSetting& setting,
                                  std::span<const double> delays_fs, const RateModel& rates,
                                  double time_per_point, std::uint64_t seed) {
  const auto outcomes = enumerate_outcomes(setting);
  std::vector<std::future<ScanPoint>> jobs;
  jobs.reserve(delays_fs.size());
  for (std::size_t i = 0; i < delays_fs.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [&, i] {
      const Apparatus at = with_delay(apparatus, delays_fs[i]);
      const auto means = expected_counts(at, setting, rates, time_per_point);
      return ScanPoint{delays_fs[i], sample_table(outcomes, means, time_per_point, seed, i)};
    }));
  }
  std::vector<ScanPoint> points;
  points.reserve(jobs.size());
  for (auto& j : jobs) points.push_back(j.get());
  return points;
}

Conditioned three_photon_ghz(const Apparatus& apparatus, Mode polarizer_mode, double angle_deg) {
  apparatus.validate();
  const Conditioned four = propagate(apparatus);
  if (!four.state) {
    throw ImpossibleOutcomeError("the apparatus never produces a four-fold coincidence");
  }
  const Conditioned projected =
      apply_polarizer(*four.state, PolarizerElement{polarizer_mode, angle_deg, PolarizerBranch::Pass});
  if (!projected.state) return {std::nullopt, 0.0};
  return {remove_photon(*projected.state, polarizer_mode), projected.probability};
}

double feasibility_estimate(double target_events, const RateModel& rates) {
  rates.validate();
  if (!(target_events >= 0.0)) throw std::invalid_argument("target events must be nonnegative");
  if (target_events == 0.0) return 0.0;
  const double rate = rates.fourfold_rate_desired * std::pow(rates.detector_efficiency, 4);
  if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
  return target_events / rate;
}

}  // namespace ghz
