// Two-source apparatus: exact post-selected outcome probabilities and
// seeded Monte Carlo four-fold coincidence counts.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ghz/optics.hpp"
#include "ghz/polarization.hpp"

namespace ghz {

/// One down-conversion source emitting a singlet on two photons/modes.
struct PairSource {
  std::array<int, 2> photons{1, 2};
  std::array<Mode, 2> modes{Mode::k1, Mode::k2};
};

using Element = std::variant<PbsElement, PolarizerElement, DelayElement>;

inline constexpr std::size_t kDetectorCount = 4;

struct Apparatus {
  std::vector<PairSource> sources;
  std::vector<Element> elements;
  /// Detector D(k+1) watches detectors[k].
  std::array<Mode, kDetectorCount> detectors{Mode::k1, Mode::k2p, Mode::k3p, Mode::k4};
  /// Zero-delay interference contrast V0.
  double visibility_ceiling = kDefaultVisibilityCeiling;

  /// Sources A (1,2) and B (3,4), a PBS on modes 2/3, zero delay.
  static Apparatus standard();

  /// Throws std::invalid_argument on duplicate detector modes, bad
  /// elements, or PBS inputs that no source feeds.
  void validate() const;

  /// The chain's delay element, or a zero-delay default.
  DelayElement delay() const;
};

/// Per-detector analyzer angle in degrees; nullopt means no polarizer.
struct MeasurementSetting {
  std::array<std::optional<double>, kDetectorCount> analyzers{};

  static MeasurementSetting uniform(double angle_deg);
  static MeasurementSetting hv() { return uniform(0.0); }
  static MeasurementSetting diagonal() { return uniform(45.0); }
  void validate() const;
};

struct RateModel {
  /// Post-selected four-folds per second summed over all outcomes
  /// (ideal PBS, unit efficiency). 200 per 6000 s: 100 per desired term.
  double fourfold_rate_desired = 200.0 / 6000.0;
  /// Flat floor per outcome combination, 0.5 per 6000 s.
  double background_fourfold_rate = 0.5 / 6000.0;
  double detector_efficiency = 1.0;
  double dark_count_rate = 0.0;
  double coincidence_window = 5e-9;

  void validate() const;
};

/// One outcome combination: bit k set means detector k+1 saw the
/// orthogonal (|θ+90°⟩) port of its analyzer.
struct Outcome {
  std::string key;
  std::uint32_t bits = 0;
};

struct OutcomeProbability {
  Outcome outcome;
  double probability = 0.0;
};

using OutcomeTable = std::vector<OutcomeProbability>;

struct OutcomeCount {
  Outcome outcome;
  std::uint64_t count = 0;
};

struct CountTable {
  std::vector<OutcomeCount> counts;
  double integration_time = 0.0;
  std::uint64_t seed = 0;

  /// Count for an outcome key; throws std::out_of_range for unknown keys.
  std::uint64_t count(std::string_view key) const;
  std::uint64_t total() const;
};

/// Outcome combinations of a setting in bit order. Labels per detector:
/// 0° → H/V, 90° → V/H, 45° → +/-, 135° → -/+, other angles → P/O.
std::vector<Outcome> enumerate_outcomes(const MeasurementSetting& setting);

/// Keeps kets with exactly one photon in each listed mode and renumbers the
/// photons 1..n in list order (photon k sits in modes[k-1]). Kets that
/// coincide after renumbering add coherently.
Conditioned postselect_fourfold(const PureState& state, std::span<const Mode> modes);

/// Source state of the apparatus, ⊗ of one singlet per source.
PureState source_state(const Apparatus& apparatus);

/// Source → PBS(s) → four-fold post-selection on the detector modes,
/// ideal routing unless `routings` (one per PBS element) is given.
Conditioned propagate(const Apparatus& apparatus, std::span<const PbsRouting> routings = {});

/// Outcome probabilities of a four-photon pure state whose photon k is
/// read by detector k. Unanalyzed detectors are marginalized.
OutcomeTable outcome_probabilities(const PureState& state, const MeasurementSetting& setting);
OutcomeTable outcome_probabilities(const Ensemble& ensemble, const MeasurementSetting& setting);

/// Probabilities over the outcome combinations conditioned on a four-fold
/// coincidence, after partial distinguishability at `delay` and V0.
OutcomeTable exact_outcome_probabilities(const Apparatus& apparatus,
                                         const MeasurementSetting& setting,
                                         const DelayElement& delay, double visibility_ceiling);
/// Uses the apparatus' own delay element and visibility ceiling.
OutcomeTable exact_outcome_probabilities(const Apparatus& apparatus,
                                         const MeasurementSetting& setting);

/// Σ p(outcome)·(±1 per analyzed detector), + for the |θ⟩ port.
double correlation(const OutcomeTable& table);

/// Poisson means per outcome for a Monte Carlo run, including PBS
/// misrouting, efficiency, background floor and dark-count accidentals.
std::vector<double> expected_counts(const Apparatus& apparatus, const MeasurementSetting& setting,
                                    const RateModel& rates, double integration_time);

CountTable monte_carlo_counts(const Apparatus& apparatus, const MeasurementSetting& setting,
                              const RateModel& rates, double integration_time,
                              std::uint64_t seed);

struct ScanPoint {
  double delay_fs = 0.0;
  CountTable table;
};

/// One Monte Carlo table per delay; point i draws from stream (seed, i).
std::vector<ScanPoint> delay_scan(const Apparatus& apparatus, const MeasurementSetting& setting,
                                  std::span<const double> delays_fs, const RateModel& rates,
                                  double time_per_point, std::uint64_t seed);

/// Three-photon GHZ state: the four-fold output conditioned on one polarizer
/// at `polarizer_mode`, with the measured photon removed.
Conditioned three_photon_ghz(const Apparatus& apparatus, Mode polarizer_mode, double angle_deg);

/// Seconds needed to collect `target_events` signal four-folds; +inf when
/// the effective rate is zero.
double feasibility_estimate(double target_events, const RateModel& rates);

}  // namespace ghz
