// Optical elements of the two-source apparatus acting on mode-labelled
// polarization states.
#pragma once

#include <array>
#include <optional>

#include "ghz/polarization.hpp"

namespace ghz {

/// Polarizing beam-splitter. H entering inputs[0] leaves through outputs[0],
/// V entering inputs[0] through outputs[1]; H entering inputs[1] leaves
/// through outputs[1], V entering inputs[1] through outputs[0].
struct PbsElement {
  std::array<Mode, 2> inputs{Mode::k2, Mode::k3};
  std::array<Mode, 2> outputs{Mode::k2p, Mode::k3p};
  /// Per-photon wrong-port probability; only the Monte Carlo engine uses it.
  double error_rate = 0.0;
};

/// Which input ports route their photon to the wrong output.
struct PbsRouting {
  bool flip_first = false;
  bool flip_second = false;
};

enum class PolarizerBranch : std::uint8_t { Pass, Reject };

struct PolarizerElement {
  Mode mode = Mode::k2p;
  double angle_deg = 45.0;
  PolarizerBranch branch = PolarizerBranch::Pass;
};

inline constexpr double kDefaultCoherenceTimeFs = 550.0;
inline constexpr double kDefaultVisibilityCeiling = 0.79;

/// Relative arrival delay of the two photons meeting at the PBS.
struct DelayElement {
  double delay_fs = 0.0;
  double coherence_time_fs = kDefaultCoherenceTimeFs;
};

/// A state conditioned on a detection event. `state` is empty when the
/// event cannot happen (probability 0).
struct Conditioned {
  std::optional<PureState> state;
  double probability = 0.0;
};

void validate(const PbsElement& pbs);
void validate(const PolarizerElement& pol);
void validate(const DelayElement& delay);

/// Routes the photons of both input modes. Requires exactly one photon in
/// each input mode of every ket; the result may hold two photons in one
/// output mode. Photons in the input modes are expressed in H/V first.
PureState apply_pbs(const PureState& state, const PbsElement& pbs, PbsRouting routing = {});

/// Projects the photon in `pol.mode` onto |angle⟩ (pass) or |angle+90°⟩
/// (reject). The photon stays in the state with a definite polarization.
Conditioned apply_polarizer(const PureState& state, const PolarizerElement& pol);

/// Drops the photon in `mode`, which must factor out of the state
/// (definite polarization in its current basis across all kets).
PureState remove_photon(const PureState& state, Mode mode);

/// Wave-packet overlap D(τ) = exp(-τ²/τc²).
double distinguishability(const DelayElement& delay);

/// The two-component mixture w|Ψ⟩⟨Ψ| + (1-w)|Φ⟩⟨Φ| with w = (1 + D·V0)/2,
/// where Φ flips the sign of the second branch of a two-branch state.
/// Single-ket states come back as a pure one-element ensemble.
Ensemble dephase_ensemble(const PureState& state, double overlap,
                          double visibility_ceiling = kDefaultVisibilityCeiling);

DensityMatrix dephase_by_distinguishability(const PureState& state, double overlap,
                                            double visibility_ceiling = kDefaultVisibilityCeiling);

}  // namespace ghz
