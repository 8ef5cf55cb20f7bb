#include "ghz/optics.hpp"

#include <cmath>
#include <stdexcept>

#include "ghz/errors.hpp"

namespace ghz {

void validate(const PbsElement& pbs) {
  if (pbs.inputs[0] == pbs.inputs[1] || pbs.outputs[0] == pbs.outputs[1]) {
    throw std::invalid_argument("PBS ports must be distinct modes");
  }
  if (!(pbs.error_rate >= 0.0 && pbs.error_rate < 1.0)) {
    throw std::invalid_argument("PBS error rate must lie in [0, 1)");
  }
}

void validate(const PolarizerElement& pol) {
  if (!(pol.angle_deg >= 0.0 && pol.angle_deg < 180.0)) {
    throw std::invalid_argument("polarizer angle must lie in [0, 180) degrees");
  }
}

void validate(const DelayElement& delay) {
  if (!(delay.coherence_time_fs > 0.0)) {
    throw std::invalid_argument("coherence time must be positive");
  }
  if (!std::isfinite(delay.delay_fs)) throw std::invalid_argument("delay must be finite");
}

PureState apply_pbs(const PureState& state, const PbsElement& pbs, PbsRouting routing) {
  validate(pbs);
  PureState hv = state;
  for (int index : state.photons()) {
    const auto mode = state.fixed_mode(index);
    if (mode && (*mode == pbs.inputs[0] || *mode == pbs.inputs[1])) {
      hv = change_basis(hv, index, 0.0);
    }
  }

  PureState::Amplitudes amps;
  for (const auto& [ket, amp] : hv.amplitudes()) {
    std::vector<Photon> photons = ket.photons();
    std::array<int, 2> seen{0, 0};
    for (auto& p : photons) {
      for (int port = 0; port < 2; ++port) {
        if (p.label.mode != pbs.inputs[port]) continue;
        ++seen[port];
        const bool flip = port == 0 ? routing.flip_first : routing.flip_second;
        // H is transmitted (same port index), V reflected to the other port.
        int out = p.pol == Pol::H ? port : 1 - port;
        if (flip) out = 1 - out;
        p.label.mode = pbs.outputs[out];
        break;
      }
    }
    if (seen[0] != 1 || seen[1] != 1) {
      throw RoutingError("PBS needs exactly one photon in each of modes " +
                         std::string(to_string(pbs.inputs[0])) + " and " +
                         std::string(to_string(pbs.inputs[1])));
    }
    amps[BasisKet(std::move(photons))] += amp;
  }
  return PureState(std::move(amps), hv.basis_angles());
}

Conditioned apply_polarizer(const PureState& state, const PolarizerElement& pol) {
  validate(pol);
  const auto index = state.photon_in_mode(pol.mode);
  if (!index) {
    throw RoutingError("polarizer in mode " + std::string(to_string(pol.mode)) +
                       " needs exactly one photon there in every ket");
  }
  const PureState rotated = change_basis(state, *index, pol.angle_deg);
  const Pol kept = pol.branch == PolarizerBranch::Pass ? Pol::H : Pol::V;
  PureState::Amplitudes amps;
  for (const auto& [ket, amp] : rotated.amplitudes()) {
    if (ket.at_index(*index).pol == kept) amps.emplace(ket, amp);
  }
  const double total = state.squared_norm();
  PureState projected(std::move(amps), rotated.basis_angles());
  const double probability = total > 0.0 ? projected.squared_norm() / total : 0.0;
  if (projected.empty() || probability <= 0.0) return {std::nullopt, 0.0};
  return {normalized(projected), probability};
}

PureState remove_photon(const PureState& state, Mode mode) {
  const auto index = state.photon_in_mode(mode);
  if (!index) {
    throw RoutingError("no single photon in mode " + std::string(to_string(mode)));
  }
  std::optional<Pol> pol;
  PureState::Amplitudes amps;
  for (const auto& [ket, amp] : state.amplitudes()) {
    std::vector<Photon> rest;
    for (const auto& p : ket.photons()) {
      if (p.label.index == *index) {
        if (pol && *pol != p.pol) {
          throw std::invalid_argument("photon in mode " + std::string(to_string(mode)) +
                                      " is entangled with the rest and cannot be removed");
        }
        pol = p.pol;
      } else {
        rest.push_back(p);
      }
    }
    amps[BasisKet(std::move(rest))] += amp;
  }
  auto angles = state.basis_angles();
  angles.erase(*index);
  return PureState(std::move(amps), std::move(angles));
}

double distinguishability(const DelayElement& delay) {
  validate(delay);
  const double x = delay.delay_fs / delay.coherence_time_fs;
  return std::exp(-x * x);
}

Ensemble dephase_ensemble(const PureState& state, double overlap, double visibility_ceiling) {
  if (!(overlap >= 0.0 && overlap <= 1.0)) {
    throw std::invalid_argument("distinguishability overlap must lie in [0, 1]");
  }
  if (!(visibility_ceiling >= 0.0 && visibility_ceiling <= 1.0)) {
    throw std::invalid_argument("visibility ceiling must lie in [0, 1]");
  }
  const PureState hv = normalized(to_hv(state));
  if (hv.term_count() == 1) return {{1.0, hv}};
  if (hv.term_count() != 2) {
    throw std::invalid_argument("dephasing expects a two-branch state, got " +
                                std::to_string(hv.term_count()) + " terms");
  }
  PureState::Amplitudes flipped_amps = hv.amplitudes();
  std::next(flipped_amps.begin())->second *= -1.0;
  const double w = 0.5 * (1.0 + overlap * visibility_ceiling);
  return {{w, hv}, {1.0 - w, PureState(std::move(flipped_amps))}};
}

DensityMatrix dephase_by_distinguishability(const PureState& state, double overlap,
                                            double visibility_ceiling) {
  return mix(dephase_ensemble(state, overlap, visibility_ceiling));
}

}  // namespace ghz
