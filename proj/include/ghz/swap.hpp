// Entanglement swapping: Bell-basis decomposition, Bell projection of one
// photon pair, and the resulting pair's fidelity / visibility / CHSH value.
#pragma once

#include <array>
#include <span>
#include <string>
#include <variant>

#include "ghz/experiment.hpp"
#include "ghz/polarization.hpp"

namespace ghz {

/// coefficients[a][b] = ⟨Bell_a(pair_a) ⊗ Bell_b(pair_b)|ψ⟩, indexed in
/// kBellKinds order.
struct BellDecomposition {
  std::array<int, 2> pair_a{1, 4};
  std::array<int, 2> pair_b{2, 3};
  std::array<std::array<Complex, 4>, 4> coefficients{};

  Complex coefficient(BellKind a, BellKind b) const {
    return coefficients[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  }
};

BellDecomposition bell_decompose(const PureState& state, std::array<int, 2> pair_a = {1, 4},
                                 std::array<int, 2> pair_b = {2, 3});

/// Σ coefficient · Bell ⊗ Bell, with modes taken from `like`.
PureState reconstruct(const BellDecomposition& decomposition, const PureState& like);

struct SwapResult {
  DensityMatrix conditioned_state{{}, Eigen::MatrixXcd::Ones(1, 1)};
  double projection_probability = 0.0;
  double fidelity_to_target = 0.0;
  /// ⟨σx⊗σx⟩: P(same) - P(different) in the ±45° basis.
  double visibility_45 = 0.0;
  double chsh = 0.0;
  BellKind target = BellKind::PhiPlus;
};

using StateOrMixture = std::variant<PureState, DensityMatrix>;

/// Projects the two photons in `pair` onto Bell state `kind` and returns
/// the remaining pair's state; its target is the same Bell kind.
/// Throws ImpossibleOutcomeError for zero-probability projections.
SwapResult project_bell(const StateOrMixture& input, std::array<Mode, 2> pair, BellKind kind);

/// ±45° analyzers on 2' and 3': equal-sign coincidences (++ and --) herald
/// φ⁺ on the remaining pair, opposite-sign (+- and -+) herald φ⁻. Inputs
/// must lie in the PBS coincidence subspace (2' and 3' both H or both V).
SwapResult phi_plus_via_45_coincidence(const StateOrMixture& input, bool cross_coincidence = false);

struct VisibilityEstimate {
  double value = 0.0;
  double error = 0.0;
};

/// V = (N_even - N_odd) / (N_even + N_odd) with first-order Poisson error
/// 2·sqrt(N_even·N_odd / (N_even + N_odd)^3).
VisibilityEstimate visibility_from_counts(const CountTable& table,
                                          std::span<const std::string> even_keys,
                                          std::span<const std::string> odd_keys);

struct ChshAngles {
  double a = 0.0;
  double a_prime = 45.0;
  double b = 22.5;
  double b_prime = -22.5;
};

/// E(α, β) for linear analyzers on a two-photon density matrix.
double polarization_correlation(const DensityMatrix& rho, double alpha_deg, double beta_deg);

/// S = E(a,b) + E(a,b') + E(a',b) - E(a',b'); local models obey |S| ≤ 2.
double chsh_value(const DensityMatrix& rho, const ChshAngles& angles = {});

}  // namespace ghz
