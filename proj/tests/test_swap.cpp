#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dense_oracle.hpp"
#include "ghz/errors.hpp"
#include "ghz/swap.hpp"

using namespace ghz;

namespace {

const std::vector<Mode> kOutputModes{Mode::k1, Mode::k2p, Mode::k3p, Mode::k4};
const std::array<Mode, 2> kHeraldModes{Mode::k2p, Mode::k3p};
const std::array<PhotonLabel, 2> kPair14{PhotonLabel{1, Mode::k1}, PhotonLabel{4, Mode::k4}};

PureState source() { return tensor(spdc_pair(1, 2), spdc_pair(3, 4)); }

PureState ghz_output() { return ghz_state("HVVH", kOutputModes); }

PureState ghz_flipped() {
  PureState::Amplitudes a = ghz_output().amplitudes();
  std::next(a.begin())->second *= -1.0;
  return PureState(std::move(a));
}

DensityMatrix noisy_ghz(double w) {
  const Ensemble parts{{w, ghz_output()}, {1.0 - w, ghz_flipped()}};
  return mix(parts);
}

PureState bell14(BellKind kind) { return bell_state(kind, kPair14[0], kPair14[1]); }

/// Random state whose photons in 2' and 3' are both H or both V.
PureState random_coincident(std::mt19937_64& rng) {
  const oracle::Vec v = oracle::random_state(rng, 8);
  PureState::Amplitudes amps;
  for (int idx = 0; idx < 8; ++idx) {
    const Pol p1 = (idx & 4) ? Pol::V : Pol::H;
    const Pol p23 = (idx & 2) ? Pol::V : Pol::H;
    const Pol p4 = (idx & 1) ? Pol::V : Pol::H;
    amps.emplace(BasisKet({{{1, Mode::k1}, p1},
                           {{2, Mode::k2p}, p23},
                           {{3, Mode::k3p}, p23},
                           {{4, Mode::k4}, p4}}),
                 v(idx));
  }
  return PureState(std::move(amps));
}

CountTable table_of(std::initializer_list<std::pair<const char*, std::uint64_t>> rows) {
  CountTable t;
  for (const auto& [key, n] : rows) t.counts.push_back({{key, 0}, n});
  return t;
}

}  // namespace

TEST(BellDecompose, SourceHasFourDiagonalTerms) {
  const BellDecomposition d = bell_decompose(source());
  const double expected[4] = {0.5, -0.5, -0.5, 0.5};
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      const Complex want = a == b ? Complex(expected[a]) : Complex{};
      EXPECT_NEAR(std::abs(d.coefficients[a][b] - want), 0.0, kExactTolerance)
          << to_string(kBellKinds[a]) << " " << to_string(kBellKinds[b]);
    }
  }
  EXPECT_TRUE(approx_equal(reconstruct(d, source()), source()));
}

TEST(BellDecompose, BasisElementHasSingleCoefficient) {
  const PureState s =
      tensor(bell_state(BellKind::PhiPlus, 1, 4), bell_state(BellKind::PhiPlus, 2, 3));
  const BellDecomposition d = bell_decompose(s);
  EXPECT_NEAR(std::abs(d.coefficient(BellKind::PhiPlus, BellKind::PhiPlus) - 1.0), 0.0,
              kExactTolerance);
  double rest = 0.0;
  for (const auto& row : d.coefficients) {
    for (const auto& c : row) rest += std::norm(c);
  }
  EXPECT_NEAR(rest, 1.0, kExactTolerance);
}

TEST(BellDecompose, GhzOutputSplitsIntoPhiPairs) {
  const BellDecomposition d = bell_decompose(ghz_output());
  const double r2 = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(d.coefficient(BellKind::PhiPlus, BellKind::PhiPlus) - r2), 0.0,
              kExactTolerance);
  EXPECT_NEAR(std::abs(d.coefficient(BellKind::PhiMinus, BellKind::PhiMinus) + r2), 0.0,
              kExactTolerance);
}

TEST(BellDecompose, RandomStatesAreComplete) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const oracle::Vec v = oracle::random_state(rng, 16);
    PureState::Amplitudes amps;
    for (int idx = 0; idx < 16; ++idx) {
      std::vector<Photon> photons;
      for (int k = 0; k < 4; ++k) {
        photons.push_back({{k + 1, default_mode(k + 1)}, ((idx >> (3 - k)) & 1) ? Pol::V : Pol::H});
      }
      amps.emplace(BasisKet(std::move(photons)), v(idx));
    }
    const PureState s(std::move(amps));
    const BellDecomposition d = bell_decompose(s);
    double total = 0.0;
    for (const auto& row : d.coefficients) {
      for (const auto& c : row) total += std::norm(c);
    }
    EXPECT_NEAR(total, 1.0, kExactTolerance);
    EXPECT_TRUE(approx_equal(reconstruct(d, s), s));
  }
}

TEST(BellDecompose, RejectsWrongPhotonCount) {
  EXPECT_THROW(bell_decompose(ghz_state("HHH")), std::invalid_argument);
}

TEST(ProjectBell, TeleportationIdentityOnSource) {
  const std::array<Mode, 2> pair{Mode::k2, Mode::k3};
  for (BellKind k : kBellKinds) {
    const SwapResult r = project_bell(source(), pair, k);
    EXPECT_NEAR(r.projection_probability, 0.25, kExactTolerance) << to_string(k);
    EXPECT_NEAR(r.fidelity_to_target, 1.0, kExactTolerance) << to_string(k);
    EXPECT_EQ(r.target, k);
  }
}

TEST(ProjectBell, GhzOutputHeraldsPhiPlus) {
  const SwapResult r = project_bell(ghz_output(), kHeraldModes, BellKind::PhiPlus);
  EXPECT_NEAR(r.projection_probability, 0.5, kExactTolerance);
  EXPECT_NEAR(r.fidelity_to_target, 1.0, kExactTolerance);
  EXPECT_NEAR(r.visibility_45, 1.0, kExactTolerance);
  EXPECT_NEAR(r.chsh, 2.0 * std::sqrt(2.0), 1e-12);
}

TEST(ProjectBell, GhzOutputHasNoPsiComponent) {
  EXPECT_THROW(project_bell(ghz_output(), kHeraldModes, BellKind::PsiPlus), ImpossibleOutcomeError);
  EXPECT_THROW(project_bell(ghz_output(), kHeraldModes, BellKind::PsiMinus),
               ImpossibleOutcomeError);
}

TEST(ProjectBell, NoisyOutputGivesWeightedPair) {
  const SwapResult r = project_bell(noisy_ghz(0.89), kHeraldModes, BellKind::PhiPlus);
  EXPECT_NEAR(r.projection_probability, 0.5, 1e-12);
  EXPECT_NEAR(r.fidelity_to_target, 0.89, 1e-9);
  EXPECT_NEAR(r.visibility_45, 0.78, 1e-9);
  EXPECT_NEAR(fidelity(r.conditioned_state, bell14(BellKind::PhiMinus)), 0.11, 1e-12);
}

TEST(ProjectBell, ProbabilitiesAreCompleteForRandomMixtures) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const Ensemble parts{{0.3, random_coincident(rng)}, {0.7, random_coincident(rng)}};
    const DensityMatrix rho = mix(parts);
    double total = 0.0;
    for (BellKind k : kBellKinds) {
      try {
        total += project_bell(rho, kHeraldModes, k).projection_probability;
      } catch (const ImpossibleOutcomeError&) {
      }
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(ProjectBell, PureAndDenseRoutesAgree) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 30; ++trial) {
    const PureState s = random_coincident(rng);
    for (BellKind k : {BellKind::PhiPlus, BellKind::PhiMinus}) {
      const SwapResult a = project_bell(s, kHeraldModes, k);
      const SwapResult b = project_bell(projector(s), kHeraldModes, k);
      EXPECT_NEAR(a.projection_probability, b.projection_probability, 1e-12);
      EXPECT_NEAR((a.conditioned_state.matrix() - b.conditioned_state.matrix()).cwiseAbs().maxCoeff(),
                  0.0, 1e-12);
    }
  }
}

TEST(Operational, GhzOutputGivesPhiPlus) {
  const SwapResult r = phi_plus_via_45_coincidence(ghz_output());
  EXPECT_NEAR(r.fidelity_to_target, 1.0, kExactTolerance);
  EXPECT_NEAR(r.projection_probability, 0.5, kExactTolerance);
}

TEST(Operational, NoisyOutputMatchesWeights) {
  const SwapResult r = phi_plus_via_45_coincidence(noisy_ghz(0.89));
  EXPECT_NEAR(r.fidelity_to_target, 0.89, 1e-9);
  EXPECT_NEAR(r.visibility_45, 0.78, 1e-9);
}

TEST(Operational, CrossCoincidenceHeraldsPhiMinus) {
  const SwapResult r = phi_plus_via_45_coincidence(ghz_output(), true);
  EXPECT_EQ(r.target, BellKind::PhiMinus);
  EXPECT_NEAR(r.projection_probability, 0.5, kExactTolerance);
  EXPECT_NEAR(fidelity(r.conditioned_state, bell14(BellKind::PhiMinus)), 1.0, kExactTolerance);
}

TEST(Operational, MatchesAbstractProjectionForRandomInputs) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const PureState s = random_coincident(rng);
    for (bool cross : {false, true}) {
      const BellKind kind = cross ? BellKind::PhiMinus : BellKind::PhiPlus;
      const SwapResult op = phi_plus_via_45_coincidence(s, cross);
      const SwapResult ab = project_bell(s, kHeraldModes, kind);
      EXPECT_NEAR(op.projection_probability, ab.projection_probability, 1e-12);
      EXPECT_NEAR((op.conditioned_state.matrix() - ab.conditioned_state.matrix())
                      .cwiseAbs()
                      .maxCoeff(),
                  0.0, 1e-12);
    }
  }
}

TEST(Operational, MatchesAbstractProjectionForRandomMixtures) {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 30; ++trial) {
    const Ensemble parts{{0.6, random_coincident(rng)}, {0.4, random_coincident(rng)}};
    const DensityMatrix rho = mix(parts);
    const SwapResult op = phi_plus_via_45_coincidence(rho);
    const SwapResult ab = project_bell(rho, kHeraldModes, BellKind::PhiPlus);
    EXPECT_NEAR(op.projection_probability, ab.projection_probability, 1e-12);
    EXPECT_NEAR(
        (op.conditioned_state.matrix() - ab.conditioned_state.matrix()).cwiseAbs().maxCoeff(),
        0.0, 1e-12);
  }
}

TEST(Operational, RejectsInputsOutsideCoincidenceSubspace) {
  const PureState bunched_pol = product_state({{{1, Mode::k1}, Pol::H},
                                               {{2, Mode::k2p}, Pol::H},
                                               {{3, Mode::k3p}, Pol::V},
                                               {{4, Mode::k4}, Pol::H}});
  EXPECT_THROW(phi_plus_via_45_coincidence(bunched_pol), std::invalid_argument);
}

TEST(VisibilityFromCounts, Examples) {
  const std::vector<std::string> even{"++++"}, odd{"+++-"};
  const VisibilityEstimate v = visibility_from_counts(table_of({{"++++", 179}, {"+++-", 21}}),
                                                      even, odd);
  EXPECT_NEAR(v.value, 0.79, 1e-12);
  EXPECT_NEAR(v.error, 2.0 * std::sqrt(179.0 * 21.0 / (200.0 * 200.0 * 200.0)), 1e-12);
  EXPECT_NEAR(v.error, 0.04335, 1e-5);
  EXPECT_NEAR(visibility_from_counts(table_of({{"++++", 50}, {"+++-", 50}}), even, odd).value, 0.0,
              1e-15);
  EXPECT_NEAR(visibility_from_counts(table_of({{"++++", 12}, {"+++-", 0}}), even, odd).value, 1.0,
              1e-15);
  EXPECT_THROW(visibility_from_counts(table_of({{"++++", 0}, {"+++-", 0}}), even, odd),
               std::invalid_argument);
}

TEST(Chsh, MatchesDenseOracleForWeightedPair) {
  for (double w : {0.5, 0.75, 0.89, 1.0}) {
    const Ensemble parts{{w, bell14(BellKind::PhiPlus)}, {1.0 - w, bell14(BellKind::PhiMinus)}};
    const DensityMatrix rho = mix(parts);
    const oracle::Mat m = rho.matrix();
    const ChshAngles ang;
    const double oracle_s =
        oracle::correlation2(m, ang.a, ang.b) + oracle::correlation2(m, ang.a, ang.b_prime) +
        oracle::correlation2(m, ang.a_prime, ang.b) - oracle::correlation2(m, ang.a_prime, ang.b_prime);
    EXPECT_NEAR(chsh_value(rho), oracle_s, 1e-12) << w;
    // φ⁻ contributes zero at these settings, so S = 2√2·w.
    EXPECT_NEAR(chsh_value(rho), 2.0 * std::sqrt(2.0) * w, 1e-12) << w;
  }
  const Ensemble heralded{{0.89, bell14(BellKind::PhiPlus)}, {0.11, bell14(BellKind::PhiMinus)}};
  EXPECT_NEAR(chsh_value(mix(heralded)), 2.5173, 1e-4);
}

TEST(Chsh, CorrelationMatchesOracleForRandomAngles) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> angle(-90.0, 180.0);
  for (int trial = 0; trial < 50; ++trial) {
    const oracle::Vec v = oracle::random_state(rng, 4);
    PureState::Amplitudes amps;
    for (int idx = 0; idx < 4; ++idx) {
      amps.emplace(BasisKet({{kPair14[0], (idx & 2) ? Pol::V : Pol::H},
                             {kPair14[1], (idx & 1) ? Pol::V : Pol::H}}),
                   v(idx));
    }
    const DensityMatrix rho = projector(PureState(std::move(amps)));
    const double a = angle(rng), b = angle(rng);
    EXPECT_NEAR(polarization_correlation(rho, a, b), oracle::correlation2(rho.matrix(), a, b),
                1e-12);
  }
}

TEST(FidelityVisibility, TwoBranchRelationHolds) {
  for (double w : {0.5, 0.6, 0.89, 0.95, 1.0}) {
    const SwapResult r = phi_plus_via_45_coincidence(noisy_ghz(w));
    EXPECT_NEAR(r.fidelity_to_target, w, 1e-12);
    EXPECT_NEAR(r.visibility_45, 2.0 * w - 1.0, 1e-12);
  }
}
