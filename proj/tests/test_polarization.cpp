#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dense_oracle.hpp"
#include "ghz/errors.hpp"
#include "ghz/polarization.hpp"

using namespace ghz;

namespace {

const double r2 = 1.0 / std::sqrt(2.0);

BasisKet ket4(const char* pols, std::array<Mode, 4> modes = {Mode::k1, Mode::k2, Mode::k3,
                                                              Mode::k4}) {
  std::vector<Photon> photons;
  for (int i = 0; i < 4; ++i) {
    photons.push_back({{i + 1, modes[i]}, pols[i] == 'H' ? Pol::H : Pol::V});
  }
  return BasisKet(std::move(photons));
}

PureState random_pure(std::mt19937_64& rng, int n) {
  const oracle::Vec v = oracle::random_state(rng, 1 << n);
  PureState::Amplitudes amps;
  for (int idx = 0; idx < (1 << n); ++idx) {
    std::vector<Photon> photons;
    for (int k = 0; k < n; ++k) {
      const int bit = (idx >> (n - 1 - k)) & 1;
      photons.push_back({{k + 1, default_mode(k + 1)}, bit ? Pol::V : Pol::H});
    }
    amps.emplace(BasisKet(std::move(photons)), v(idx));
  }
  return PureState(std::move(amps));
}

}  // namespace

TEST(Tensor, TwoSingletsGiveFourTermSource) {
  const PureState s = tensor(spdc_pair(1, 2), spdc_pair(3, 4));
  ASSERT_EQ(s.term_count(), 4u);
  EXPECT_NEAR(std::abs(s.amplitude(ket4("HVHV")) - 0.5), 0.0, kExactTolerance);
  EXPECT_NEAR(std::abs(s.amplitude(ket4("HVVH")) + 0.5), 0.0, kExactTolerance);
  EXPECT_NEAR(std::abs(s.amplitude(ket4("VHHV")) + 0.5), 0.0, kExactTolerance);
  EXPECT_NEAR(std::abs(s.amplitude(ket4("VHVH")) - 0.5), 0.0, kExactTolerance);
  EXPECT_NEAR(s.squared_norm(), 1.0, kExactTolerance);
}

TEST(Tensor, ProductOfBasisKets) {
  const PureState a = product_state({{{1, Mode::k1}, Pol::H}});
  const PureState b = product_state({{{2, Mode::k2}, Pol::V}});
  const PureState ab = tensor(a, b);
  ASSERT_EQ(ab.term_count(), 1u);
  EXPECT_EQ(ab.amplitudes().begin()->second, Complex(1.0, 0.0));
}

TEST(Tensor, PhiPlusPairsGiveUniformAmplitudes) {
  const PureState s = tensor(bell_state(BellKind::PhiPlus, 1, 2), bell_state(BellKind::PhiPlus, 3, 4));
  ASSERT_EQ(s.term_count(), 4u);
  for (const auto& [ket, amp] : s.amplitudes()) EXPECT_NEAR(std::abs(amp - 0.5), 0.0, kExactTolerance);
}

TEST(Tensor, OverlappingLabelsAreRejected) {
  EXPECT_THROW(tensor(spdc_pair(1, 2), spdc_pair(2, 3)), LabelCollisionError);
}

TEST(SpdcPair, IsSinglet) {
  const PureState s = spdc_pair(1, 2);
  const BasisKet hv({{{1, Mode::k1}, Pol::H}, {{2, Mode::k2}, Pol::V}});
  const BasisKet vh({{{1, Mode::k1}, Pol::V}, {{2, Mode::k2}, Pol::H}});
  EXPECT_NEAR(std::abs(s.amplitude(hv) - r2), 0.0, kExactTolerance);
  EXPECT_NEAR(std::abs(s.amplitude(vh) + r2), 0.0, kExactTolerance);
  EXPECT_NEAR(s.squared_norm(), 1.0, kExactTolerance);
  EXPECT_THROW(spdc_pair(1, 1), std::invalid_argument);
}

TEST(BellState, PhiPlusAmplitudes) {
  const PureState s = bell_state(BellKind::PhiPlus, 1, 2);
  const BasisKet hh({{{1, Mode::k1}, Pol::H}, {{2, Mode::k2}, Pol::H}});
  const BasisKet vv({{{1, Mode::k1}, Pol::V}, {{2, Mode::k2}, Pol::V}});
  EXPECT_NEAR(std::abs(s.amplitude(hh) - r2), 0.0, kExactTolerance);
  EXPECT_NEAR(std::abs(s.amplitude(vv) - r2), 0.0, kExactTolerance);
}

TEST(BellState, FourStatesAreOrthonormal) {
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const Complex g = inner(bell_state(kBellKinds[i], 1, 2), bell_state(kBellKinds[j], 1, 2));
      EXPECT_NEAR(std::abs(g - Complex(i == j ? 1.0 : 0.0)), 0.0, kExactTolerance);
    }
  }
}

TEST(BellState, SourceOverlapWithPhiPlusPairs) {
  // ⟨φ⁺₁₄ φ⁺₂₃ | source⟩ = -1/2
  const PureState source = tensor(spdc_pair(1, 2), spdc_pair(3, 4));
  const PureState probe =
      tensor(bell_state(BellKind::PhiPlus, 1, 4), bell_state(BellKind::PhiPlus, 2, 3));
  EXPECT_NEAR(std::abs(inner(probe, source) - Complex(-0.5)), 0.0, kExactTolerance);
}

TEST(BellState, RejectsBadKindAndPair) {
  EXPECT_THROW(parse_bell_kind("chi+"), std::invalid_argument);
  EXPECT_THROW(bell_state(BellKind::PsiPlus, 3, 3), std::invalid_argument);
}

TEST(GhzState, FourPhotonHvvh) {
  const PureState g = ghz_state("HVVH", {Mode::k1, Mode::k2p, Mode::k3p, Mode::k4});
  ASSERT_EQ(g.term_count(), 2u);
  EXPECT_NEAR(std::abs(g.amplitude(ket4("HVVH", {Mode::k1, Mode::k2p, Mode::k3p, Mode::k4})) - r2),
              0.0, kExactTolerance);
  EXPECT_NEAR(std::abs(g.amplitude(ket4("VHHV", {Mode::k1, Mode::k2p, Mode::k3p, Mode::k4})) - r2),
              0.0, kExactTolerance);
}

TEST(GhzState, TwoPartyIsPhiPlus) {
  EXPECT_TRUE(approx_equal(ghz_state("HH"), bell_state(BellKind::PhiPlus, 1, 2)));
}

TEST(GhzState, ThreePhotonIsNormalizedTwoTerm) {
  const PureState g = ghz_state("HVH");
  EXPECT_EQ(g.term_count(), 2u);
  EXPECT_NEAR(g.squared_norm(), 1.0, kExactTolerance);
}

TEST(GhzState, RejectsShortOrBadPatterns) {
  EXPECT_THROW(ghz_state("H"), std::invalid_argument);
  EXPECT_THROW(ghz_state("HXV"), std::invalid_argument);
}

TEST(ChangeBasis, HorizontalAtFortyFive) {
  // |H⟩ = (|45°⟩ - |135°⟩)/√2; with |-45°⟩ = (|H⟩-|V⟩)/√2 = -|135°⟩ this is
  // (|+45°⟩ + |-45°⟩)/√2.
  const PureState h = product_state({{{1, Mode::k1}, Pol::H}});
  const PureState d = change_basis(h, 1, 45.0);
  EXPECT_EQ(d.basis_angle(1), 45.0);
  const BasisKet plus({{{1, Mode::k1}, Pol::H}});
  const BasisKet orth({{{1, Mode::k1}, Pol::V}});
  EXPECT_NEAR(std::abs(d.amplitude(plus) - r2), 0.0, kExactTolerance);
  EXPECT_NEAR(std::abs(d.amplitude(orth) + r2), 0.0, kExactTolerance);
}

TEST(ChangeBasis, GhzAtFortyFiveHasEightEvenParityTerms) {
  PureState g = ghz_state("HVVH", {Mode::k1, Mode::k2p, Mode::k3p, Mode::k4});
  for (int k = 1; k <= 4; ++k) g = change_basis(g, k, 45.0);
  ASSERT_EQ(g.term_count(), 8u);
  for (const auto& [ket, amp] : g.amplitudes()) {
    int plus = 0;
    for (const auto& p : ket.photons()) plus += p.pol == Pol::H ? 1 : 0;
    EXPECT_EQ(plus % 2, 0) << to_string(ket);
    EXPECT_NEAR(std::norm(amp), 0.125, kExactTolerance);
  }
}

TEST(ChangeBasis, RoundTripIsIdentity) {
  const PureState s = tensor(spdc_pair(1, 2), spdc_pair(3, 4));
  const PureState back = change_basis(change_basis(s, 2, 45.0), 2, 0.0);
  EXPECT_TRUE(approx_equal(s, back));
  EXPECT_EQ(back.basis_angle(2), 0.0);
}

TEST(ChangeBasis, RejectsAnglesOutsideHalfTurn) {
  const PureState h = product_state({{{1, Mode::k1}, Pol::H}});
  EXPECT_THROW(change_basis(h, 1, 180.0), std::invalid_argument);
  EXPECT_THROW(change_basis(h, 1, -45.0), std::invalid_argument);
}

TEST(ChangeBasis, PreservesNormForRandomStatesAndAngles) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(0.0, 180.0);
  for (int trial = 0; trial < 50; ++trial) {
    PureState s = random_pure(rng, 4);
    for (int k = 1; k <= 4; ++k) s = change_basis(s, k, angle(rng));
    EXPECT_NEAR(s.squared_norm(), 1.0, kStateTolerance);
    // Dense image is basis independent.
    EXPECT_NEAR((to_dense(s) - to_dense(to_hv(s))).norm(), 0.0, 1e-12);
  }
}

TEST(Normalized, FixesGlobalPhase) {
  PureState s = Complex(0.0, -3.0) * spdc_pair(1, 2);
  const PureState n = normalized(s);
  EXPECT_NEAR(n.squared_norm(), 1.0, kExactTolerance);
  EXPECT_TRUE(approx_equal(n, spdc_pair(1, 2)));
  EXPECT_THROW(normalized(PureState{}), ImpossibleOutcomeError);
}

TEST(Mix, PhaseFlipMixtureHasExpectedPurityAndFidelities) {
  const std::vector<Mode> modes{Mode::k1, Mode::k2p, Mode::k3p, Mode::k4};
  const PureState psi = ghz_state("HVVH", modes);
  PureState phi = psi;
  {
    PureState::Amplitudes a = psi.amplitudes();
    std::next(a.begin())->second *= -1.0;
    phi = PureState(std::move(a));
  }
  const Ensemble parts{{0.89, psi}, {0.11, phi}};
  const DensityMatrix rho = mix(parts);
  EXPECT_TRUE(rho.is_valid());
  EXPECT_NEAR(rho.purity(), 0.89 * 0.89 + 0.11 * 0.11, kExactTolerance);
  EXPECT_NEAR(rho.purity(), 0.8042, kExactTolerance);
  EXPECT_NEAR(fidelity(rho, psi), 0.89, kExactTolerance);
  EXPECT_NEAR(fidelity(rho, phi), 0.11, kExactTolerance);
}

TEST(Mix, PureProjectorHasUnitPurity) {
  const Ensemble one{{1.0, bell_state(BellKind::PsiMinus, 1, 2)}};
  const DensityMatrix rho = mix(one);
  EXPECT_NEAR(rho.purity(), 1.0, kExactTolerance);
  EXPECT_NEAR(fidelity(rho, bell_state(BellKind::PsiMinus, 1, 2)), 1.0, kExactTolerance);
}

TEST(Mix, RejectsBadWeights) {
  const PureState s = bell_state(BellKind::PsiMinus, 1, 2);
  const Ensemble negative{{-0.1, s}, {1.1, s}};
  const Ensemble short_sum{{0.5, s}, {0.4, s}};
  EXPECT_THROW(mix(negative), std::invalid_argument);
  EXPECT_THROW(mix(short_sum), std::invalid_argument);
}

TEST(Fidelity, DimensionMismatchThrows) {
  const Ensemble one{{1.0, bell_state(BellKind::PsiMinus, 1, 2)}};
  EXPECT_THROW(fidelity(mix(one), ghz_state("HHH")), std::invalid_argument);
}

TEST(MixProperty, RandomMixturesSatisfyDensityInvariants) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> count(1, 5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = count(rng);
    std::vector<double> w(k);
    double total = 0;
    for (auto& x : w) total += (x = u(rng));
    Ensemble parts;
    for (int i = 0; i < k; ++i) parts.emplace_back(w[i] / total, random_pure(rng, 3));
    const DensityMatrix rho = mix(parts);
    EXPECT_TRUE(rho.is_valid(1e-9));
    EXPECT_LE(rho.purity(), 1.0 + 1e-9);
  }
}
