#include "ghz/swap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ghz/errors.hpp"

namespace ghz {

namespace {

PhotonLabel label_of(const std::vector<PhotonLabel>& labels, int index) {
  for (const auto& l : labels) {
    if (l.index == index) return l;
  }
  throw std::invalid_argument("photon " + std::to_string(index) + " not in state");
}

std::size_t position_of(const std::vector<PhotonLabel>& labels, Mode mode) {
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k].mode == mode) return k;
  }
  throw RoutingError("no photon in mode " + std::string(to_string(mode)));
}

// Amplitudes of a Bell state indexed by 2·pol(first) + pol(second).
Eigen::Vector4cd bell_vector(BellKind kind) {
  const double r = 1.0 / std::numbers::sqrt2;
  Eigen::Vector4cd b = Eigen::Vector4cd::Zero();
  switch (kind) {
    case BellKind::PsiPlus: b(1) = r; b(2) = r; break;
    case BellKind::PsiMinus: b(1) = r; b(2) = -r; break;
    case BellKind::PhiPlus: b(0) = r; b(3) = r; break;
    case BellKind::PhiMinus: b(0) = r; b(3) = -r; break;
  }
  return b;
}

// Single-photon analyzer vectors in the H/V basis.
Eigen::Vector2cd analyzer_vector(double angle_deg, Pol port) {
  Eigen::Vector2cd v;
  if (port == Pol::H) v << cos_deg(angle_deg), sin_deg(angle_deg);
  else v << -sin_deg(angle_deg), cos_deg(angle_deg);
  return v;
}

// Maps the full register onto the photons other than positions p and q,
// contracting those two with ⟨pair|.
Eigen::MatrixXcd contraction(int photon_count, std::size_t p, std::size_t q,
                             const Eigen::Vector4cd& pair) {
  const Eigen::Index full = Eigen::Index{1} << photon_count;
  const Eigen::Index rest = Eigen::Index{1} << (photon_count - 2);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rest, full);
  for (Eigen::Index c = 0; c < full; ++c) {
    Eigen::Index r = 0;
    int bit_p = 0, bit_q = 0;
    for (int k = 0; k < photon_count; ++k) {
      const int bit = static_cast<int>((c >> (photon_count - 1 - k)) & 1);
      if (static_cast<std::size_t>(k) == p) bit_p = bit;
      else if (static_cast<std::size_t>(k) == q) bit_q = bit;
      else r = (r << 1) | bit;
    }
    m(r, c) = std::conj(pair(2 * bit_p + bit_q));
  }
  return m;
}

std::vector<PhotonLabel> remaining(const std::vector<PhotonLabel>& labels, std::size_t p,
                                   std::size_t q) {
  std::vector<PhotonLabel> out;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (k != p && k != q) out.push_back(labels[k]);
  }
  return out;
}

SwapResult finish(const Eigen::MatrixXcd& unnormalized, std::vector<PhotonLabel> labels,
                  double input_trace, BellKind kind) {
  const double probability = unnormalized.trace().real() / input_trace;
  if (!(probability > kExactTolerance)) {
    throw ImpossibleOutcomeError(std::string("projection onto ") + std::string(to_string(kind)) +
                                 " has zero probability");
  }
  Eigen::MatrixXcd rho = unnormalized / unnormalized.trace().real();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  SwapResult result;
  result.conditioned_state = DensityMatrix(labels, std::move(rho));
  result.projection_probability = probability;
  result.target = kind;
  if (labels.size() == 2) {
    const auto& rho2 = result.conditioned_state;
    result.fidelity_to_target = fidelity(rho2, bell_state(kind, labels[0], labels[1]));
    result.visibility_45 = polarization_correlation(rho2, 45.0, 45.0);
    result.chsh = chsh_value(rho2);
  }
  return result;
}

}  // namespace

BellDecomposition bell_decompose(const PureState& state, std::array<int, 2> pair_a,
                                 std::array<int, 2> pair_b) {
  if (state.photon_count() != 4) {
    throw std::invalid_argument("Bell decomposition needs a four-photon state, got " +
                                std::to_string(state.photon_count()));
  }
  const auto labels = state.fixed_labels();
  BellDecomposition d;
  d.pair_a = pair_a;
  d.pair_b = pair_b;
  const double norm = std::sqrt(state.squared_norm());
  for (std::size_t i = 0; i < 4; ++i) {
    const PureState a = bell_state(kBellKinds[i], label_of(labels, pair_a[0]),
                                   label_of(labels, pair_a[1]));
    for (std::size_t j = 0; j < 4; ++j) {
      const PureState b = bell_state(kBellKinds[j], label_of(labels, pair_b[0]),
                                     label_of(labels, pair_b[1]));
      d.coefficients[i][j] = inner(tensor(a, b), state) / norm;
    }
  }
  return d;
}

PureState reconstruct(const BellDecomposition& decomposition, const PureState& like) {
  const auto labels = like.fixed_labels();
  PureState sum;
  for (std::size_t i = 0; i < 4; ++i) {
    const PureState a = bell_state(kBellKinds[i], label_of(labels, decomposition.pair_a[0]),
                                   label_of(labels, decomposition.pair_a[1]));
    for (std::size_t j = 0; j < 4; ++j) {
      const Complex c = decomposition.coefficients[i][j];
      if (c == Complex{}) continue;
      const PureState b = bell_state(kBellKinds[j], label_of(labels, decomposition.pair_b[0]),
                                     label_of(labels, decomposition.pair_b[1]));
      sum += c * tensor(a, b);
    }
  }
  return sum;
}

SwapResult project_bell(const StateOrMixture& input, std::array<Mode, 2> pair, BellKind kind) {
  if (const auto* psi = std::get_if<PureState>(&input)) {
    // Sparse route: contract the pair with ⟨Bell| ket by ket.
    const auto p = psi->photon_in_mode(pair[0]);
    const auto q = psi->photon_in_mode(pair[1]);
    if (!p || !q || *p == *q) {
      throw RoutingError("Bell projection needs one photon in each of modes " +
                         std::string(to_string(pair[0])) + " and " + std::string(to_string(pair[1])));
    }
    const Eigen::Vector4cd bell = bell_vector(kind);
    const PureState hv = to_hv(*psi);
    PureState::Amplitudes amps;
    for (const auto& [ket, amp] : hv.amplitudes()) {
      const int bp = ket.at_index(*p).pol == Pol::V ? 1 : 0;
      const int bq = ket.at_index(*q).pol == Pol::V ? 1 : 0;
      const Complex c = std::conj(bell(2 * bp + bq)) * amp;
      if (c == Complex{}) continue;
      std::vector<Photon> rest;
      for (const auto& ph : ket.photons()) {
        if (ph.label.index != *p && ph.label.index != *q) rest.push_back(ph);
      }
      amps[BasisKet(std::move(rest))] += c;
    }
    const PureState conditioned(std::move(amps));
    if (conditioned.squared_norm() <= 0.0) {
      throw ImpossibleOutcomeError(std::string("projection onto ") +
                                   std::string(to_string(kind)) + " has zero probability");
    }
    const Eigen::VectorXcd v = to_dense(conditioned);
    return finish(v * v.adjoint(), conditioned.fixed_labels(), psi->squared_norm(), kind);
  }

  const auto& rho = std::get<DensityMatrix>(input);
  const auto& labels = rho.labels();
  const std::size_t p = position_of(labels, pair[0]);
  const std::size_t q = position_of(labels, pair[1]);
  const Eigen::MatrixXcd m = contraction(rho.photon_count(), p, q, bell_vector(kind));
  return finish(m * rho.matrix() * m.adjoint(), remaining(labels, p, q), rho.trace(), kind);
}

SwapResult phi_plus_via_45_coincidence(const StateOrMixture& input, bool cross_coincidence) {
  const BellKind kind = cross_coincidence ? BellKind::PhiMinus : BellKind::PhiPlus;
  const std::array<std::pair<Pol, Pol>, 2> heralds =
      cross_coincidence ? std::array{std::pair{Pol::H, Pol::V}, std::pair{Pol::V, Pol::H}}
                        : std::array{std::pair{Pol::H, Pol::H}, std::pair{Pol::V, Pol::V}};

  if (const auto* psi = std::get_if<PureState>(&input)) {
    const auto p = psi->photon_in_mode(Mode::k2p);
    const auto q = psi->photon_in_mode(Mode::k3p);
    if (!p || !q) throw RoutingError("45° coincidence needs one photon in each of 2' and 3'");
    const PureState hv = to_hv(*psi);
    for (const auto& [ket, amp] : hv.amplitudes()) {
      if (ket.at_index(*p).pol != ket.at_index(*q).pol &&
          std::abs(amp) > kStateTolerance) {
        throw std::invalid_argument(
            "input has 2'/3' components outside the PBS coincidence subspace");
      }
    }
    // Sparse route: analyzers at 45° on both photons, keep the heralds.
    const PureState rotated = change_basis(change_basis(hv, *p, 45.0), *q, 45.0);
    Eigen::MatrixXcd accumulated;
    std::vector<PhotonLabel> labels;
    for (const auto& [sp, sq] : heralds) {
      PureState::Amplitudes amps;
      for (const auto& [ket, amp] : rotated.amplitudes()) {
        if (ket.at_index(*p).pol != sp || ket.at_index(*q).pol != sq) continue;
        std::vector<Photon> rest;
        for (const auto& ph : ket.photons()) {
          if (ph.label.index != *p && ph.label.index != *q) rest.push_back(ph);
        }
        amps[BasisKet(std::move(rest))] += amp;
      }
      const PureState branch(std::move(amps));
      if (branch.empty()) continue;
      labels = branch.fixed_labels();
      const Eigen::VectorXcd v = to_dense(branch);
      const Eigen::MatrixXcd part = v * v.adjoint();
      accumulated = accumulated.size() == 0 ? part : (accumulated + part).eval();
    }
    if (accumulated.size() == 0) {
      throw ImpossibleOutcomeError("no 45° herald coincidence is possible for this input");
    }
    return finish(accumulated, labels, psi->squared_norm(), kind);
  }

  const auto& rho = std::get<DensityMatrix>(input);
  const auto& labels = rho.labels();
  const std::size_t p = position_of(labels, Mode::k2p);
  const std::size_t q = position_of(labels, Mode::k3p);
  const int n = rho.photon_count();
  for (Eigen::Index r = 0; r < rho.dimension(); ++r) {
    const auto bit_p = (r >> (n - 1 - static_cast<int>(p))) & 1;
    const auto bit_q = (r >> (n - 1 - static_cast<int>(q))) & 1;
    if (bit_p != bit_q && rho.matrix().row(r).cwiseAbs().maxCoeff() > kStateTolerance) {
      throw std::invalid_argument(
          "input has 2'/3' components outside the PBS coincidence subspace");
    }
  }
  // Dense route: sum of the two herald projections.
  Eigen::MatrixXcd accumulated = Eigen::MatrixXcd::Zero(Eigen::Index{1} << (n - 2),
                                                        Eigen::Index{1} << (n - 2));
  for (const auto& [sp, sq] : heralds) {
    const Eigen::Vector2cd u = analyzer_vector(45.0, sp);
    const Eigen::Vector2cd w = analyzer_vector(45.0, sq);
    Eigen::Vector4cd pair;
    pair << u(0) * w(0), u(0) * w(1), u(1) * w(0), u(1) * w(1);
    const Eigen::MatrixXcd m = contraction(n, p, q, pair);
    accumulated += m * rho.matrix() * m.adjoint();
  }
  return finish(accumulated, remaining(labels, p, q), rho.trace(), kind);
}

VisibilityEstimate visibility_from_counts(const CountTable& table,
                                          std::span<const std::string> even_keys,
                                          std::span<const std::string> odd_keys) {
  double even = 0.0, odd = 0.0;
  for (const auto& k : even_keys) even += static_cast<double>(table.count(k));
  for (const auto& k : odd_keys) odd += static_cast<double>(table.count(k));
  const double total = even + odd;
  if (!(total > 0.0)) throw std::invalid_argument("visibility needs at least one count");
  return {(even - odd) / total, 2.0 * std::sqrt(even * odd / (total * total * total))};
}

double polarization_correlation(const DensityMatrix& rho, double alpha_deg, double beta_deg) {
  if (rho.photon_count() != 2) {
    throw std::invalid_argument("polarization correlation needs a two-photon state");
  }
  double e = 0.0;
  for (Pol s : {Pol::H, Pol::V}) {
    for (Pol t : {Pol::H, Pol::V}) {
      const Eigen::Vector2cd u = analyzer_vector(alpha_deg, s);
      const Eigen::Vector2cd w = analyzer_vector(beta_deg, t);
      Eigen::Vector4cd v;
      v << u(0) * w(0), u(0) * w(1), u(1) * w(0), u(1) * w(1);
      const double p = (v.adjoint() * rho.matrix() * v)(0, 0).real();
      e += (s == t ? 1.0 : -1.0) * p;
    }
  }
  return e;
}

double chsh_value(const DensityMatrix& rho, const ChshAngles& angles) {
  return polarization_correlation(rho, angles.a, angles.b) +
         polarization_correlation(rho, angles.a, angles.b_prime) +
         polarization_correlation(rho, angles.a_prime, angles.b) -
         polarization_correlation(rho, angles.a_prime, angles.b_prime);
}

}  // namespace ghz
