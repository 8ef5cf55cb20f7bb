#include "ghz/polarization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ghz/errors.hpp"

namespace ghz {

namespace {

// Amplitudes smaller than this are treated as exact zeros after arithmetic.
constexpr double kPrune = 1e-15;

const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

void check_angle(double angle_deg) {
  if (!std::isfinite(angle_deg) || angle_deg < 0.0 || angle_deg >= 180.0) {
    throw std::invalid_argument("basis angle must lie in [0, 180) degrees, got " +
                                std::to_string(angle_deg));
  }
}

void prune(PureState::Amplitudes& amps) {
  std::erase_if(amps, [](const auto& kv) { return std::abs(kv.second) < kPrune; });
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::k1: return "1";
    case Mode::k2: return "2";
    case Mode::k3: return "3";
    case Mode::k4: return "4";
    case Mode::k2p: return "2'";
    case Mode::k3p: return "3'";
  }
  return "?";
}

Mode parse_mode(std::string_view text) {
  if (text == "1") return Mode::k1;
  if (text == "2") return Mode::k2;
  if (text == "3") return Mode::k3;
  if (text == "4") return Mode::k4;
  if (text == "2'" || text == "2′" || text == "2p") return Mode::k2p;
  if (text == "3'" || text == "3′" || text == "3p") return Mode::k3p;
  throw std::invalid_argument("unknown mode tag '" + std::string(text) + "'");
}

Mode default_mode(int photon_index) {
  switch (photon_index) {
    case 1: return Mode::k1;
    case 2: return Mode::k2;
    case 3: return Mode::k3;
    case 4: return Mode::k4;
    default:
      throw std::invalid_argument("no default mode for photon " +
                                  std::to_string(photon_index));
  }
}

double cos_deg(double angle_deg) {
  double a = std::fmod(angle_deg, 360.0);
  if (a < 0) a += 360.0;
  const double steps = a / 45.0;
  const double nearest = std::round(steps);
  if (std::abs(steps - nearest) < 1e-12) {
    switch (static_cast<int>(nearest) % 8) {
      case 0: return 1.0;
      case 1: return kInvSqrt2;
      case 2: return 0.0;
      case 3: return -kInvSqrt2;
      case 4: return -1.0;
      case 5: return -kInvSqrt2;
      case 6: return 0.0;
      case 7: return kInvSqrt2;
    }
  }
  return std::cos(a * std::numbers::pi / 180.0);
}

double sin_deg(double angle_deg) { return cos_deg(90.0 - angle_deg); }

// ---------------------------------------------------------------------------
// BasisKet

BasisKet::BasisKet(std::vector<Photon> photons) : photons_(std::move(photons)) {
  std::sort(photons_.begin(), photons_.end(),
            [](const Photon& a, const Photon& b) { return a.label.index < b.label.index; });
  for (std::size_t i = 1; i < photons_.size(); ++i) {
    if (photons_[i].label.index == photons_[i - 1].label.index) {
      throw LabelCollisionError("photon index " + std::to_string(photons_[i].label.index) +
                                " appears twice in one ket");
    }
  }
}

const Photon& BasisKet::at_index(int photon_index) const {
  for (const auto& p : photons_) {
    if (p.label.index == photon_index) return p;
  }
  throw std::out_of_range("photon " + std::to_string(photon_index) + " not in ket");
}

std::vector<Photon> BasisKet::in_mode(Mode mode) const {
  std::vector<Photon> out;
  for (const auto& p : photons_) {
    if (p.label.mode == mode) out.push_back(p);
  }
  return out;
}

std::string to_string(const BasisKet& ket) {
  std::string out;
  for (const auto& p : ket.photons()) {
    out += p.pol == Pol::H ? 'H' : 'V';
    out += '_';
    out += std::to_string(p.label.index);
    out += '@';
    out += to_string(p.label.mode);
    out += ' ';
  }
  if (!out.empty()) out.pop_back();
  return out;
}

// ---------------------------------------------------------------------------
// PureState

PureState::PureState(Amplitudes amplitudes, std::map<int, double> basis_angles)
    : amplitudes_(std::move(amplitudes)) {
  bool first = true;
  for (const auto& [ket, amp] : amplitudes_) {
    std::vector<int> indices;
    indices.reserve(ket.size());
    for (const auto& p : ket.photons()) indices.push_back(p.label.index);
    if (first) {
      photons_ = std::move(indices);
      first = false;
    } else if (indices != photons_) {
      throw std::invalid_argument("kets of one state must carry the same photon indices");
    }
  }
  // A zero state (e.g. a blocked projection) carries no photons or angles.
  if (amplitudes_.empty()) return;
  for (const auto& [index, angle] : basis_angles) {
    if (!has_photon(index)) {
      throw std::invalid_argument("basis angle given for absent photon " +
                                  std::to_string(index));
    }
    check_angle(angle);
    if (angle != 0.0) basis_angles_[index] = angle;
  }
}

Complex PureState::amplitude(const BasisKet& ket) const {
  const auto it = amplitudes_.find(ket);
  return it == amplitudes_.end() ? Complex{} : it->second;
}

bool PureState::has_photon(int index) const {
  return std::binary_search(photons_.begin(), photons_.end(), index);
}

double PureState::basis_angle(int photon_index) const {
  const auto it = basis_angles_.find(photon_index);
  return it == basis_angles_.end() ? 0.0 : it->second;
}

std::optional<Mode> PureState::fixed_mode(int photon_index) const {
  std::optional<Mode> mode;
  for (const auto& [ket, amp] : amplitudes_) {
    const Mode m = ket.at_index(photon_index).label.mode;
    if (mode && *mode != m) return std::nullopt;
    mode = m;
  }
  return mode;
}

std::vector<PhotonLabel> PureState::fixed_labels() const {
  std::vector<PhotonLabel> labels;
  for (int index : photons_) {
    const auto mode = fixed_mode(index);
    if (!mode) {
      throw RoutingError("photon " + std::to_string(index) +
                         " does not occupy a single mode across the state");
    }
    labels.push_back({index, *mode});
  }
  return labels;
}

std::optional<int> PureState::photon_in_mode(Mode mode) const {
  std::optional<int> index;
  for (const auto& [ket, amp] : amplitudes_) {
    const auto found = ket.in_mode(mode);
    if (found.size() != 1) return std::nullopt;
    if (index && *index != found.front().label.index) return std::nullopt;
    index = found.front().label.index;
  }
  return index;
}

double PureState::squared_norm() const {
  double sum = 0.0;
  for (const auto& [ket, amp] : amplitudes_) sum += std::norm(amp);
  return sum;
}

PureState& PureState::operator+=(const PureState& other) {
  if (other.empty()) return *this;
  if (empty()) return *this = other;
  if (other.photons_ != photons_) {
    throw std::invalid_argument("cannot add states over different photons");
  }
  PureState rhs = other;
  if (rhs.basis_angles_ != basis_angles_) {
    *this = to_hv(*this);
    rhs = to_hv(rhs);
  }
  for (const auto& [ket, amp] : rhs.amplitudes_) amplitudes_[ket] += amp;
  prune(amplitudes_);
  return *this;
}

PureState& PureState::operator*=(Complex factor) {
  for (auto& [ket, amp] : amplitudes_) amp *= factor;
  prune(amplitudes_);
  return *this;
}

PureState operator+(PureState a, const PureState& b) { return a += b; }

PureState operator*(Complex factor, PureState s) { return s *= factor; }

PureState normalized(const PureState& state) {
  const double n2 = state.squared_norm();
  if (!(n2 > 0.0)) throw ImpossibleOutcomeError("cannot normalize a zero state");
  PureState::Amplitudes amps;
  Complex phase{1.0, 0.0};
  bool phase_set = false;
  for (const auto& [ket, amp] : state.amplitudes()) {
    if (!phase_set && std::abs(amp) >= kPrune) {
      phase = std::conj(amp) / std::abs(amp);
      phase_set = true;
    }
  }
  const double scale = 1.0 / std::sqrt(n2);
  for (const auto& [ket, amp] : state.amplitudes()) {
    Complex a = amp * phase * scale;
    if (std::abs(a) < kPrune) continue;
    // The leading amplitude is real by construction; drop rounding residue.
    if (amps.empty()) a = {std::abs(a), 0.0};
    amps.emplace(ket, a);
  }
  return PureState(std::move(amps), state.basis_angles());
}

PureState product_state(std::vector<Photon> photons) {
  PureState::Amplitudes amps;
  amps.emplace(BasisKet(std::move(photons)), Complex{1.0, 0.0});
  return PureState(std::move(amps));
}

PureState tensor(const PureState& a, const PureState& b) {
  for (int index : a.photons()) {
    if (b.has_photon(index)) {
      throw LabelCollisionError("photon " + std::to_string(index) +
                                " appears in both tensor factors");
    }
  }
  PureState::Amplitudes amps;
  for (const auto& [ka, va] : a.amplitudes()) {
    for (const auto& [kb, vb] : b.amplitudes()) {
      std::vector<Photon> photons = ka.photons();
      photons.insert(photons.end(), kb.photons().begin(), kb.photons().end());
      amps.emplace(BasisKet(std::move(photons)), va * vb);
    }
  }
  std::map<int, double> angles = a.basis_angles();
  angles.insert(b.basis_angles().begin(), b.basis_angles().end());
  return PureState(std::move(amps), std::move(angles));
}

PureState spdc_pair(int i, int j) {
  if (i == j) throw std::invalid_argument("a pair needs two distinct photons");
  return spdc_pair(PhotonLabel{i, default_mode(i)}, PhotonLabel{j, default_mode(j)});
}

PureState spdc_pair(PhotonLabel a, PhotonLabel b) {
  return bell_state(BellKind::PsiMinus, a, b);
}

std::string_view to_string(BellKind kind) {
  switch (kind) {
    case BellKind::PsiPlus: return "psi+";
    case BellKind::PsiMinus: return "psi-";
    case BellKind::PhiPlus: return "phi+";
    case BellKind::PhiMinus: return "phi-";
  }
  return "?";
}

BellKind parse_bell_kind(std::string_view text) {
  for (BellKind k : kBellKinds) {
    if (text == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown Bell kind '" + std::string(text) + "'");
}

PureState bell_state(BellKind kind, int i, int j) {
  if (i == j) throw std::invalid_argument("a Bell pair needs two distinct photons");
  return bell_state(kind, PhotonLabel{i, default_mode(i)}, PhotonLabel{j, default_mode(j)});
}

PureState bell_state(BellKind kind, PhotonLabel a, PhotonLabel b) {
  if (a.index == b.index) throw std::invalid_argument("a Bell pair needs two distinct photons");
  const bool psi = kind == BellKind::PsiPlus || kind == BellKind::PsiMinus;
  const double sign = (kind == BellKind::PsiPlus || kind == BellKind::PhiPlus) ? 1.0 : -1.0;
  const Pol second = psi ? Pol::V : Pol::H;
  PureState::Amplitudes amps;
  amps.emplace(BasisKet({{a, Pol::H}, {b, second}}), Complex{kInvSqrt2, 0.0});
  amps.emplace(BasisKet({{a, Pol::V}, {b, flipped(second)}}), Complex{sign * kInvSqrt2, 0.0});
  return PureState(std::move(amps));
}

PureState ghz_state(std::string_view pattern, std::vector<Mode> modes) {
  std::vector<PhotonLabel> labels;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const int index = static_cast<int>(i) + 1;
    labels.push_back({index, modes.empty() ? default_mode(index) : modes.at(i)});
  }
  if (!modes.empty() && modes.size() != pattern.size()) {
    throw std::invalid_argument("ghz_state: one mode per photon required");
  }
  return ghz_state(pattern, labels);
}

PureState ghz_state(std::string_view pattern, std::span<const PhotonLabel> labels) {
  if (pattern.size() < 2) throw std::invalid_argument("GHZ state needs at least two photons");
  if (labels.size() != pattern.size()) {
    throw std::invalid_argument("ghz_state: one label per photon required");
  }
  std::vector<Photon> branch, partner;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    Pol p;
    if (pattern[i] == 'H') p = Pol::H;
    else if (pattern[i] == 'V') p = Pol::V;
    else throw std::invalid_argument("GHZ pattern must contain only H and V");
    branch.push_back({labels[i], p});
    partner.push_back({labels[i], flipped(p)});
  }
  PureState::Amplitudes amps;
  amps.emplace(BasisKet(std::move(branch)), Complex{kInvSqrt2, 0.0});
  amps.emplace(BasisKet(std::move(partner)), Complex{kInvSqrt2, 0.0});
  return PureState(std::move(amps));
}

PureState change_basis(const PureState& state, int photon_index, double angle_deg) {
  check_angle(angle_deg);
  if (!state.has_photon(photon_index)) {
    throw std::invalid_argument("photon " + std::to_string(photon_index) + " not in state");
  }
  const double from = state.basis_angle(photon_index);
  auto angles = state.basis_angles();
  angles[photon_index] = angle_deg;
  if (from == angle_deg) return PureState(state.amplitudes(), std::move(angles));

  // ⟨β_H|α_H⟩ = ⟨β_V|α_V⟩ = cos(α-β), ⟨β_V|α_H⟩ = -⟨β_H|α_V⟩ = sin(α-β)
  const double c = cos_deg(from - angle_deg);
  const double s = sin_deg(from - angle_deg);
  PureState::Amplitudes amps;
  for (const auto& [ket, amp] : state.amplitudes()) {
    std::vector<Photon> as_h = ket.photons();
    std::vector<Photon> as_v = ket.photons();
    Complex to_h, to_v;
    for (std::size_t k = 0; k < as_h.size(); ++k) {
      if (as_h[k].label.index != photon_index) continue;
      const bool was_h = as_h[k].pol == Pol::H;
      to_h = amp * (was_h ? c : -s);
      to_v = amp * (was_h ? s : c);
      as_h[k].pol = Pol::H;
      as_v[k].pol = Pol::V;
    }
    amps[BasisKet(std::move(as_h))] += to_h;
    amps[BasisKet(std::move(as_v))] += to_v;
  }
  prune(amps);
  return PureState(std::move(amps), std::move(angles));
}

PureState to_hv(const PureState& state) {
  PureState out = state;
  for (const auto& [index, angle] : state.basis_angles()) out = change_basis(out, index, 0.0);
  return out;
}

Complex inner(const PureState& a, const PureState& b) {
  if (a.photons() != b.photons()) {
    throw std::invalid_argument("inner product over different photon sets");
  }
  const PureState ha = to_hv(a);
  const PureState hb = to_hv(b);
  Complex sum{};
  for (const auto& [ket, amp] : ha.amplitudes()) sum += std::conj(amp) * hb.amplitude(ket);
  return sum;
}

bool approx_equal(const PureState& a, const PureState& b, double tol) {
  if (a.photons() != b.photons()) return false;
  const PureState ha = to_hv(a);
  const PureState hb = to_hv(b);
  for (const auto& [ket, amp] : ha.amplitudes()) {
    if (std::abs(amp - hb.amplitude(ket)) > tol) return false;
  }
  for (const auto& [ket, amp] : hb.amplitudes()) {
    if (std::abs(amp - ha.amplitude(ket)) > tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Dense representation

Eigen::VectorXcd to_dense(const PureState& state) {
  const auto labels = state.fixed_labels();
  const PureState hv = to_hv(state);
  const int n = static_cast<int>(labels.size());
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index{1} << n);
  for (const auto& [ket, amp] : hv.amplitudes()) {
    Eigen::Index idx = 0;
    for (const auto& p : ket.photons()) idx = (idx << 1) | (p.pol == Pol::V ? 1 : 0);
    v(idx) += amp;
  }
  return v;
}

DensityMatrix::DensityMatrix(std::vector<PhotonLabel> labels, Eigen::MatrixXcd matrix)
    : labels_(std::move(labels)), matrix_(std::move(matrix)) {
  std::sort(labels_.begin(), labels_.end());
  for (std::size_t i = 1; i < labels_.size(); ++i) {
    if (labels_[i].index == labels_[i - 1].index) {
      throw LabelCollisionError("duplicate photon index in density matrix labels");
    }
  }
  const Eigen::Index dim = Eigen::Index{1} << labels_.size();
  if (matrix_.rows() != dim || matrix_.cols() != dim) {
    throw std::invalid_argument("density matrix dimension must be 2^photon_count");
  }
}

double DensityMatrix::trace() const { return matrix_.trace().real(); }

double DensityMatrix::purity() const { return (matrix_ * matrix_).trace().real(); }

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(matrix_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool DensityMatrix::is_valid(double tol) const {
  if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(trace() - 1.0) > tol) return false;
  return min_eigenvalue() >= -tol;
}

DensityMatrix projector(const PureState& state) {
  const Eigen::VectorXcd v = to_dense(state);
  return DensityMatrix(state.fixed_labels(), v * v.adjoint());
}

DensityMatrix mix(std::span<const std::pair<double, PureState>> components) {
  if (components.empty()) throw std::invalid_argument("mix needs at least one component");
  const auto labels = components.front().second.fixed_labels();
  const Eigen::Index dim = Eigen::Index{1} << labels.size();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  double total = 0.0;
  for (const auto& [weight, state] : components) {
    if (!(weight >= 0.0)) throw std::invalid_argument("mixture weights must be nonnegative");
    if (state.fixed_labels() != labels) {
      throw std::invalid_argument("mixture components must share photon labels");
    }
    if (std::abs(state.squared_norm() - 1.0) > kStateTolerance) {
      throw std::invalid_argument("mixture components must be normalized");
    }
    const Eigen::VectorXcd v = to_dense(state);
    rho += weight * v * v.adjoint();
    total += weight;
  }
  if (std::abs(total - 1.0) > kStateTolerance) {
    throw std::invalid_argument("mixture weights must sum to 1");
  }
  return DensityMatrix(labels, std::move(rho));
}

double fidelity(const DensityMatrix& rho, const PureState& target) {
  if (target.fixed_labels() != rho.labels()) {
    throw std::invalid_argument("fidelity: target and density matrix cover different photons");
  }
  const Eigen::VectorXcd v = to_dense(target);
  const double f = (v.adjoint() * rho.matrix() * v)(0, 0).real();
  return std::clamp(f, 0.0, 1.0);
}

}  // namespace ghz
