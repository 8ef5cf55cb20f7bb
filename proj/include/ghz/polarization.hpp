// Multi-photon polarization states: sparse pure states, dense density
// matrices, basis changes and the canonical Bell / GHZ / singlet states.
#pragma once

#include <complex>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ghz {

using Complex = std::complex<double>;

inline constexpr double kStateTolerance = 1e-9;
inline constexpr double kExactTolerance = 1e-12;

/// Spatial modes of the two-source apparatus. k2p/k3p are the PBS outputs.
enum class Mode : std::uint8_t { k1, k2, k3, k4, k2p, k3p };

std::string_view to_string(Mode mode);
/// Accepts "1".."4", "2'", "3'" (and the unicode prime).
Mode parse_mode(std::string_view text);
/// Mode a photon starts in when only its index is given (photon i -> mode i).
Mode default_mode(int photon_index);

/// Polarization symbol relative to the photon's current basis angle θ:
/// H stands for |θ⟩ = cosθ|H⟩ + sinθ|V⟩, V for |θ+90°⟩.
enum class Pol : std::uint8_t { H = 0, V = 1 };

inline Pol flipped(Pol p) { return p == Pol::H ? Pol::V : Pol::H; }

struct PhotonLabel {
  int index = 0;
  Mode mode = Mode::k1;
  auto operator<=>(const PhotonLabel&) const = default;
};

struct Photon {
  PhotonLabel label;
  Pol pol = Pol::H;
  auto operator<=>(const Photon&) const = default;
};

/// One polarization symbol per photon, ordered by ascending photon index.
class BasisKet {
 public:
  BasisKet() = default;
  explicit BasisKet(std::vector<Photon> photons);

  const std::vector<Photon>& photons() const { return photons_; }
  std::size_t size() const { return photons_.size(); }
  const Photon& at_index(int photon_index) const;
  /// Photons currently in `mode` (zero, one or two after a PBS).
  std::vector<Photon> in_mode(Mode mode) const;

  auto operator<=>(const BasisKet&) const = default;

 private:
  std::vector<Photon> photons_;
};

std::string to_string(const BasisKet& ket);

/// Sparse complex amplitudes over basis kets. Amplitudes are not forced to
/// unit norm here; factories and `normalized` return normalized states.
class PureState {
 public:
  using Amplitudes = std::map<BasisKet, Complex>;

  PureState() = default;
  /// Throws std::invalid_argument if kets carry different photon indices.
  explicit PureState(Amplitudes amplitudes,
                     std::map<int, double> basis_angles = {});

  const Amplitudes& amplitudes() const { return amplitudes_; }
  Complex amplitude(const BasisKet& ket) const;
  bool empty() const { return amplitudes_.empty(); }
  std::size_t term_count() const { return amplitudes_.size(); }

  const std::vector<int>& photons() const { return photons_; }
  int photon_count() const { return static_cast<int>(photons_.size()); }
  bool has_photon(int index) const;

  /// Basis angle (degrees) a photon's amplitudes are expressed in; 0 = H/V.
  double basis_angle(int photon_index) const;
  const std::map<int, double>& basis_angles() const { return basis_angles_; }

  /// Mode of a photon when it is the same in every ket.
  std::optional<Mode> fixed_mode(int photon_index) const;
  /// Labels of all photons, requiring a fixed mode for each.
  std::vector<PhotonLabel> fixed_labels() const;
  /// Index of the single photon occupying `mode` in every ket.
  std::optional<int> photon_in_mode(Mode mode) const;

  double squared_norm() const;

  PureState& operator+=(const PureState& other);
  PureState& operator*=(Complex factor);

 private:
  Amplitudes amplitudes_;
  std::vector<int> photons_;
  std::map<int, double> basis_angles_;
};

PureState operator+(PureState a, const PureState& b);
PureState operator*(Complex factor, PureState s);

/// Scales to unit norm and rotates the global phase so the first nonzero
/// amplitude in ket order is real and nonnegative. Zero states throw.
PureState normalized(const PureState& state);

/// Single product ket with amplitude 1.
PureState product_state(std::vector<Photon> photons);

/// a ⊗ b. Throws LabelCollisionError when the photon sets overlap.
PureState tensor(const PureState& a, const PureState& b);

/// Singlet (|HV⟩ - |VH⟩)/√2 emitted by one down-conversion pair source.
PureState spdc_pair(int i, int j);
PureState spdc_pair(PhotonLabel a, PhotonLabel b);

enum class BellKind : std::uint8_t { PsiPlus, PsiMinus, PhiPlus, PhiMinus };

inline constexpr BellKind kBellKinds[] = {BellKind::PsiPlus, BellKind::PsiMinus,
                                          BellKind::PhiPlus, BellKind::PhiMinus};

std::string_view to_string(BellKind kind);
BellKind parse_bell_kind(std::string_view text);

PureState bell_state(BellKind kind, int i, int j);
PureState bell_state(BellKind kind, PhotonLabel a, PhotonLabel b);

/// (|p1..pn⟩ + |p̄1..p̄n⟩)/√2 for a pattern string such as "HVVH" or "HHH".
/// Photons are numbered 1..n; `modes` defaults to default_mode(i).
PureState ghz_state(std::string_view pattern, std::vector<Mode> modes = {});
PureState ghz_state(std::string_view pattern, std::span<const PhotonLabel> labels);

/// Re-expresses one photon in the linear basis {|θ⟩, |θ+90°⟩}; θ in [0, 180).
PureState change_basis(const PureState& state, int photon_index, double angle_deg);
/// All photons back to the H/V basis.
PureState to_hv(const PureState& state);

/// ⟨a|b⟩. Photon sets must match; both sides are compared in the H/V basis.
Complex inner(const PureState& a, const PureState& b);

/// Amplitude-wise comparison in the H/V basis, modes included.
bool approx_equal(const PureState& a, const PureState& b, double tol = kExactTolerance);

/// cos/sin of an angle in degrees, exact at multiples of 45°.
double cos_deg(double angle_deg);
double sin_deg(double angle_deg);

// ---------------------------------------------------------------------------
// Dense density matrices

/// Dense state vector in the H/V basis. Photons are ordered by ascending
/// index; the first photon is the most significant bit and bit 1 means V.
Eigen::VectorXcd to_dense(const PureState& state);

class DensityMatrix {
 public:
  DensityMatrix(std::vector<PhotonLabel> labels, Eigen::MatrixXcd matrix);

  const std::vector<PhotonLabel>& labels() const { return labels_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  Eigen::Index dimension() const { return matrix_.rows(); }
  int photon_count() const { return static_cast<int>(labels_.size()); }

  double trace() const;
  double purity() const;
  double min_eigenvalue() const;
  /// Hermitian, unit trace and positive semidefinite within `tol`.
  bool is_valid(double tol = kStateTolerance) const;

 private:
  std::vector<PhotonLabel> labels_;
  Eigen::MatrixXcd matrix_;
};

DensityMatrix projector(const PureState& state);

using Ensemble = std::vector<std::pair<double, PureState>>;

/// Σ w_k |ψ_k⟩⟨ψ_k|. Weights must be nonnegative and sum to 1.
DensityMatrix mix(std::span<const std::pair<double, PureState>> components);

/// ⟨target|ρ|target⟩.
double fidelity(const DensityMatrix& rho, const PureState& target);

}  // namespace ghz
