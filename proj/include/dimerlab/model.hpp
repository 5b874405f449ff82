#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dimerlab/grid.hpp"
#include "dimerlab/linear_operator.hpp"

namespace dimerlab {

/// Soft-Coulomb distance sqrt(u^2 + a^2).
inline double soft_distance(double u, double a) { return std::sqrt(u * u + a * a); }

enum class DimensionMode { soft_coulomb_1d, radial_3d };
enum class CouplingMode { full, dipole_truncated, decoupled };
/// Symmetry sector a state has been projected into.
enum class Sector { plain, antisymmetric };

std::string to_string(DimensionMode mode);
std::string to_string(CouplingMode mode);
DimensionMode parse_dimension_mode(const std::string& text);
CouplingMode parse_coupling_mode(const std::string& text);

struct AtomSpec {
  double charge = 1.0;  // Z
  int electrons = 1;    // N_j
  double softening = 0.5;
  DimensionMode mode = DimensionMode::soft_coulomb_1d;
};

struct DimerSpec {
  AtomSpec atom1;
  AtomSpec atom2;
  CouplingMode coupling = CouplingMode::full;
  double separation = 20.0;
};

/// Coefficient vector on a tensor grid, l2-normalized by convention.
struct QuantumState {
  std::shared_ptr<const TensorSpace> space;
  std::vector<double> coefficients;
  Sector sector = Sector::plain;

  double norm() const;
  /// Scales to unit norm and returns the previous norm.
  double normalize();
};

/// Kinetic stencil plus a diagonal potential on a tensor space.
struct Hamiltonian {
  std::shared_ptr<const TensorSpace> space;
  std::vector<double> potential;
  LinearOperator op;
};

/// -sum_i Lap_i + sum_i V(z_i) + sum_{k<l} W_ee(z_k - z_l) for an atom at the
/// origin. In radial_3d mode: -d^2/drho^2 - Z/rho on u = rho R, l = 0.
Hamiltonian atom_hamiltonian(const AtomSpec& spec, const Grid& grid);
/// Same nucleus with N - m electrons; N - m = 0 gives the trivial space
/// (dimension 1) with the zero operator.
Hamiltonian ion_hamiltonian(const AtomSpec& spec, int charge, const Grid& grid);

/// Antisymmetrizer over groups of axes; every axis inside a group must be
/// identical. Groups of size one are left alone.
LinearOperator antisymmetrizer(std::shared_ptr<const TensorSpace> space,
                               std::vector<std::vector<std::size_t>> groups);
/// Full antisymmetrizer Q for `total_electrons` electrons on one grid axis.
LinearOperator antisymmetrizer(std::size_t total_electrons, const Grid& grid);
/// T_pi: (T_pi psi)(x_1..x_N) = psi(x_{pi^-1(1)}, .., x_{pi^-1(N)}).
std::vector<double> permute(const TensorSpace& space, std::span<const std::size_t> pi,
                            std::span<const double> psi);

/// Shift the coordinates of `which` electrons by +shift (a multiple of the
/// spacing). Throws ValidityError if more than 1e-10 of the norm would leave
/// the grid.
QuantumState translate_state(const QuantumState& state, double shift,
                             std::span<const std::size_t> which);

/// Coordinates in which a dimer is represented. `lab`: every electron on one
/// axis covering both atoms, cross-atom antisymmetry. `relative`: each atom's
/// electrons measured from their own nucleus on the atom grid.
enum class Frame { lab, relative };

/// Pointwise two-center coupling for one pair of electrons in relative
/// coordinates: 1/d(r) - 1/d(r - z_i) - 1/d(r + z_j) + 1/d(r + z_j - z_i).
double pair_interaction(double r, double zi, double zj, double softening);

/// All operators of one dimer geometry on one grid.
class DimerSystem {
 public:
  struct Options {
    std::size_t dim_cap = 4'000'000;
    /// Lab frame only: make the axis cover separations up to this value
    /// (default: the spec's separation).
    double cover_separation = 0.0;
  };

  DimerSystem(const DimerSpec& spec, const Grid& grid);
  DimerSystem(const DimerSpec& spec, const Grid& grid, Options options);

  const DimerSpec& spec() const { return spec_; }
  const Grid& grid() const { return grid_; }
  Frame frame() const { return frame_; }
  double separation() const { return spec_.separation; }
  std::size_t electrons1() const { return static_cast<std::size_t>(spec_.atom1.electrons); }
  std::size_t electrons() const { return space_->rank(); }
  std::shared_ptr<const TensorSpace> space() const { return space_; }

  const LinearOperator& hamiltonian() const { return hamiltonian_; }
  const LinearOperator& unperturbed() const { return unperturbed_; }
  const LinearOperator& interaction() const { return interaction_; }
  const std::vector<double>& interaction_values() const { return interaction_values_; }
  const std::vector<double>& potential() const { return potential_; }
  /// Sector the dimer ground state lives in (Q in the lab frame, Q1 Q2 otherwise).
  const LinearOperator& sector() const { return sector_; }
  /// Intra-atom antisymmetrizer Q1 Q2.
  const LinearOperator& atom_sector() const { return atom_sector_; }
  /// f = sum_ij f_ij = -2 sum_ij z_i z_j (relative coordinates).
  LinearOperator dipole() const;
  /// d H / d r as a multiplication operator.
  std::vector<double> separation_derivative() const;
  /// Relative coordinate of electron k at grid index i.
  double relative_coordinate(std::size_t k, std::size_t i) const;

  /// phi1 (x) tau_r phi2, from states on the atom grids.
  QuantumState place_pair(const QuantumState& phi1, const QuantumState& phi2) const;
  /// Offset (in grid steps) of atom 2's origin on the lab axis.
  std::size_t atom2_offset() const { return atom2_offset_; }

 private:
  DimerSpec spec_;
  Grid grid_;
  Options options_;
  Frame frame_;
  std::size_t atom2_offset_ = 0;
  std::shared_ptr<const TensorSpace> space_;
  std::vector<double> potential_;
  std::vector<double> interaction_values_;
  LinearOperator hamiltonian_;
  LinearOperator unperturbed_;
  LinearOperator interaction_;
  LinearOperator sector_;
  LinearOperator atom_sector_;
};

LinearOperator dimer_hamiltonian(const DimerSpec& spec, const Grid& grid);
LinearOperator interaction_operator(const DimerSpec& spec, const Grid& grid);
LinearOperator dipole_operator(const DimerSpec& spec, const Grid& grid);

}  // namespace dimerlab
