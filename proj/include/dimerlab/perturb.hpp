#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dimerlab/model.hpp"
#include "dimerlab/solve.hpp"

namespace dimerlab {

/// Expansion of one electron pair's coupling in powers of 1/r:
/// I_ij(z_i, z_j) = sum_{n <= order} T_n(z_i, z_j) r^-n + remainder.
struct MultipoleSeries {
  int order = 3;
  double separation = 0.0;
  double softening = 0.0;
  double support_radius = 0.0;
  /// Sampled bound on |I - sum of terms| over the support box, per pair.
  double remainder_bound = 0.0;
  std::size_t pairs = 1;

  /// Coefficient of r^-n (a polynomial in z_i, z_j), n >= 1.
  double coefficient(int n, double zi, double zj) const;
  /// T_n(z) r^-n
  double term(int n, double zi, double zj) const;
  /// Sum of the terms up to `order`.
  double truncated(double zi, double zj) const;
  /// Order-n term as a multiplication operator on a dimer space.
  LinearOperator term_operator(const DimerSystem& system, int n) const;
};

/// order in 3..6; r must exceed twice the support radius.
MultipoleSeries multipole_expand(const DimerSpec& spec, double r, int order, double support_radius);

/// <psi, I psi> / <psi, psi>
double first_order(std::span<const double> phi_pair, const LinearOperator& interaction);

struct ResolventSettings {
  double tol = 1e-11;
  /// Lowest eigenvalue of the projected operator if known.
  std::optional<double> lowest;
  double gap_min = 1e-8;
  double certificate_tol = 1e-7;
};

struct SecondOrder {
  double energy = 0.0;  // W2 = -<I phi, R I phi>
  /// R (P0-perp I phi) for reuse by the trial state
  std::vector<double> correction;
  double certificate = 0.0;
  std::size_t iterations = 0;
};

/// W2 with R = (P0perp H0 P0perp - e_inf)^-1 on the atom sector, P0 the
/// projection onto phi_pair.
SecondOrder second_order(const DimerSystem& system, std::span<const double> phi_pair, double e_inf,
                         const ResolventSettings& settings = {});

/// Ground state and the first k levels of one atom.
struct AtomEigendata {
  AtomSpec spec;
  Grid grid{1.0, 8};
  EigenResult spectrum;
  std::shared_ptr<const TensorSpace> space;
  /// Gap to the first excited level of the atom.
  double gap() const { return spectrum.values.at(1) - spectrum.values.at(0); }
};

/// Dense spectrum when the atom fits under the dense cap, Lanczos otherwise.
AtomEigendata atom_eigendata(const AtomSpec& spec, const Grid& grid, std::size_t k,
                             const EigenOptions& options = {}, std::size_t dense_cap = 4096);

struct SigmaResult {
  double sigma = 0.0;
  std::string method;
  /// Relative resolvent residual, or captured dipole weight for the sum.
  double diagnostic = 0.0;
  std::size_t nmax = 0;
  std::size_t iterations = 0;
};

/// sigma = <f Psi, (H12perp - E1 - E2)^-1 f Psi> on the decoupled pair;
/// `dipole_scale` multiplies f.
SigmaResult c6_resolvent(const AtomEigendata& atom1, const AtomEigendata& atom2, double tol = 1e-11,
                         double dipole_scale = 1.0);

/// London sum over excited products with m, n <= nmax (1-based levels).
/// Even-parity levels are skipped.
SigmaResult c6_sum_over_states(const AtomEigendata& atom1, const AtomEigendata& atom2, std::size_t nmax);

/// Smallest nmax whose odd levels carry `fraction` of <phi, D^2 phi> on
/// both atoms (D = sum of electron coordinates).
std::size_t converged_nmax(const AtomEigendata& atom1, const AtomEigendata& atom2, double fraction = 0.999);

/// <phi, sum_i z_i^2 phi> for an atom state.
double second_moment(const TensorSpace& space, std::span<const double> state);

/// Spherically symmetric 3D density rho(t), truncated at `radius`, to be
/// renormalized to unit charge. radius = 0 is a point charge.
struct RadialDensity {
  std::function<double(double)> profile;
  double radius = 0.0;
};

RadialDensity hydrogenic_density(double charge, double radius);
RadialDensity point_charge();

struct NewtonResult {
  double residual = 0.0;
  double electron_nucleus1 = 0.0;  // <1/|r e - x|> over atom 1
  double electron_nucleus2 = 0.0;
  double electron_electron = 0.0;
};

/// |<I>| for two neutral spherical one-electron atoms at distance r by radial
/// quadrature (adaptive Simpson, tolerance `tol`).
NewtonResult newton_check(const RadialDensity& atom1, const RadialDensity& atom2, double r, double tol = 1e-10);

/// Adaptive Simpson quadrature of f on [a, b].
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 40);

}  // namespace dimerlab
