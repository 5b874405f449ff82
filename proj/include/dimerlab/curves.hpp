#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dimerlab/feshbach.hpp"
#include "dimerlab/model.hpp"
#include "dimerlab/perturb.hpp"

namespace dimerlab {

struct ScanRow {
  double r = 0.0;
  double E = std::numeric_limits<double>::quiet_NaN();
  double W = std::numeric_limits<double>::quiet_NaN();
  double W1 = std::numeric_limits<double>::quiet_NaN();
  double W2 = std::numeric_limits<double>::quiet_NaN();
  double A = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  double E_direct = std::numeric_limits<double>::quiet_NaN();
  std::size_t iterations = 0;
  bool valid = false;
  std::string error;
};

struct ScanTable {
  std::vector<ScanRow> rows;
  double e_inf = 0.0;
  CouplingMode coupling = CouplingMode::full;
  std::uint64_t config_hash = 0;

  std::vector<double> column(const std::string& name) const;
  std::vector<double> separations() const;
  /// max |W - (E - e_inf)| over valid rows
  double checksum() const;
};

/// One Feshbach solve per separation, rows independent (OpenMP over rows).
/// Failed rows are kept with valid = false.
ScanTable scan(const DimerSpec& tmpl, const Grid& grid, const std::vector<double>& r_list,
               const FeshbachSettings& settings, const AtomEigendata& atom1, const AtomEigendata& atom2);
ScanTable scan(const DimerSpec& tmpl, const Grid& grid, const std::vector<double>& r_list,
               const FeshbachSettings& settings = {});

struct DerivativeRow {
  double r = 0.0;
  double d1 = std::numeric_limits<double>::quiet_NaN();
  double d1_error = std::numeric_limits<double>::quiet_NaN();
  double d2 = std::numeric_limits<double>::quiet_NaN();
  double d2_error = std::numeric_limits<double>::quiet_NaN();
  bool available = false;
};

/// Five-point central differences of y(r); Richardson-combined with the
/// doubled-step stencil where the table reaches +-4 steps (error estimate
/// |D_h - D_2h| / 15), otherwise the plain stencil (error estimate NaN).
std::vector<DerivativeRow> derivatives(std::span<const double> r, std::span<const double> y,
                                       bool richardson = true);
std::vector<DerivativeRow> derivatives(const ScanTable& table, bool richardson = true);

/// <psi, dH/dr psi>; throws ValidityError when psi is not an eigenvector to
/// `max_residual`.
double hellmann_feynman(const DimerSystem& system, std::span<const double> ground_state,
                        double max_residual = 1e-6);

struct FitResult {
  double exponent = 0.0;
  double coefficient = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
  double rms_residual = 0.0;
  std::size_t points = 0;
};

/// Least squares of log|y| against log r on [lo, hi].
FitResult fit_power_law(std::span<const double> r, std::span<const double> y, double lo, double hi);

struct DissociationRow {
  int m = 0;
  double E1m = std::numeric_limits<double>::quiet_NaN();
  double E2negm = std::numeric_limits<double>::quiet_NaN();
  double sum = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;
  std::string error;
};

struct DissociationTable {
  std::vector<DissociationRow> rows;
  bool strict_minimum_at_zero = false;
  /// min over m != 0 of sum(m) - sum(0)
  double margin = 0.0;
};

/// Ground energy of the ion with `charge` electrons removed (added if
/// negative), in its antisymmetric sector.
double ion_ground_energy(const AtomSpec& spec, int charge, const Grid& grid);

/// E_{1,m} + E_{2,-m} for m = -N2 .. N1.
DissociationTable dissociation_check(const AtomSpec& atom1, const AtomSpec& atom2, const Grid& grid);

struct DecayFit {
  double rate = 0.0;
  double r_squared = 0.0;
  bool exponential = false;  // r_squared >= 0.99
  std::size_t points = 0;
};

/// Slope of log|phi| against distance on the tail [0.5 L, 0.9 L]. In
/// radial_3d mode the state holds u = rho R and R is fitted.
DecayFit decay_rate(const QuantumState& state, DimensionMode mode, double extent);

struct LJFit {
  double c12 = 0.0;
  double c6 = 0.0;
  double rms_residual = 0.0;
  bool repulsive_term = false;  // false: c6-only fit
};

/// W ~ c12 r^-12 - c6 r^-6 on [lo, hi]; c6 only when W has no interior
/// minimum in the window.
LJFit lj_fit(std::span<const double> r, std::span<const double> w, double lo, double hi);

}  // namespace dimerlab
