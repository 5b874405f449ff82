#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "dimerlab/model.hpp"
#include "dimerlab/perturb.hpp"
#include "dimerlab/solve.hpp"

namespace dimerlab {

struct CutoffConfig {
  double r0 = 0.0;
  double inner_frac = 1.0 / 7.0;
  double outer_frac = 1.0 / 6.0;
  /// chi(x) = prod chi1(dilation * z); chi = 1 on supp(phi) when
  /// dilation * outer <= inner.
  double dilation = 6.0 / 7.0;
  double max_mass_loss = 1e-3;
};

/// C-infinity profile: 1 for |x| <= inner, 0 for |x| >= outer, exp(-1/t) glue.
struct BumpProfile {
  double inner = 0.0;
  double outer = 0.0;
  double operator()(double x) const;
};

BumpProfile bump(const CutoffConfig& config);

/// r0 for separation r: the largest grid multiple not above r - 0.5, or
/// r - 0.5 itself when that multiple is a full unit below r.
double anchor_separation(double r, const Grid& grid);

struct CutoffState {
  QuantumState phi;
  double mass_loss = 0.0;       // 1 - |chi zeta|^2
  double overlap_defect = 0.0;  // 1 - <phi, zeta>^2
};

/// phi = c prod_i chi1(z_i) zeta, normalized.
CutoffState cutoff_ground_state(const QuantumState& atom_state, const CutoffConfig& config);

struct FeshbachSettings {
  double inner_frac = 1.0 / 3.0;
  double outer_frac = 7.0 / 18.0;
  double dilation = 6.0 / 7.0;
  double max_mass_loss = 1e-3;
  /// false: r0 = r - 0.5 regardless of the grid
  bool anchor_on_grid = true;
  double fixed_point_tol = 1e-14;
  std::size_t max_iterations = 60;
  double resolvent_tol = 1e-12;
  double gap_tol = 1e-8;
  double gap_min = 1e-8;
  unsigned seed = 20240611;
  enum class Direct { none, lanczos, dense } direct = Direct::lanczos;
  double direct_tol = 1e-9;
  std::size_t dense_cap = 4096;
  double cover_separation = 0.0;
  std::size_t dim_cap = 4'000'000;
};

struct FixedPoint {
  double energy = 0.0;
  double nonlinear = 0.0;  // A at the returned energy
  double imp = 0.0;        // E - F(E)
  std::size_t iterations = 0;
};

/// F(lambda) = <psi, H psi> - <g, (Pi H Pi - lambda)^-1 g>, g = Pi H psi,
/// psi the normalized sector projection of a trial vector, Pi = Q - |psi><psi|.
class FeshbachMap {
 public:
  FeshbachMap(LinearOperator h, LinearOperator sector, std::span<const double> trial,
              const FeshbachSettings& settings = {});

  const std::vector<double>& trial() const { return psi_; }
  double trial_energy() const { return trial_energy_; }
  /// lambda_min(Pi H Pi) on range(Pi).
  double lowest() const { return lowest_; }
  /// A(lambda) = <g, (Pi H Pi - lambda)^-1 g>
  double nonlinear(double lambda) const;
  double value(double lambda) const { return trial_energy_ - nonlinear(lambda); }
  /// Iterates E <- F(E) from <psi, H psi> with a bisection safeguard on
  /// Imp(E) = E - F(E).
  FixedPoint solve() const;

 private:
  LinearOperator h_;
  LinearOperator pi_;
  std::vector<double> psi_;
  std::vector<double> g_;
  double trial_energy_ = 0.0;
  double lowest_ = 0.0;
  FeshbachSettings settings_;
};

/// One-shot F(lambda) on range(sector) for the trial vector.
double feshbach_value(const LinearOperator& h, const LinearOperator& sector, std::span<const double> trial,
                      double lambda, const FeshbachSettings& settings = {});

struct FeshbachReport {
  double r = 0.0;
  double r0 = 0.0;
  double E = 0.0;
  double E_direct = std::numeric_limits<double>::quiet_NaN();
  double A = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
  double psi_overlap = std::numeric_limits<double>::quiet_NaN();
  double W1 = 0.0;
  double W2 = 0.0;
  double trial_energy = 0.0;
  double correction_norm = 0.0;
  double psi0_norm2 = 1.0;
  double mass_loss = 0.0;
};

/// The dimer at one separation with its cutoff states, trial state and
/// Feshbach map.
class FeshbachProblem {
 public:
  FeshbachProblem(const DimerSpec& spec, const Grid& grid, const AtomEigendata& atom1, const AtomEigendata& atom2,
                  const FeshbachSettings& settings = {});

  const DimerSystem& system() const { return system_; }
  const FeshbachMap& map() const { return *map_; }
  /// psi_0 = phi phi_r - chi R P0perp I phi phi_r before antisymmetrization.
  const std::vector<double>& trial_state() const { return psi0_; }
  const std::vector<double>& pair_state() const { return pair_; }
  double e_inf() const { return e_inf_; }
  /// C = lambda_min(Pi H Pi) - E
  double stability_gap(double energy) const { return map_->lowest() - energy; }

  FeshbachReport solve() const;

 private:
  DimerSystem system_;
  FeshbachSettings settings_;
  double e_inf_ = 0.0;
  double r0_ = 0.0;
  double mass_loss_ = 0.0;
  std::vector<double> pair_;
  std::vector<double> psi0_;
  double w1_ = 0.0;
  double w2_ = 0.0;
  double correction_norm_ = 0.0;
  std::optional<FeshbachMap> map_;
};

/// Direct ground energy of the dimer in its sector (and the vector when the
/// Lanczos route is used).
EigenResult direct_ground_state(const DimerSystem& system, const FeshbachSettings& settings);

struct WitnessRow {
  double r = 0.0;
  double D = 0.0;
  double E = 0.0;
};

struct WitnessTable {
  double s = 0.0;
  double E_s = 0.0;
  std::vector<WitnessRow> rows;
};

/// D(r) = F_{Pi_r}(E(s)) for the trial state anchored at s and translated to
/// r. Each row also carries the fixed-point E(r).
WitnessTable monotonicity_witness(const DimerSpec& spec, const Grid& grid, const AtomEigendata& atom1,
                                  const AtomEigendata& atom2, double s, const std::vector<double>& r_list,
                                  const FeshbachSettings& settings = {});

}  // namespace dimerlab
