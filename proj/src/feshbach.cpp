#include "dimerlab/feshbach.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dimerlab/error.hpp"
#include "dimerlab/kernels.hpp"

namespace dimerlab {

namespace {

double glue(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

CutoffConfig cutoff_for(double r0, const FeshbachSettings& s) {
  return {r0, s.inner_frac, s.outer_frac, s.dilation, s.max_mass_loss};
}

std::vector<std::vector<std::size_t>> sector_groups(const DimerSystem& system) {
  const std::size_t n1 = system.electrons1(), n = system.electrons();
  std::vector<std::size_t> a(n1), b(n - n1), all(n);
  std::iota(a.begin(), a.end(), 0);
  std::iota(b.begin(), b.end(), n1);
  std::iota(all.begin(), all.end(), 0);
  if (system.frame() == Frame::lab) return {all};
  return {a, b};
}

}  // namespace

double BumpProfile::operator()(double x) const {
  const double ax = std::abs(x);
  if (ax <= inner) return 1.0;
  if (ax >= outer) return 0.0;
  const double t = (outer - ax) / (outer - inner);
  const double up = glue(t), down = glue(1.0 - t);
  return up / (up + down);
}

BumpProfile bump(const CutoffConfig& config) {
  if (!(config.r0 > 0.0)) throw ConfigError("cutoff anchor r0 must be positive");
  if (!(config.inner_frac > 0.0) || !(config.inner_frac < config.outer_frac))
    throw ConfigError("cutoff radii must satisfy 0 < inner < outer");
  return {config.inner_frac * config.r0, config.outer_frac * config.r0};
}

double anchor_separation(double r, const Grid& grid) {
  const double h = grid.spacing();
  const double floored = std::floor((r - 0.5) / h + 1e-9) * h;
  if (r - floored >= 1.0 || floored <= 0.0) return r - 0.5;
  return floored;
}

CutoffState cutoff_ground_state(const QuantumState& atom_state, const CutoffConfig& config) {
  const BumpProfile chi1 = bump(config);
  const TensorSpace& space = *atom_state.space;
  CutoffState out{atom_state, 0.0, 0.0};
  std::vector<std::size_t> idx(space.rank());
  const double before = kernels::dot(atom_state.coefficients, atom_state.coefficients);
  for (std::size_t i = 0; i < space.dim(); ++i) {
    space.unravel(i, idx);
    double w = 1.0;
    for (std::size_t k = 0; k < space.rank(); ++k) w *= chi1(space.axis(k)[idx[k]]);
    out.phi.coefficients[i] *= w;
  }
  const double after = kernels::dot(out.phi.coefficients, out.phi.coefficients);
  out.mass_loss = 1.0 - after / before;
  if (out.mass_loss > config.max_mass_loss) {
    std::ostringstream msg;
    msg << "cutoff at r0 = " << config.r0 << " removes " << out.mass_loss << " of the atomic mass (limit "
        << config.max_mass_loss << "); r0 is too small for the decay length";
    throw ValidityError(msg.str());
  }
  out.phi.normalize();
  const double overlap = kernels::dot(out.phi.coefficients, atom_state.coefficients) / std::sqrt(before);
  out.overlap_defect = 1.0 - overlap * overlap;
  return out;
}

FeshbachMap::FeshbachMap(LinearOperator h, LinearOperator sector, std::span<const double> trial,
                         const FeshbachSettings& settings)
    : h_(std::move(h)), pi_(sector), psi_(sector(trial)), settings_(settings) {
  const double nn = std::sqrt(kernels::dot(psi_, psi_));
  if (!(nn > 0.0)) throw ValidityError("trial state vanishes in the symmetry sector");
  kernels::scale(1.0 / nn, psi_);
  pi_ = deflated_projector(sector, psi_);
  const auto hpsi = h_(psi_);
  trial_energy_ = kernels::dot(psi_, hpsi);
  g_ = pi_(hpsi);

  EigenOptions eo;
  eo.tol = settings_.gap_tol;
  eo.check_gap = false;
  eo.seed = settings_.seed;
  eo.projector = pi_;
  lowest_ = ground_state(conjugate(pi_, h_), eo).values.front();
}

double FeshbachMap::nonlinear(double lambda) const {
  if (kernels::dot(g_, g_) == 0.0) return 0.0;
  const ResolventRequest req{.op = h_,
                             .shift = lambda,
                             .rhs = g_,
                             .tol = settings_.resolvent_tol,
                             .projector = pi_,
                             .lowest = lowest_,
                             .gap_min = settings_.gap_min};
  const auto res = apply_resolvent(req);
  return kernels::dot(g_, res.solution);
}

FixedPoint FeshbachMap::solve() const {
  double e = trial_energy_;
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  FixedPoint fp;
  for (std::size_t k = 1; k <= settings_.max_iterations; ++k) {
    const double a = nonlinear(e);
    const double f = trial_energy_ - a;
    const double imp = e - f;
    fp = {e, a, imp, k};
    if (std::abs(imp) <= settings_.fixed_point_tol * std::max(1.0, std::abs(e))) return fp;
    if (imp > 0.0)
      hi = std::min(hi, e);
    else
      lo = std::max(lo, e);
    double next = f;
    if (std::isfinite(lo) && std::isfinite(hi) && !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    e = next;
  }
  std::ostringstream msg;
  msg << "Feshbach fixed point did not converge: |Imp| = " << std::abs(fp.imp) << " after "
      << settings_.max_iterations << " iterations";
  throw SolverError(msg.str());
}

double feshbach_value(const LinearOperator& h, const LinearOperator& sector, std::span<const double> trial,
                      double lambda, const FeshbachSettings& settings) {
  return FeshbachMap(h, sector, trial, settings).value(lambda);
}

FeshbachProblem::FeshbachProblem(const DimerSpec& spec, const Grid& grid, const AtomEigendata& atom1,
                                 const AtomEigendata& atom2, const FeshbachSettings& settings)
    : system_(spec, grid, DimerSystem::Options{settings.dim_cap, settings.cover_separation}), settings_(settings) {
  if (atom1.spectrum.values.size() < 2 || atom2.spectrum.values.size() < 2)
    throw ConfigError("Feshbach construction needs at least two atomic levels");
  r0_ = settings.anchor_on_grid ? anchor_separation(spec.separation, grid) : spec.separation - 0.5;
  const CutoffConfig cfg = cutoff_for(r0_, settings);
  if (!(cfg.dilation * cfg.outer_frac <= cfg.inner_frac + 1e-15))
    throw ConfigError("dilated cutoff is not identically one on the support of the cutoff states");

  const auto c1 = cutoff_ground_state({atom1.space, atom1.spectrum.vectors[0]}, cfg);
  const auto c2 = cutoff_ground_state({atom2.space, atom2.spectrum.vectors[0]}, cfg);
  mass_loss_ = std::max(c1.mass_loss, c2.mass_loss);
  pair_ = system_.place_pair(c1.phi, c2.phi).coefficients;
  e_inf_ = atom1.spectrum.values[0] + atom2.spectrum.values[0];

  w1_ = first_order(pair_, system_.interaction());
  const auto so = second_order(system_, pair_, e_inf_, {.tol = settings.resolvent_tol, .lowest = std::nullopt, .gap_min = settings.gap_min});
  w2_ = so.energy;

  const BumpProfile chi1 = bump(cfg);
  const TensorSpace& space = *system_.space();
  std::vector<std::size_t> idx(space.rank());
  psi0_ = pair_;
  double cn = 0.0;
  for (std::size_t i = 0; i < space.dim(); ++i) {
    if (so.correction[i] == 0.0) continue;
    space.unravel(i, idx);
    double chi = 1.0;
    for (std::size_t k = 0; k < space.rank(); ++k) chi *= chi1(cfg.dilation * system_.relative_coordinate(k, idx[k]));
    const double c = chi * so.correction[i];
    psi0_[i] -= c;
    cn += c * c;
  }
  correction_norm_ = std::sqrt(cn);
  map_.emplace(system_.hamiltonian(), system_.sector(), psi0_, settings);
}

EigenResult direct_ground_state(const DimerSystem& system, const FeshbachSettings& settings) {
  if (settings.direct == FeshbachSettings::Direct::dense) {
    const auto basis = antisymmetric_basis(*system.space(), sector_groups(system));
    return dense_oracle(system.hamiltonian(), {.cap = settings.dense_cap, .vectors = false}, &basis);
  }
  EigenOptions eo;
  eo.tol = settings.direct_tol;
  eo.seed = settings.seed;
  eo.projector = system.sector();
  return ground_state(system.hamiltonian(), eo);
}

FeshbachReport FeshbachProblem::solve() const {
  const FixedPoint fp = map_->solve();
  FeshbachReport rep;
  rep.r = system_.separation();
  rep.r0 = r0_;
  rep.E = fp.energy;
  rep.A = fp.nonlinear;
  rep.iterations = fp.iterations;
  rep.gap = stability_gap(fp.energy);
  rep.W1 = w1_;
  rep.W2 = w2_;
  rep.trial_energy = map_->trial_energy();
  rep.correction_norm = correction_norm_;
  rep.psi0_norm2 = kernels::dot(psi0_, psi0_);
  rep.mass_loss = mass_loss_;
  if (!(rep.gap > 0.0)) {
    std::ostringstream msg;
    msg << "stability gap is not positive at r = " << rep.r << ": C = " << rep.gap;
    throw ValidityError(msg.str());
  }
  if (settings_.direct != FeshbachSettings::Direct::none) {
    const auto direct = direct_ground_state(system_, settings_);
    rep.E_direct = direct.values.front();
    if (!direct.vectors.empty()) {
      const double ov = kernels::dot(map_->trial(), direct.vectors.front());
      rep.psi_overlap = ov * ov;
    }
  }
  return rep;
}

WitnessTable monotonicity_witness(const DimerSpec& spec, const Grid& grid, const AtomEigendata& atom1,
                                  const AtomEigendata& atom2, double s, const std::vector<double>& r_list,
                                  const FeshbachSettings& settings) {
  FeshbachSettings st = settings;
  st.direct = FeshbachSettings::Direct::none;
  if (spec.coupling == CouplingMode::full) {
    double cover = std::max(s, st.cover_separation);
    for (double r : r_list) cover = std::max(cover, r);
    st.cover_separation = cover;
  }
  DimerSpec anchor_spec = spec;
  anchor_spec.separation = s;
  const FeshbachProblem anchor(anchor_spec, grid, atom1, atom2, st);

  WitnessTable table;
  table.s = s;
  table.E_s = anchor.solve().E;
  const DimerSystem& base = anchor.system();
  std::vector<std::size_t> atom2_electrons;
  for (std::size_t k = base.electrons1(); k < base.electrons(); ++k) atom2_electrons.push_back(k);

  for (double r : r_list) {
    DimerSpec rs = spec;
    rs.separation = r;
    const FeshbachProblem here(rs, grid, atom1, atom2, st);
    std::vector<double> moved = anchor.trial_state();
    if (base.frame() == Frame::lab) {
      const QuantumState shifted = translate_state({base.space(), moved}, r - s, atom2_electrons);
      moved = shifted.coefficients;
    }
    const FeshbachMap map(here.system().hamiltonian(), here.system().sector(), moved, st);
    table.rows.push_back({r, map.value(table.E_s), here.solve().E});
  }
  return table;
}

}  // namespace dimerlab
