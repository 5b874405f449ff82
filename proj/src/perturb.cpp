#include "dimerlab/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dimerlab/error.hpp"
#include "dimerlab/kernels.hpp"

namespace dimerlab {

namespace {

double generalized_binomial(double x, int k) {
  double c = 1.0;
  for (int t = 0; t < k; ++t) c *= (x - t) / (t + 1);
  return c;
}

// delta_k0 - (-z_i)^k - z_j^k + (z_j - z_i)^k
double shift_polynomial(int k, double zi, double zj) {
  return (k == 0 ? 1.0 : 0.0) - std::pow(-zi, k) - std::pow(zj, k) + std::pow(zj - zi, k);
}

std::vector<double> electron_coordinate_sum(const TensorSpace& space) {
  std::vector<double> d(space.dim());
  std::vector<std::size_t> idx(space.rank());
  for (std::size_t i = 0; i < space.dim(); ++i) {
    space.unravel(i, idx);
    double s = 0.0;
    for (std::size_t k = 0; k < space.rank(); ++k) s += space.axis(k)[idx[k]];
    d[i] = s;
  }
  return d;
}

// <v_m, D v_1> for every stored level
std::vector<double> dipole_elements(const AtomEigendata& atom) {
  const auto d = electron_coordinate_sum(*atom.space);
  const auto& ground = atom.spectrum.vectors.at(0);
  std::vector<double> dv(ground.size());
  kernels::multiply(d, ground, dv);
  std::vector<double> out;
  for (const auto& v : atom.spectrum.vectors) out.push_back(kernels::dot(v, dv));
  return out;
}

bool even_parity(std::span<const double> v) {
  // reflecting every coordinate of a symmetric grid reverses the flat index
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * v[v.size() - 1 - i];
  return s > 0.0;
}

void require_same_grid(const AtomEigendata& a, const AtomEigendata& b) {
  if (a.grid.extent() != b.grid.extent() || a.grid.points() != b.grid.points())
    throw ConfigError("both atoms must live on the same grid");
}

}  // namespace

double MultipoleSeries::coefficient(int n, double zi, double zj) const {
  double c = 0.0;
  for (int j = 0; 2 * j <= n - 1; ++j) {
    const int k = n - 1 - 2 * j;
    c += generalized_binomial(-0.5, j) * generalized_binomial(-1.0 - 2 * j, k) * std::pow(softening, 2 * j) *
         shift_polynomial(k, zi, zj);
  }
  return c;
}

double MultipoleSeries::term(int n, double zi, double zj) const {
  return coefficient(n, zi, zj) * std::pow(separation, -n);
}

double MultipoleSeries::truncated(double zi, double zj) const {
  double s = 0.0;
  for (int n = 1; n <= order; ++n) s += term(n, zi, zj);
  return s;
}

LinearOperator MultipoleSeries::term_operator(const DimerSystem& system, int n) const {
  const TensorSpace& space = *system.space();
  const std::size_t n1 = system.electrons1(), total = system.electrons();
  std::vector<double> values(space.dim());
  std::vector<std::size_t> idx(total);
  for (std::size_t i = 0; i < space.dim(); ++i) {
    space.unravel(i, idx);
    double s = 0.0;
    for (std::size_t p = 0; p < n1; ++p)
      for (std::size_t q = n1; q < total; ++q)
        s += term(n, system.relative_coordinate(p, idx[p]), system.relative_coordinate(q, idx[q]));
    values[i] = s;
  }
  return diagonal_operator(std::move(values), "T" + std::to_string(n));
}

MultipoleSeries multipole_expand(const DimerSpec& spec, double r, int order, double support_radius) {
  if (order < 3 || order > 6) throw ConfigError("multipole order must be in 3..6");
  if (!(support_radius >= 0.0)) throw ConfigError("support radius must be non-negative");
  if (!(r > 2.0 * support_radius)) {
    std::ostringstream msg;
    msg << "separation " << r << " is not larger than twice the support radius " << support_radius;
    throw ValidityError(msg.str());
  }
  MultipoleSeries s;
  s.order = order;
  s.separation = r;
  s.softening = spec.atom1.softening;
  s.support_radius = support_radius;
  s.pairs = static_cast<std::size_t>(spec.atom1.electrons * spec.atom2.electrons);

  constexpr int lattice = 41;
  double worst = 0.0;
  for (int a = 0; a < lattice; ++a)
    for (int b = 0; b < lattice; ++b) {
      const double zi = -support_radius + 2.0 * support_radius * a / (lattice - 1);
      const double zj = -support_radius + 2.0 * support_radius * b / (lattice - 1);
      worst = std::max(worst, std::abs(pair_interaction(r, zi, zj, s.softening) - s.truncated(zi, zj)));
    }
  s.remainder_bound = 1.5 * worst;
  return s;
}

double first_order(std::span<const double> phi_pair, const LinearOperator& interaction) {
  const auto iphi = interaction(phi_pair);
  return kernels::dot(phi_pair, iphi) / kernels::dot(phi_pair, phi_pair);
}

SecondOrder second_order(const DimerSystem& system, std::span<const double> phi_pair, double e_inf,
                         const ResolventSettings& settings) {
  std::vector<double> phi(phi_pair.begin(), phi_pair.end());
  const double nn = std::sqrt(kernels::dot(phi, phi));
  kernels::scale(1.0 / nn, phi);
  const LinearOperator p0perp = deflated_projector(system.atom_sector(), phi);

  SecondOrder out;
  auto v = system.interaction()(phi);
  v = p0perp(v);
  if (kernels::dot(v, v) == 0.0) {
    out.correction.assign(v.size(), 0.0);
    return out;
  }

  ResolventRequest req{.op = system.unperturbed(), .shift = e_inf, .rhs = v, .tol = settings.tol};
  req.projector = p0perp;
  req.gap_min = settings.gap_min;
  if (settings.lowest) {
    req.lowest = settings.lowest;
  } else {
    EigenOptions eo;
    eo.tol = settings.certificate_tol;
    eo.check_gap = false;
    eo.projector = p0perp;
    req.lowest = ground_state(conjugate(p0perp, system.unperturbed()), eo).values.front();
  }
  auto res = apply_resolvent(req);
  out.energy = -kernels::dot(v, res.solution);
  out.certificate = res.certificate;
  out.iterations = res.iterations;
  out.correction = std::move(res.solution);
  return out;
}

AtomEigendata atom_eigendata(const AtomSpec& spec, const Grid& grid, std::size_t k, const EigenOptions& options,
                             std::size_t dense_cap) {
  const Hamiltonian h = atom_hamiltonian(spec, grid);
  AtomEigendata out{spec, grid, {}, h.space};
  const std::size_t n = h.space->rank();
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  const SparseBasis basis = antisymmetric_basis(*h.space, {all});

  if (basis.columns.size() <= dense_cap) {
    out.spectrum = dense_oracle(h.op, {.cap = dense_cap}, &basis);
    const std::size_t keep = std::min(k, out.spectrum.values.size());
    out.spectrum.values.resize(keep);
    out.spectrum.vectors.resize(keep);
    out.spectrum.residuals.resize(keep);
  } else {
    EigenOptions eo = options;
    if (n > 1) eo.projector = antisymmetrizer(h.space, {all});
    out.spectrum = lowest_k(h.op, k, eo);
  }
  if (out.spectrum.values.size() >= 2 && out.gap() < options.gap_min) {
    std::ostringstream msg;
    msg << "atomic ground state is degenerate: gap " << out.gap();
    throw ValidityError(msg.str());
  }
  return out;
}

SigmaResult c6_resolvent(const AtomEigendata& atom1, const AtomEigendata& atom2, double tol, double dipole_scale) {
  require_same_grid(atom1, atom2);
  DimerSpec spec{atom1.spec, atom2.spec, CouplingMode::decoupled, 1.0};
  DimerSystem pair(spec, atom1.grid);
  QuantumState z1{atom1.space, atom1.spectrum.vectors.at(0)};
  QuantumState z2{atom2.space, atom2.spectrum.vectors.at(0)};
  auto psi = pair.place_pair(z1, z2);
  psi.normalize();

  auto fpsi = pair.dipole()(psi.coefficients);
  kernels::scale(dipole_scale, fpsi);
  const LinearOperator perp = deflated_projector(pair.atom_sector(), psi.coefficients);
  const double e_inf = atom1.spectrum.values[0] + atom2.spectrum.values[0];

  ResolventRequest req{.op = pair.hamiltonian(), .shift = e_inf, .rhs = fpsi, .tol = tol};
  req.projector = perp;
  req.lowest = e_inf + std::min(atom1.gap(), atom2.gap());
  const auto res = apply_resolvent(req);
  return {kernels::dot(perp(fpsi), res.solution), "resolvent", res.residual, 0, res.iterations};
}

SigmaResult c6_sum_over_states(const AtomEigendata& atom1, const AtomEigendata& atom2, std::size_t nmax) {
  require_same_grid(atom1, atom2);
  const std::size_t available = std::min(atom1.spectrum.values.size(), atom2.spectrum.values.size());
  if (nmax > available) {
    std::ostringstream msg;
    msg << "nmax " << nmax << " exceeds the " << available << " levels available";
    throw ConfigError(msg.str());
  }
  const auto d1 = dipole_elements(atom1);
  const auto d2 = dipole_elements(atom2);
  const double e1 = atom1.spectrum.values[0], e2 = atom2.spectrum.values[0];

  double sigma = 0.0, w1 = 0.0, w2 = 0.0;
  for (std::size_t m = 1; m < nmax; ++m) {
    if (even_parity(atom1.spectrum.vectors[m])) continue;
    w1 += d1[m] * d1[m];
    for (std::size_t n = 1; n < nmax; ++n) {
      if (even_parity(atom2.spectrum.vectors[n])) continue;
      const double de = atom1.spectrum.values[m] - e1 + atom2.spectrum.values[n] - e2;
      sigma += 4.0 * d1[m] * d1[m] * d2[n] * d2[n] / de;
    }
  }
  for (std::size_t n = 1; n < nmax; ++n)
    if (!even_parity(atom2.spectrum.vectors[n])) w2 += d2[n] * d2[n];

  auto total = [](const AtomEigendata& a) {
    const auto d = electron_coordinate_sum(*a.space);
    const auto& g = a.spectrum.vectors[0];
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += d[i] * d[i] * g[i] * g[i];
    return s;
  };
  const double captured = std::min(w1 / total(atom1), w2 / total(atom2));
  return {sigma, "sum_over_states", captured, nmax, 0};
}

std::size_t converged_nmax(const AtomEigendata& atom1, const AtomEigendata& atom2, double fraction) {
  const std::size_t available = std::min(atom1.spectrum.values.size(), atom2.spectrum.values.size());
  for (std::size_t n = 1; n <= available; ++n)
    if (c6_sum_over_states(atom1, atom2, n).diagnostic >= fraction) return n;
  return available;
}

double second_moment(const TensorSpace& space, std::span<const double> state) {
  std::vector<std::size_t> idx(space.rank());
  double s = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < space.dim(); ++i) {
    space.unravel(i, idx);
    double z2 = 0.0;
    for (std::size_t k = 0; k < space.rank(); ++k) z2 += space.axis(k)[idx[k]] * space.axis(k)[idx[k]];
    s += z2 * state[i] * state[i];
    nn += state[i] * state[i];
  }
  return s / nn;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int max_depth) {
  if (a == b) return 0.0;
  struct Rec {
    const std::function<double(double)>& f;
    double run(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) const {
      const double m = 0.5 * (a + b);
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm), frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      const double delta = left + right - whole;
      if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
      return run(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + run(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
  };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return Rec{f}.run(a, b, fa, fm, fb, whole, tol, max_depth);
}

RadialDensity hydrogenic_density(double charge, double radius) {
  return {[charge](double t) { return std::exp(-charge * t); }, radius};
}

RadialDensity point_charge() { return {nullptr, 0.0}; }

NewtonResult newton_check(const RadialDensity& atom1, const RadialDensity& atom2, double r, double tol) {
  if (!(r > 0.0)) throw ConfigError("separation must be positive");
  if (atom1.radius < 0.0 || atom2.radius < 0.0) throw ConfigError("density radius must be non-negative");
  if (atom1.radius + atom2.radius >= r) {
    std::ostringstream msg;
    msg << "supports overlap: radii " << atom1.radius << " + " << atom2.radius << " >= separation " << r;
    throw ValidityError(msg.str());
  }
  constexpr double four_pi = 4.0 * std::numbers::pi;

  struct Shell {
    const RadialDensity& d;
    double tol;
    double norm = 1.0;
    bool point() const { return d.radius == 0.0 || !d.profile; }
    double charge_inside(double s) const {
      if (point()) return 1.0;
      const double top = std::min(s, d.radius);
      return norm * adaptive_simpson([&](double t) { return four_pi * t * t * d.profile(t); }, 0.0, top, tol);
    }
    double outer(double s) const {
      if (point() || s >= d.radius) return 0.0;
      return norm * adaptive_simpson([&](double t) { return four_pi * t * d.profile(t); }, s, d.radius, tol);
    }
    double potential(double s) const { return charge_inside(s) / s + outer(s); }
  };

  Shell s1{atom1, tol}, s2{atom2, tol};
  if (!s1.point()) s1.norm = 1.0 / s1.charge_inside(atom1.radius);
  if (!s2.point()) s2.norm = 1.0 / s2.charge_inside(atom2.radius);

  NewtonResult out;
  out.electron_nucleus1 = s1.potential(r);
  out.electron_nucleus2 = s2.potential(r);

  // sphere average of V1(|r e + y|) over |y| = t
  auto average = [&](double t) {
    if (t < 1e-12) return s1.potential(r);
    return adaptive_simpson([&](double s) { return s1.potential(s) * s; }, r - t, r + t, tol) / (2.0 * r * t);
  };
  if (s2.point()) {
    out.electron_electron = average(0.0);
  } else {
    out.electron_electron = s2.norm * adaptive_simpson(
                                          [&](double t) { return four_pi * t * t * atom2.profile(t) * average(t); },
                                          0.0, atom2.radius, tol);
  }
  out.residual = std::abs(1.0 / r - out.electron_nucleus1 - out.electron_nucleus2 + out.electron_electron);
  return out;
}

}  // namespace dimerlab
