#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dimerlab/error.hpp"
#include "dimerlab/kernels.hpp"
#include "dimerlab/model.hpp"
#include "dimerlab/solve.hpp"

using namespace dimerlab;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("grid spacing and validation") {
  CHECK(build_grid(10, 11).spacing() == doctest::Approx(2.0));
  CHECK(build_grid(20, 401).spacing() == doctest::Approx(0.1));
  CHECK_THROWS_AS(build_grid(10, 3), ConfigError);
  CHECK_THROWS_AS(build_grid(-1, 20), ConfigError);
  const Grid g = build_grid(4, 9);
  CHECK(g.axis()[0] == -4.0);
  CHECK(g.axis().back() == 4.0);
  CHECK(g.steps(3.0) == 3);
  CHECK_THROWS_AS(g.steps(0.5), ConfigError);
}

TEST_CASE("atom hamiltonian is symmetric and matches the box spectrum at Z = 0") {
  const Grid g = build_grid(5, 201);
  AtomSpec box{.charge = 0.0, .electrons = 1, .softening = 1.0};
  const auto h = atom_hamiltonian(box, g);
  CHECK(symmetry_defect(h.op, 4, 1) < 1e-10);
  EigenOptions eo;
  eo.check_gap = false;
  const auto res = lowest_k(h.op, 2, eo);
  // Dirichlet walls sit one step outside +-L
  const double width = 2.0 * g.extent() + 2.0 * g.spacing();
  for (int k = 1; k <= 2; ++k) {
    const double exact = std::pow(k * std::numbers::pi / width, 2);
    CHECK(std::abs(res.values[k - 1] - exact) < 2e-4);
  }
}

TEST_CASE("ion hamiltonian conventions") {
  const Grid g = build_grid(8, 33);
  AtomSpec h1{.charge = 1.0, .electrons = 1, .softening = 1.0};
  const auto empty = ion_hamiltonian(h1, 1, g);
  CHECK(empty.space->dim() == 1);
  CHECK(empty.op(std::vector<double>{1.0})[0] == 0.0);
  CHECK_THROWS_AS(ion_hamiltonian(h1, 2, g), ConfigError);
  const auto a = atom_hamiltonian(h1, g);
  const auto b = ion_hamiltonian(h1, 0, g);
  std::mt19937 rng(3);
  const auto v = random_vector(a.space->dim(), rng);
  CHECK(max_abs_diff(a.op(v), b.op(v)) == 0.0);
  AtomSpec he{.charge = 2.0, .electrons = 2, .softening = 1.0};
  const auto he_plus = ion_hamiltonian(he, 1, g);
  CHECK(he_plus.space->rank() == 1);
  AtomSpec bad{.charge = 1.0, .electrons = 2, .mode = DimensionMode::radial_3d};
  CHECK_THROWS_AS(atom_hamiltonian(bad, g), ConfigError);
}

TEST_CASE("antisymmetrizer is a projection and kills symmetric products") {
  const Grid g = build_grid(3, 9);
  CHECK(antisymmetrizer(1, g).description() == "identity");
  CHECK_THROWS_AS(antisymmetrizer(5, g), ConfigError);
  std::mt19937 rng(7);
  for (std::size_t n : {2u, 3u}) {
    const auto q = antisymmetrizer(n, g);
    const auto v = random_vector(q.dim(), rng);
    const auto qv = q(v);
    CHECK(max_abs_diff(q(qv), qv) < 1e-12);
    CHECK(symmetry_defect(q, 3, 2) < 1e-12);
  }
  const auto q2 = antisymmetrizer(2, g);
  const auto u = random_vector(9, rng);
  std::vector<double> uu(81);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j) uu[i * 9 + j] = u[i] * u[j];
  for (double x : q2(uu)) CHECK(std::abs(x) < 1e-14);
}

TEST_CASE("antisymmetrized states change sign under transpositions") {
  const Grid g = build_grid(3, 9);
  const auto q = antisymmetrizer(3, g);
  TensorSpace space(std::vector<Axis>(3, g.axis()));
  std::mt19937 rng(11);
  const auto psi = q(random_vector(q.dim(), rng));
  for (std::vector<std::size_t> pi : {std::vector<std::size_t>{1, 0, 2}, {0, 2, 1}, {2, 1, 0}}) {
    auto moved = permute(space, pi, psi);
    for (std::size_t i = 0; i < psi.size(); ++i) CHECK(moved[i] == doctest::Approx(-psi[i]).epsilon(1e-12));
  }
}

TEST_CASE("interaction and dipole pointwise values") {
  CHECK(pair_interaction(20, 0, 0, 0.5) == doctest::Approx(0.0).epsilon(1e-15));
  const double a = 0.5, r = 20;
  auto d = [a](double u) { return std::sqrt(u * u + a * a); };
  CHECK(pair_interaction(r, 1, 1, a) ==
        doctest::Approx(1 / d(r) - 1 / d(r - 1) - 1 / d(r + 1) + 1 / d(r + 1 - 1)).epsilon(1e-15));
  // reflection: (zi, zj) -> (-zj, -zi) is the relabeling symmetry of the four-term formula
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int t = 0; t < 50; ++t) {
    const double zi = u(rng), zj = u(rng);
    CHECK(pair_interaction(r, zi, zj, a) == doctest::Approx(pair_interaction(r, -zj, -zi, a)).epsilon(1e-13));
  }

  const Grid g = build_grid(2, 9);  // h = 0.5, points at 1.0 are on the grid
  DimerSpec dip{.coupling = CouplingMode::dipole_truncated, .separation = 10};
  DimerSystem sys(dip, g);
  const auto& vals = sys.interaction_values();
  const std::size_t i1 = 6;  // z = 1
  CHECK(vals[i1 * 9 + i1] == doctest::Approx(-0.002));
  const auto f = sys.dipole();
  std::vector<double> e(81, 0.0);
  e[i1 * 9 + i1] = 1.0;
  CHECK(f(e)[i1 * 9 + i1] == doctest::Approx(-2.0));
  e.assign(81, 0.0);
  e[4 * 9 + 7] = 1.0;  // z1 = 0
  CHECK(f(e)[4 * 9 + 7] == 0.0);

  DimerSpec dec{.coupling = CouplingMode::decoupled, .separation = 10};
  DimerSystem decoupled(dec, g);
  for (double x : decoupled.interaction_values()) CHECK(x == 0.0);
}

TEST_CASE("full-mode dimer: Q commutes with H and the potential is the symmetric lab form") {
  const Grid g = build_grid(3, 13);  // h = 0.5
  DimerSpec spec{.coupling = CouplingMode::full, .separation = 4};
  DimerSystem sys(spec, g);
  CHECK(sys.frame() == Frame::lab);
  const auto& h = sys.hamiltonian();
  const auto& q = sys.sector();
  CHECK(symmetry_defect(h, 3, 9) < 1e-10);
  std::mt19937 rng(2);
  const auto v = random_vector(h.dim(), rng);
  CHECK(max_abs_diff(q(h(v)), h(q(v))) < 1e-10);

  const auto& ax = sys.space()->axis(0);
  const double a = spec.atom1.softening, r = spec.separation;
  auto d = [a](double u) { return std::sqrt(u * u + a * a); };
  std::vector<std::size_t> idx(2);
  for (std::size_t i = 0; i < h.dim(); i += 17) {
    sys.space()->unravel(i, idx);
    const double x1 = ax[idx[0]], x2 = ax[idx[1]];
    const double expected = -1 / d(x1) - 1 / d(x1 - r) - 1 / d(x2) - 1 / d(x2 - r) + 1 / d(x1 - x2) + 1 / d(r);
    CHECK(sys.potential()[i] == doctest::Approx(expected).epsilon(1e-12));
  }
  DimerSpec off = spec;
  off.separation = 4.25;
  CHECK_THROWS_AS(DimerSystem(off, g), ConfigError);
  DimerSpec charged = spec;
  charged.atom1.charge = 2.0;
  CHECK_THROWS_AS(DimerSystem(charged, g), ConfigError);
  DimerSystem::Options tiny;
  tiny.dim_cap = 10;
  CHECK_THROWS_AS(DimerSystem(spec, g, tiny), ConfigError);
}

TEST_CASE("full-mode separation derivative matches a finite difference of the potential") {
  const Grid g = build_grid(3, 13);
  DimerSpec spec{.coupling = CouplingMode::full, .separation = 4};
  DimerSystem::Options opt;
  opt.cover_separation = 6;
  DimerSystem sys(spec, g, opt);
  const auto dv = sys.separation_derivative();
  // the potential at fixed lab coordinates as a function of r
  const auto& ax = sys.space()->axis(0);
  const double a = spec.atom1.softening;
  auto d = [a](double u) { return std::sqrt(u * u + a * a); };
  auto v = [&](double x1, double x2, double r) {
    return -1 / d(x1) - 1 / d(x1 - r) - 1 / d(x2) - 1 / d(x2 - r) + 1 / d(x1 - x2) + 1 / d(r);
  };
  std::vector<std::size_t> idx(2);
  const double eps = 1e-5, r = spec.separation;
  for (std::size_t i = 0; i < dv.size(); i += 13) {
    sys.space()->unravel(i, idx);
    const double x1 = ax[idx[0]], x2 = ax[idx[1]];
    const double fd = (v(x1, x2, r + eps) - v(x1, x2, r - eps)) / (2 * eps);
    CHECK(dv[i] == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("decoupled dimer ground energy is E1 + E2") {
  const Grid g = build_grid(8, 41);
  DimerSpec spec{.coupling = CouplingMode::decoupled, .separation = 20};
  const auto atom = atom_hamiltonian(spec.atom1, g);
  const double e1 = ground_state(atom.op).values[0];
  DimerSystem sys(spec, g);
  const double e = ground_state(sys.hamiltonian(), {.check_gap = false}).values[0];
  CHECK(e == doctest::Approx(2 * e1).epsilon(1e-10));
}

TEST_CASE("full-mode energies move with r and approach E1 + E2") {
  const Grid g = build_grid(6, 25);  // h = 0.5
  DimerSpec spec{.coupling = CouplingMode::full};
  const double e1 = ground_state(atom_hamiltonian(spec.atom1, g).op).values[0];
  std::vector<double> w;
  for (double r : {8.0, 8.5, 14.0}) {
    spec.separation = r;
    DimerSystem sys(spec, g);
    EigenOptions eo;
    eo.projector = sys.sector();
    w.push_back(ground_state(sys.hamiltonian(), eo).values[0] - 2 * e1);
  }
  CHECK(w[0] != w[1]);
  CHECK(std::abs(w[2]) < std::abs(w[0]));
  CHECK(std::abs(w[2]) < 1e-3);
}

TEST_CASE("translation round trip, norm, and mass-loss guard") {
  const Grid g = build_grid(5, 21);
  const auto atom = atom_hamiltonian(AtomSpec{}, g);
  QuantumState s{atom.space, ground_state(atom.op).vectors[0]};
  const std::vector<std::size_t> which{0};
  const auto same = translate_state(s, 0.0, which);
  CHECK(max_abs_diff(same.coefficients, s.coefficients) == 0.0);
  // a compactly supported state round-trips exactly
  QuantumState bump{atom.space, std::vector<double>(21, 0.0)};
  for (std::size_t i = 8; i <= 12; ++i) bump.coefficients[i] = 1.0 + 0.1 * static_cast<double>(i);
  const auto moved = translate_state(bump, 2.0, which);
  CHECK(moved.norm() == doctest::Approx(bump.norm()));
  const auto back = translate_state(moved, -2.0, which);
  CHECK(max_abs_diff(back.coefficients, bump.coefficients) < 1e-12);
  CHECK_THROWS_AS(translate_state(s, 4.0, which), ValidityError);
  CHECK_THROWS_AS(translate_state(bump, 0.3, which), ConfigError);
}

TEST_CASE("parity of the atomic ground state") {
  const Grid g = build_grid(10, 81);
  const auto atom = atom_hamiltonian(AtomSpec{}, g);
  auto v = ground_state(atom.op).vectors[0];
  double zmean = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(std::abs(v[i] - v[v.size() - 1 - i]) < 1e-9);
    zmean += g.axis()[i] * v[i] * v[i];
  }
  CHECK(std::abs(zmean) < 1e-10);
}

}  // TEST_SUITE
