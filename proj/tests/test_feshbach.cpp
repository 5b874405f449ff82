#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "dimerlab/error.hpp"
#include "dimerlab/feshbach.hpp"
#include "dimerlab/kernels.hpp"

using namespace dimerlab;

namespace {

LinearOperator matrix_operator(const Eigen::MatrixXd& m) {
  return LinearOperator(
      static_cast<std::size_t>(m.rows()),
      [m](std::span<const double> x, std::span<double> y) {
        Eigen::Map<const Eigen::VectorXd> xv(x.data(), m.cols());
        Eigen::Map<Eigen::VectorXd>(y.data(), m.rows()) = m * xv;
      },
      true, "matrix");
}

const Grid& atom_grid() {
  static const Grid g = build_grid(10, 41);
  return g;
}

const AtomEigendata& atom() {
  static const AtomEigendata a = atom_eigendata(AtomSpec{}, atom_grid(), 8);
  return a;
}

}  // namespace

TEST_SUITE("feshbach") {

TEST_CASE("bump profile") {
  const BumpProfile b = bump({.r0 = 14.0});
  CHECK(b.inner == doctest::Approx(2.0));
  CHECK(b.outer == doctest::Approx(14.0 / 6.0));
  CHECK(b(0.0) == 1.0);
  CHECK(b(-2.0) == 1.0);
  CHECK(b(2.4) == 0.0);
  double prev = 1.0;
  for (double x = 2.0; x <= 2.4; x += 0.01) {
    const double v = b(x);
    CHECK(v <= prev + 1e-15);
    CHECK(v >= 0.0);
    CHECK(b(-x) == v);
    prev = v;
  }
  CHECK_THROWS_AS(bump({.r0 = 0.0}), ConfigError);
  CHECK_THROWS_AS(bump({.r0 = 10.0, .inner_frac = 0.3, .outer_frac = 0.2}), ConfigError);
}

TEST_CASE("anchor separation") {
  CHECK(anchor_separation(16.0, build_grid(16, 65)) == doctest::Approx(15.5));
  CHECK(anchor_separation(16.0, build_grid(16, 33)) == doctest::Approx(15.5));
  CHECK(anchor_separation(16.3, build_grid(16, 33)) == doctest::Approx(15.8));
  CHECK(anchor_separation(16.3, build_grid(16, 65)) == doctest::Approx(15.5));
  CHECK(anchor_separation(16.0, build_grid(16, 9)) == doctest::Approx(15.5));
}

TEST_CASE("cutoff ground state") {
  const auto& a = atom();
  const QuantumState phi{a.space, a.spectrum.vectors[0]};
  double previous = 1.0;
  for (double r0 : {24.0, 30.0, 40.0, 50.0}) {
    const CutoffConfig cfg{.r0 = r0, .inner_frac = 1.0 / 3.0, .outer_frac = 7.0 / 18.0};
    const auto c = cutoff_ground_state(phi, cfg);
    CHECK(c.phi.norm() == doctest::Approx(1.0).epsilon(1e-14));
    const BumpProfile b = bump(cfg);
    for (std::size_t i = 0; i < c.phi.coefficients.size(); ++i)
      if (std::abs(a.space->axis(0)[i]) >= b.outer) CHECK(c.phi.coefficients[i] == 0.0);
    CHECK(c.overlap_defect <= previous);
    CHECK(c.mass_loss >= 0.0);
    previous = c.overlap_defect;
  }
  CHECK_THROWS_AS(cutoff_ground_state(phi, {.r0 = 3.0}), ValidityError);
}

TEST_CASE("Feshbach map on a small matrix") {
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  for (int t = 0; t < 5; ++t) {
    Eigen::MatrixXd m(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = 0.2 * g(rng);
    for (int i = 0; i < 6; ++i) m(i, i) += i;
    const double lowest = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues()[0];
    const auto h = matrix_operator(m);
    std::vector<double> trial(6, 0.0);
    trial[0] = 1.0;
    const FeshbachMap map(h, identity_operator(6), trial);
    CHECK(map.trial_energy() == doctest::Approx(m(0, 0)));
    const auto fp = map.solve();
    CHECK(fp.energy == doctest::Approx(lowest).epsilon(1e-12));
    CHECK(std::abs(fp.imp) < 1e-12);
    CHECK(map.lowest() > fp.energy);
    const Eigen::MatrixXd tail = m.bottomRightCorner(5, 5);
    const Eigen::VectorXd b = m.col(0).tail(5);
    const double lam = lowest - 0.1;
    const double schur = m(0, 0) - b.dot((tail - lam * Eigen::MatrixXd::Identity(5, 5)).ldlt().solve(b));
    CHECK(map.value(lam) == doctest::Approx(schur).epsilon(1e-10));
  }
}

TEST_CASE("2x2 Feshbach value") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 0.5, 0.5, 3.0;
  std::vector<double> trial{1.0, 0.0};
  for (double lam : {-1.0, 0.0, 0.5})
    CHECK(feshbach_value(matrix_operator(m), identity_operator(2), trial, lam) ==
          doctest::Approx(1.0 - 0.25 / (3.0 - lam)).epsilon(1e-12));
}

TEST_CASE("decoupled dimer recovers the sum of atomic energies") {
  const auto& a = atom();
  const DimerSpec spec{.coupling = CouplingMode::decoupled, .separation = 30};
  FeshbachSettings st;
  st.direct = FeshbachSettings::Direct::none;
  const FeshbachProblem p(spec, atom_grid(), a, a, st);
  const auto rep = p.solve();
  CHECK(rep.E == doctest::Approx(2.0 * a.spectrum.values[0]).epsilon(1e-12));
  CHECK(std::abs(rep.A) < 1e-14);
  CHECK(rep.W1 == 0.0);
  CHECK(rep.W2 == 0.0);
  CHECK(rep.gap > 0.0);
}

TEST_CASE("dipole dimer agrees with the direct eigenvalue") {
  const auto& a = atom();
  for (double r : {26.0, 32.0}) {
    const DimerSpec spec{.coupling = CouplingMode::dipole_truncated, .separation = r};
    FeshbachSettings st;
    st.direct = FeshbachSettings::Direct::dense;
    const FeshbachProblem p(spec, atom_grid(), a, a, st);
    const auto rep = p.solve();
    CHECK(std::abs(rep.E - rep.E_direct) <= 1e-10 * std::abs(rep.E));
    CHECK(rep.E < 2.0 * a.spectrum.values[0]);
    CHECK(rep.gap > 0.0);
    CHECK(rep.A >= 0.0);
  }
}

TEST_CASE("full-mode dimer agrees with the direct eigenvalue") {
  const Grid g = build_grid(8, 17);
  const auto a = atom_eigendata(AtomSpec{}, g, 4);
  const DimerSpec spec{.coupling = CouplingMode::full, .separation = 16};
  FeshbachSettings st;
  st.direct = FeshbachSettings::Direct::dense;
  const FeshbachProblem p(spec, g, a, a, st);
  const auto rep = p.solve();
  CHECK(std::abs(rep.E - rep.E_direct) <= 1e-9 * std::abs(rep.E));
}

TEST_CASE("witness at the anchor reproduces the fixed point") {
  const auto& a = atom();
  const DimerSpec spec{.coupling = CouplingMode::dipole_truncated};
  const auto w = monotonicity_witness(spec, atom_grid(), a, a, 26.0, {26.0, 28.0, 30.0});
  REQUIRE(w.rows.size() == 3);
  CHECK(w.rows[0].D == doctest::Approx(w.E_s).epsilon(1e-12));
  for (const auto& row : w.rows) CHECK(row.D >= w.E_s - 1e-12);
  CHECK(w.rows[2].E > w.rows[1].E);
}

}
