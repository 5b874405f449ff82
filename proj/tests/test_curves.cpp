#include <cmath>
#include <random>

#include "doctest.h"
#include "dimerlab/curves.hpp"
#include "dimerlab/error.hpp"
#include "dimerlab/kernels.hpp"

using namespace dimerlab;

TEST_SUITE("curves") {

TEST_CASE("five-point derivatives of smooth functions") {
  std::vector<double> r, y;
  for (int i = 0; i < 21; ++i) {
    r.push_back(10.0 + 0.5 * i);
    y.push_back(std::pow(r.back(), -6.0));
  }
  const auto plain = derivatives(r, y, false);
  const auto rich = derivatives(r, y, true);
  CHECK_FALSE(plain[0].available);
  CHECK_FALSE(plain[1].available);
  CHECK_FALSE(plain[20].available);
  for (std::size_t i = 2; i + 2 < r.size(); ++i) {
    const double d1 = -6.0 * std::pow(r[i], -7.0), d2 = 42.0 * std::pow(r[i], -8.0);
    CHECK(plain[i].d1 == doctest::Approx(d1).epsilon(1e-3));
    CHECK(plain[i].d2 == doctest::Approx(d2).epsilon(1e-3));
    if (i >= 4 && i + 4 < r.size()) {
      CHECK(std::abs(rich[i].d1 - d1) < std::abs(plain[i].d1 - d1));
      CHECK(std::abs(rich[i].d2 - d2) < std::abs(plain[i].d2 - d2));
      CHECK(std::abs(plain[i].d1 - d1) < 3.0 * plain[i].d1_error);
    } else {
      CHECK(std::isnan(rich[i].d1_error));
    }
  }
}

TEST_CASE("five-point stencil is exact on quartics") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const double c[5] = {u(rng), u(rng), u(rng), u(rng), u(rng)};
    std::vector<double> r, y;
    for (int i = 0; i < 7; ++i) {
      const double x = 0.3 * i;
      r.push_back(x);
      y.push_back(c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * c[4]))));
    }
    const auto d = derivatives(r, y, false);
    const double x = r[3];
    CHECK(d[3].d1 == doctest::Approx(c[1] + x * (2 * c[2] + x * (3 * c[3] + x * 4 * c[4]))).epsilon(1e-10));
    CHECK(d[3].d2 == doctest::Approx(2 * c[2] + x * (6 * c[3] + x * 12 * c[4])).epsilon(1e-9));
  }
}

TEST_CASE("derivative validation") {
  const std::vector<double> r{1, 2, 3, 4}, y{1, 2, 3, 4};
  CHECK_THROWS_AS(derivatives(r, y), ConfigError);
  const std::vector<double> gap{1, 2, 3, 5, 6, 7}, v{1, 1, 1, 1, 1, 1};
  const auto d = derivatives(gap, v);
  CHECK_FALSE(d[2].available);
  CHECK_FALSE(d[3].available);
}

TEST_CASE("power-law fit recovers exponent and coefficient") {
  std::vector<double> r, y;
  for (int i = 0; i < 12; ++i) {
    r.push_back(16.0 + 2.0 * i);
    y.push_back(-3.25 * std::pow(r.back(), -6.0));
  }
  const auto fit = fit_power_law(r, y, 16.0, 38.0);
  CHECK(fit.exponent == doctest::Approx(-6.0).epsilon(1e-12));
  CHECK(fit.coefficient == doctest::Approx(3.25).epsilon(1e-10));
  CHECK(fit.points == 12);
  CHECK_THROWS_AS(fit_power_law(r, y, 16.0, 20.0), ConfigError);
  y[4] = -y[4];
  CHECK_THROWS_AS(fit_power_law(r, y, 16.0, 38.0), ValidityError);
}

TEST_CASE("Lennard-Jones fit") {
  std::vector<double> r, w;
  for (int i = 0; i <= 40; ++i) {
    r.push_back(1.0 + 0.05 * i);
    w.push_back(4.0 * std::pow(r.back(), -12.0) - 2.5 * std::pow(r.back(), -6.0));
  }
  const auto lj = lj_fit(r, w, 1.0, 3.0);
  CHECK(lj.repulsive_term);
  CHECK(lj.c12 == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(lj.c6 == doctest::Approx(2.5).epsilon(1e-9));
  for (std::size_t i = 0; i < r.size(); ++i) w[i] = -2.5 * std::pow(r[i], -6.0);
  const auto tail = lj_fit(r, w, 2.0, 3.0);
  CHECK_FALSE(tail.repulsive_term);
  CHECK(tail.c6 == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("power-law tail of the dipole scan") {
  const Grid g = build_grid(10, 41);
  const auto a = atom_eigendata(AtomSpec{}, g, 8);
  const double sigma = c6_resolvent(a, a).sigma;
  const DimerSpec tmpl{.coupling = CouplingMode::dipole_truncated};
  FeshbachSettings st;
  st.direct = FeshbachSettings::Direct::none;
  const auto table = scan(tmpl, g, {4.0, 26.0, 27.0, 28.0, 29.0, 30.0, 31.0, 32.0}, st, a, a);
  CHECK_FALSE(table.rows[0].valid);
  CHECK_FALSE(table.rows[0].error.empty());
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    REQUIRE(row.valid);
    CHECK(row.W < 0.0);
    CHECK(row.W * std::pow(row.r, 6) == doctest::Approx(-sigma).epsilon(2e-3));
  }
  CHECK(table.checksum() < 1e-15);
  const auto d = derivatives(table);
  CHECK_FALSE(d[2].available);
  CHECK(d[4].available);
  CHECK(d[4].d1 == doctest::Approx(6.0 * sigma * std::pow(28.0, -7.0)).epsilon(1e-2));
  CHECK_THROWS_AS(scan(tmpl, g, {30.0, 28.0}, st, a, a), ConfigError);
}

TEST_CASE("Hellmann-Feynman against finite differences") {
  const Grid g = build_grid(8, 25);
  const double r = 9.0, dr = 1e-3;
  auto energy = [&](double sep, std::vector<double>* vec) {
    const DimerSystem sys({.coupling = CouplingMode::dipole_truncated, .separation = sep}, g);
    const auto res = dense_oracle(sys.hamiltonian(), {.vectors = vec != nullptr});
    if (vec) *vec = res.vectors.front();
    return res.values.front();
  };
  std::vector<double> psi;
  energy(r, &psi);
  const DimerSystem sys({.coupling = CouplingMode::dipole_truncated, .separation = r}, g);
  const double hf = hellmann_feynman(sys, psi);
  const double fd = (energy(r + dr, nullptr) - energy(r - dr, nullptr)) / (2.0 * dr);
  CHECK(hf > 0.0);
  CHECK(hf == doctest::Approx(fd).epsilon(1e-5));
  std::vector<double> bad(psi.size(), 1.0);
  CHECK_THROWS_AS(hellmann_feynman(sys, bad), ValidityError);
  const DimerSystem dec({.coupling = CouplingMode::decoupled, .separation = r}, g);
  CHECK(hellmann_feynman(dec, psi, 1.0) == 0.0);
}

TEST_CASE("dissociation energies") {
  const Grid g = build_grid(12, 49);
  const auto table = dissociation_check(AtomSpec{}, AtomSpec{}, g);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0].m == -1);
  CHECK(table.rows[2].m == 1);
  for (const auto& row : table.rows) CHECK(row.valid);
  CHECK(table.rows[0].sum == doctest::Approx(table.rows[2].sum).epsilon(1e-10));
  CHECK(table.strict_minimum_at_zero);
  CHECK(table.margin > 0.0);
  CHECK(ion_ground_energy(AtomSpec{}, 1, g) == 0.0);
  CHECK_THROWS_AS(ion_ground_energy(AtomSpec{}, 2, g), ConfigError);
}

TEST_CASE("ground-state tails decay exponentially") {
  SUBCASE("soft-Coulomb atom") {
    const Grid g = build_grid(30, 241);
    const auto h = atom_hamiltonian(AtomSpec{}, g);
    const auto gs = ground_state(h.op);
    const auto fit = decay_rate({h.space, gs.vectors.front()}, DimensionMode::soft_coulomb_1d, 30.0);
    CHECK(fit.exponential);
    CHECK(fit.rate == doctest::Approx(-std::sqrt(-gs.values.front())).epsilon(0.1));
  }
  SUBCASE("radial hydrogen") {
    const Grid g = build_grid(40, 321);
    const auto h = atom_hamiltonian({.mode = DimensionMode::radial_3d}, g);
    const auto gs = ground_state(h.op);
    const auto fit = decay_rate({h.space, gs.vectors.front()}, DimensionMode::radial_3d, 40.0);
    CHECK(fit.exponential);
    CHECK(fit.rate == doctest::Approx(-0.5).epsilon(0.04));
  }
}

}
