#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dimerlab/error.hpp"
#include "dimerlab/kernels.hpp"
#include "dimerlab/perturb.hpp"

using namespace dimerlab;

namespace {

const Grid& small_grid() {
  static const Grid g = build_grid(10, 41);
  return g;
}

const AtomEigendata& small_atom() {
  static const AtomEigendata a = atom_eigendata(AtomSpec{}, small_grid(), 41);
  return a;
}

}  // namespace

TEST_SUITE("perturb") {

TEST_CASE("multipole orders one and two vanish, order three is the dipole") {
  const DimerSpec spec{.coupling = CouplingMode::full};
  const auto series = multipole_expand(spec, 30.0, 3, 2.0);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 50; ++t) {
    const double zi = u(rng), zj = u(rng);
    CHECK(std::abs(series.coefficient(1, zi, zj)) < 1e-14);
    CHECK(std::abs(series.coefficient(2, zi, zj)) < 1e-14);
    CHECK(series.coefficient(3, zi, zj) == doctest::Approx(-2.0 * zi * zj).epsilon(1e-12));
  }
}

TEST_CASE("truncated series approaches the pair interaction") {
  const DimerSpec spec{.coupling = CouplingMode::full};
  std::vector<double> scaled;
  for (double r : {20.0, 40.0, 80.0}) {
    const auto s3 = multipole_expand(spec, r, 3, 2.0);
    scaled.push_back(s3.remainder_bound * std::pow(r, 4));
    const double exact = pair_interaction(r, 0.7, -1.1, spec.atom1.softening);
    CHECK(std::abs(exact - s3.truncated(0.7, -1.1)) <= s3.remainder_bound);
    const auto s6 = multipole_expand(spec, r, 6, 2.0);
    CHECK(std::abs(exact - s6.truncated(0.7, -1.1)) < std::abs(exact - s3.truncated(0.7, -1.1)));
  }
  CHECK(scaled[2] < 1.5 * scaled[0]);
  CHECK(scaled[2] > 0.5 * scaled[0]);
}

TEST_CASE("multipole validation") {
  const DimerSpec spec{};
  CHECK_THROWS_AS(multipole_expand(spec, 30.0, 2, 2.0), ConfigError);
  CHECK_THROWS_AS(multipole_expand(spec, 30.0, 7, 2.0), ConfigError);
  CHECK_THROWS_AS(multipole_expand(spec, 3.0, 3, 2.0), ValidityError);
}

TEST_CASE("atom spectrum is sorted and the ground state is even") {
  const auto& a = small_atom();
  for (std::size_t k = 1; k < a.spectrum.values.size(); ++k) CHECK(a.spectrum.values[k] >= a.spectrum.values[k - 1]);
  CHECK(a.gap() > 0.0);
  const auto& phi = a.spectrum.vectors[0];
  for (std::size_t i = 0; i < phi.size(); ++i) CHECK(std::abs(phi[i] - phi[phi.size() - 1 - i]) < 1e-10);
  CHECK(second_moment(*a.space, phi) > 0.0);
}

TEST_CASE("dipole coupling has no first-order energy") {
  const auto& a = small_atom();
  const DimerSpec spec{.coupling = CouplingMode::dipole_truncated, .separation = 12};
  const DimerSystem sys(spec, small_grid());
  const QuantumState phi{a.space, a.spectrum.vectors[0]};
  const auto pair = sys.place_pair(phi, phi);
  CHECK(std::abs(first_order(pair.coefficients, sys.interaction())) < 1e-14);
}

TEST_CASE("second order is negative and matches the dispersion constant in dipole mode") {
  const auto& a = small_atom();
  const double sigma = c6_resolvent(a, a).sigma;
  CHECK(sigma > 0.0);
  for (double r : {8.0, 12.0, 20.0}) {
    const DimerSpec spec{.coupling = CouplingMode::dipole_truncated, .separation = r};
    const DimerSystem sys(spec, small_grid());
    const QuantumState phi{a.space, a.spectrum.vectors[0]};
    const auto pair = sys.place_pair(phi, phi);
    const auto so = second_order(sys, pair.coefficients, 2.0 * a.spectrum.values[0]);
    CHECK(so.energy <= 0.0);
    CHECK(so.energy * std::pow(r, 6) == doctest::Approx(-sigma).epsilon(1e-8));
    CHECK(so.certificate > 0.0);
  }
}

TEST_CASE("sum over states against the resolvent") {
  const auto& a = small_atom();
  const auto res = c6_resolvent(a, a);
  const auto full = c6_sum_over_states(a, a, a.spectrum.values.size());
  CHECK(full.sigma == doctest::Approx(res.sigma).epsilon(1e-8));
  CHECK(c6_sum_over_states(a, a, 1).sigma == 0.0);
  double previous = 0.0;
  for (std::size_t n = 1; n <= 12; ++n) {
    const double s = c6_sum_over_states(a, a, n).sigma;
    CHECK(s >= previous);
    previous = s;
  }
  const std::size_t n = converged_nmax(a, a);
  CHECK(c6_sum_over_states(a, a, n).diagnostic >= 0.999);
  CHECK_THROWS_AS(c6_sum_over_states(a, a, a.spectrum.values.size() + 1), ConfigError);
}

TEST_CASE("doubling the dipole quadruples sigma") {
  const auto& a = small_atom();
  const double s1 = c6_resolvent(a, a).sigma;
  const double s2 = c6_resolvent(a, a, 1e-11, 2.0).sigma;
  CHECK(s2 == doctest::Approx(4.0 * s1).epsilon(1e-9));
}

TEST_CASE("adaptive Simpson") {
  CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-12) ==
        doctest::Approx(2.0).epsilon(1e-11));
  CHECK(adaptive_simpson([](double x) { return std::exp(-x); }, 0.0, 5.0, 1e-12) ==
        doctest::Approx(1.0 - std::exp(-5.0)).epsilon(1e-11));
}

TEST_CASE("Newton check for separated spherical atoms") {
  const auto p = newton_check(point_charge(), point_charge(), 3.0);
  CHECK(std::abs(p.residual) < 1e-12);
  for (double r : {6.0, 10.0}) {
    const auto res = newton_check(hydrogenic_density(1.0, 2.5), hydrogenic_density(2.0, 2.0), r);
    CHECK(std::abs(res.residual) < 1e-8);
    CHECK(res.electron_nucleus1 == doctest::Approx(1.0 / r).epsilon(1e-8));
    CHECK(res.electron_electron == doctest::Approx(1.0 / r).epsilon(1e-8));
  }
  CHECK_THROWS_AS(newton_check(hydrogenic_density(1.0, 3.0), hydrogenic_density(1.0, 3.0), 5.0), ValidityError);
}

}
