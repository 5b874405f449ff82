#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <set>
#include <string>

#include "dimerlab/cli.hpp"
#include "dimerlab/curves.hpp"
#include "dimerlab/error.hpp"
#include "dimerlab/feshbach.hpp"
#include "dimerlab/perturb.hpp"

using namespace dimerlab;

namespace {

// recorded on the first verified run (full mode, L = 16, n = 65, r = 16..36)
constexpr double kGoldenSecondOrder = 10.914470078074054;  // sup |W - W1 + sigma/r^6| r^7
constexpr double kGoldenNonlinear = 1796382.6346878568;    // sup |A| r^8

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

RunConfig base_config(CouplingMode mode, double L, std::size_t n) {
  RunConfig c;
  c.coupling_mode = mode;
  c.L = L;
  c.n = n;
  c.r_lo = 16.0;
  c.r_hi = 36.0;
  c.step = 1.0;
  c.direct = "none";
  return c;
}

struct Run {
  RunConfig config;
  AtomEigendata atom1, atom2;
  ScanTable table;
  double sigma = 0.0;
};

Run make_run(RunConfig config) {
  const Grid g = config.grid();
  auto a1 = atom_eigendata(config.atom1(), g, 2);
  auto a2 = atom_eigendata(config.atom2(), g, 2);
  const double sigma = c6_resolvent(a1, a2).sigma;
  auto table = scan(config.dimer(config.r_lo), g, config.separations(), config.feshbach_settings(), a1, a2);
  return {std::move(config), std::move(a1), std::move(a2), std::move(table), sigma};
}

// full mode at h = 1, dense oracle on the antisymmetric sector (per-coordinate n <= 64)
const Run& oracle_run() {
  static const Run run = [] {
    RunConfig c = base_config(CouplingMode::full, 13.0, 27);
    c.direct = "dense";
    return make_run(c);
  }();
  return run;
}

const Run& dipole_run() {
  static const Run run = make_run(base_config(CouplingMode::dipole_truncated, 16.0, 65));
  return run;
}

// dipole mode with per-coordinate n <= 64: the relative frame keeps r continuous
const Run& hf_run() {
  static const Run run = make_run(base_config(CouplingMode::dipole_truncated, 15.0, 61));
  return run;
}

const Run& full_run() {
  static const Run run = make_run(base_config(CouplingMode::full, 16.0, 65));
  return run;
}

std::string invalid_rows(const ScanTable& t) {
  std::string s;
  for (const auto& r : t.rows)
    if (!r.valid) s += " r=" + fmt(r.r) + ": " + r.error;
  return s;
}

Outcome oracle_equivalence() {
  const Run& run = oracle_run();
  if (auto bad = invalid_rows(run.table); !bad.empty()) return {false, "invalid rows:" + bad};
  double worst = 0.0;
  for (const auto& r : run.table.rows) worst = std::max(worst, std::abs(r.E - r.E_direct) / std::abs(r.E_direct));
  const Grid g = run.config.grid();
  const std::size_t per_coordinate = g.axis().points + g.steps(run.config.r_hi);
  return {worst <= 1e-9 && per_coordinate <= 64,
          "max |E - E_dense|/|E_dense| = " + fmt(worst) + " over " + std::to_string(run.table.rows.size()) +
              " rows, per-coordinate n = " + std::to_string(per_coordinate)};
}

Outcome vdw_law() {
  const Run& run = dipole_run();
  if (auto bad = invalid_rows(run.table); !bad.empty()) return {false, "invalid rows:" + bad};
  const auto r = run.table.separations();
  const auto w = run.table.column("W");
  const auto d = derivatives(run.table);
  std::vector<double> d1, d2;
  for (const auto& row : d) {
    d1.push_back(row.d1);
    d2.push_back(row.d2);
  }
  const auto fw = fit_power_law(r, w, 18.0, 34.0);
  const auto f1 = fit_power_law(r, d1, 18.0, 34.0);
  const auto f2 = fit_power_law(r, d2, 18.0, 34.0);
  const double c0 = fw.coefficient / run.sigma, c1 = f1.coefficient / (6.0 * run.sigma),
               c2 = f2.coefficient / (42.0 * run.sigma);
  const bool pass = std::abs(fw.exponent + 6.0) <= 0.05 && std::abs(f1.exponent + 7.0) <= 0.1 &&
                    std::abs(f2.exponent + 8.0) <= 0.1 && std::abs(c0 - 1.0) <= 0.02 && std::abs(c1 - 1.0) <= 0.03 &&
                    std::abs(c2 - 1.0) <= 0.05;
  return {pass, "exponents " + fmt(fw.exponent) + ", " + fmt(f1.exponent) + ", " + fmt(f2.exponent) +
                    "; coefficients / (sigma, 6 sigma, 42 sigma) = " + fmt(c0) + ", " + fmt(c1) + ", " + fmt(c2)};
}

Outcome second_order_law() {
  const Run& run = full_run();
  if (auto bad = invalid_rows(run.table); !bad.empty()) return {false, "invalid rows:" + bad};
  double sup = 0.0;
  for (const auto& r : run.table.rows)
    sup = std::max(sup, std::abs(r.W - r.W1 + run.sigma / std::pow(r.r, 6)) * std::pow(r.r, 7));
  const auto& last = run.table.rows.back();
  const double m1 = second_moment(*run.atom1.space, run.atom1.spectrum.vectors[0]);
  const double m2 = second_moment(*run.atom2.space, run.atom2.spectrum.vectors[0]);
  const double target = 6.0 * m1 * m2;
  const double w1r5 = last.W1 * std::pow(last.r, 5);
  const double dev = std::abs(w1r5 - target) / target;
  return {std::isfinite(sup) && sup <= 2.0 * kGoldenSecondOrder && dev <= 0.05,
          "sup |W - W1 + sigma/r^6| r^7 = " + fmt(sup) + " (golden " + fmt(kGoldenSecondOrder) + "); W1 r^5 at r = " +
              fmt(last.r) + " is " + fmt(w1r5) + " vs 6<z^2><z^2> = " + fmt(target) + " (" + fmt(100 * dev) + "%)"};
}

Outcome newton_theorem() {
  double worst = 0.0;
  const struct {
    double z1, rad1, z2, rad2, r;
  } cases[] = {{1, 4, 1, 4, 10}, {1, 5, 2, 3, 9}, {2, 2.5, 2, 2.5, 6}};
  for (const auto& c : cases)
    worst = std::max(worst,
                     std::abs(newton_check(hydrogenic_density(c.z1, c.rad1), hydrogenic_density(c.z2, c.rad2), c.r).residual));
  return {worst <= 1e-8, "max residual " + fmt(worst) + " over 3 disjoint-support pairs"};
}

Outcome stability() {
  const Run& run = full_run();
  if (auto bad = invalid_rows(run.table); !bad.empty()) return {false, "invalid rows:" + bad};
  double min_gap = std::numeric_limits<double>::infinity(), sup = 0.0;
  for (const auto& r : run.table.rows) {
    min_gap = std::min(min_gap, r.gap);
    sup = std::max(sup, std::abs(r.A) * std::pow(r.r, 8));
  }
  return {min_gap > 0.0 && sup <= 2.0 * kGoldenNonlinear,
          "min gap " + fmt(min_gap) + "; sup |A| r^8 = " + fmt(sup) + " (golden " + fmt(kGoldenNonlinear) + ")"};
}

Outcome monotonicity() {
  const Run& run = dipole_run();
  if (auto bad = invalid_rows(run.table); !bad.empty()) return {false, "invalid rows:" + bad};
  const auto d = derivatives(run.table);
  bool signs = true;
  std::size_t checked = 0;
  for (const auto& row : d)
    if (row.available) {
      ++checked;
      signs = signs && row.d1 > 0.0 && row.d2 < 0.0;
    }
  const RunConfig& c = run.config;
  const double s = c.r_lo;
  const auto w = monotonicity_witness(c.dimer(s), c.grid(), run.atom1, run.atom2, s, c.separations(),
                                      c.feshbach_settings());
  const double tol = 10.0 * c.fixed_point_tol * std::abs(w.E_s);
  bool increasing = true, above = true;
  double min_inc = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.rows.size(); ++i) {
    if (i) {
      min_inc = std::min(min_inc, w.rows[i].D - w.rows[i - 1].D);
      increasing = increasing && w.rows[i].D > w.rows[i - 1].D;
    }
    above = above && w.rows[i].D >= w.rows[i].E - tol;
  }
  const double anchor = std::abs(w.rows.front().D - w.E_s);
  return {signs && checked > 0 && increasing && above && anchor <= tol,
          "W' > 0, W'' < 0 on " + std::to_string(checked) + " rows: " + (signs ? "yes" : "no") +
              "; D increasing: " + (increasing ? "yes" : "no") + " (min step " + fmt(min_inc) +
              "); |D(s) - E(s)| = " + fmt(anchor) + "; D >= E: " + (above ? "yes" : "no")};
}

Outcome neutral_split() {
  const RunConfig c = base_config(CouplingMode::full, 16.0, 65);
  const auto t = dissociation_check(c.atom1(), c.atom2(), c.grid());
  return {t.strict_minimum_at_zero, "margin min_m (E1m + E2negm) - E(0) = " + fmt(t.margin)};
}

Outcome sigma_methods() {
  const RunConfig c = base_config(CouplingMode::decoupled, 16.0, 65);
  const auto a1 = atom_eigendata(c.atom1(), c.grid(), 65);
  const auto a2 = atom_eigendata(c.atom2(), c.grid(), 65);
  const auto res = c6_resolvent(a1, a2);
  const std::size_t nmax = converged_nmax(a1, a2);
  const auto sos = c6_sum_over_states(a1, a2, nmax);
  const double dev = std::abs(res.sigma - sos.sigma) / res.sigma;
  return {res.sigma > 0.0 && dev <= 5e-3,
          "sigma " + fmt(res.sigma) + " vs " + fmt(sos.sigma) + " at nmax " + std::to_string(nmax) + " (rel " +
              fmt(dev) + ")"};
}

Outcome derivative_consistency() {
  const Run& run = hf_run();
  if (auto bad = invalid_rows(run.table); !bad.empty()) return {false, "invalid rows:" + bad};
  const auto d = derivatives(run.table, false);
  FeshbachSettings st = run.config.feshbach_settings();
  st.direct = FeshbachSettings::Direct::lanczos;
  st.direct_tol = 1e-10;
  double worst = 0.0, worst_ratio = 0.0;
  std::size_t checked = 0;
  for (const auto& row : d) {
    if (!row.available) continue;
    const DimerSystem sys(run.config.dimer(row.r), run.config.grid());
    const auto gs = direct_ground_state(sys, st);
    const double hf = hellmann_feynman(sys, gs.vectors.at(0));
    const double dev = std::abs(hf - row.d1);
    const double allowed = std::max(1e-8, 1e-6 * std::abs(hf));
    worst = std::max(worst, dev);
    worst_ratio = std::max(worst_ratio, dev / allowed);
    ++checked;
  }
  return {checked > 0 && worst_ratio <= 1.0,
          "max |W'_HF - W'_FD| = " + fmt(worst) + " over " + std::to_string(checked) + " rows (" + fmt(worst_ratio) +
              " of the allowance)"};
}

Outcome unit_anchors() {
  const AtomSpec h{.mode = DimensionMode::radial_3d};
  std::vector<double> err;
  std::string energies;
  for (std::size_t n : {201, 401, 801}) {
    const auto a = atom_eigendata(h, build_grid(40.0, n), 2);
    err.push_back(std::abs(a.spectrum.values[0] + 0.25));
    energies += fmt(a.spectrum.values[0]) + " ";
  }
  const double q1 = err[0] / err[1], q2 = err[1] / err[2];
  const Grid fine = build_grid(40.0, 801);
  const auto a = atom_eigendata(h, fine, 2);
  const auto fit = decay_rate({a.space, a.spectrum.vectors[0]}, DimensionMode::radial_3d, 40.0);
  return {std::abs(q1 - 4.0) <= 0.3 && std::abs(q2 - 4.0) <= 0.3 && std::abs(fit.rate + 0.5) <= 0.02,
          "E(h = 0.4, 0.2, 0.1) = " + energies + "; error ratios " + fmt(q1) + ", " + fmt(q2) + "; decay rate " +
              fmt(fit.rate)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::function<Outcome()> criteria[] = {oracle_equivalence, vdw_law,      second_order_law, newton_theorem,
                                               stability,          monotonicity, neutral_split,    sigma_methods,
                                               derivative_consistency, unit_anchors};
  const char* names[] = {"oracle equivalence",  "van der Waals law", "second-order law", "Newton's theorem",
                         "stability and A",     "monotonicity",      "neutral split",    "sigma cross-method",
                         "derivative consistency", "unit anchors"};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (int k = 0; k < 10; ++k) {
    if (!only.empty() && !only.count(k + 1)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", k + 1, names[k], o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
