#include "dimerlab/curves.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dimerlab/error.hpp"
#include "dimerlab/kernels.hpp"

namespace dimerlab {

namespace {

bool uniform(std::span<const double> r, std::size_t lo, std::size_t hi, double h) {
  for (std::size_t k = lo; k < hi; ++k)
    if (std::abs(r[k + 1] - r[k] - h) > 1e-9 * std::max(1.0, h)) return false;
  return true;
}

struct FivePoint {
  double d1, d2;
};

FivePoint five_point(std::span<const double> y, std::size_t i, std::size_t step, double h) {
  const double m2 = y[i - 2 * step], m1 = y[i - step], p1 = y[i + step], p2 = y[i + 2 * step];
  return {(m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h),
          (-m2 + 16.0 * m1 - 30.0 * y[i] + 16.0 * p1 - p2) / (12.0 * h * h)};
}

}  // namespace

std::vector<double> ScanTable::column(const std::string& name) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (name == "r") out.push_back(row.r);
    else if (name == "E") out.push_back(row.E);
    else if (name == "W") out.push_back(row.W);
    else if (name == "W1") out.push_back(row.W1);
    else if (name == "W2") out.push_back(row.W2);
    else if (name == "A") out.push_back(row.A);
    else if (name == "gap") out.push_back(row.gap);
    else if (name == "E_direct") out.push_back(row.E_direct);
    else throw ConfigError("unknown scan column '" + name + "'");
  }
  return out;
}

std::vector<double> ScanTable::separations() const { return column("r"); }

double ScanTable::checksum() const {
  double worst = 0.0;
  for (const auto& row : rows)
    if (row.valid) worst = std::max(worst, std::abs(row.W - (row.E - e_inf)));
  return worst;
}

ScanTable scan(const DimerSpec& tmpl, const Grid& grid, const std::vector<double>& r_list,
               const FeshbachSettings& settings, const AtomEigendata& atom1, const AtomEigendata& atom2) {
  if (r_list.empty()) throw ConfigError("scan needs at least one separation");
  for (std::size_t i = 1; i < r_list.size(); ++i)
    if (!(r_list[i] > r_list[i - 1])) throw ConfigError("scan separations must be strictly increasing");

  ScanTable table;
  table.coupling = tmpl.coupling;
  table.e_inf = atom1.spectrum.values.at(0) + atom2.spectrum.values.at(0);
  table.rows.resize(r_list.size());

  const auto n = static_cast<std::ptrdiff_t>(r_list.size());
#pragma omp parallel for schedule(dynamic) num_threads(kernels::thread_count())
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    ScanRow& row = table.rows[static_cast<std::size_t>(i)];
    row.r = r_list[static_cast<std::size_t>(i)];
    try {
      DimerSpec spec = tmpl;
      spec.separation = row.r;
      const FeshbachProblem problem(spec, grid, atom1, atom2, settings);
      const FeshbachReport rep = problem.solve();
      row.E = rep.E;
      row.W = rep.E - table.e_inf;
      row.W1 = rep.W1;
      row.W2 = rep.W2;
      row.A = rep.A;
      row.gap = rep.gap;
      row.E_direct = rep.E_direct;
      row.iterations = rep.iterations;
      row.valid = true;
    } catch (const std::exception& e) {
      row.valid = false;
      row.error = e.what();
    }
  }
  return table;
}

ScanTable scan(const DimerSpec& tmpl, const Grid& grid, const std::vector<double>& r_list,
               const FeshbachSettings& settings) {
  const auto a1 = atom_eigendata(tmpl.atom1, grid, 2);
  const auto a2 = atom_eigendata(tmpl.atom2, grid, 2);
  return scan(tmpl, grid, r_list, settings, a1, a2);
}

std::vector<DerivativeRow> derivatives(std::span<const double> r, std::span<const double> y, bool richardson) {
  if (r.size() != y.size()) throw ConfigError("derivative columns differ in length");
  if (r.size() < 5) throw ConfigError("derivatives need at least five rows");
  std::vector<DerivativeRow> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    out[i].r = r[i];
    if (i < 2 || i + 2 >= r.size()) continue;
    const double h = r[i + 1] - r[i];
    if (!uniform(r, i - 2, i + 2, h)) continue;
    bool finite = true;
    for (std::size_t k = i - 2; k <= i + 2; ++k) finite = finite && std::isfinite(y[k]);
    if (!finite) continue;
    const FivePoint fine = five_point(y, i, 1, h);
    out[i].d1 = fine.d1;
    out[i].d2 = fine.d2;
    out[i].available = true;
    if (i >= 4 && i + 4 < r.size() && uniform(r, i - 4, i + 4, h)) {
      bool wide_finite = std::isfinite(y[i - 4]) && std::isfinite(y[i + 4]);
      if (wide_finite) {
        const FivePoint coarse = five_point(y, i, 2, 2.0 * h);
        out[i].d1_error = std::abs(fine.d1 - coarse.d1) / 15.0;
        out[i].d2_error = std::abs(fine.d2 - coarse.d2) / 15.0;
        if (richardson) {
          out[i].d1 = (16.0 * fine.d1 - coarse.d1) / 15.0;
          out[i].d2 = (16.0 * fine.d2 - coarse.d2) / 15.0;
        }
      }
    }
  }
  return out;
}

std::vector<DerivativeRow> derivatives(const ScanTable& table, bool richardson) {
  auto w = table.column("W");
  for (std::size_t i = 0; i < w.size(); ++i)
    if (!table.rows[i].valid) w[i] = std::numeric_limits<double>::quiet_NaN();
  return derivatives(table.separations(), w, richardson);
}

double hellmann_feynman(const DimerSystem& system, std::span<const double> ground_state, double max_residual) {
  std::vector<double> psi(ground_state.begin(), ground_state.end());
  kernels::scale(1.0 / std::sqrt(kernels::dot(psi, psi)), psi);
  auto hpsi = system.hamiltonian()(psi);
  const double e = kernels::dot(psi, hpsi);
  kernels::axpy(-e, psi, hpsi);
  const double residual = std::sqrt(kernels::dot(hpsi, hpsi));
  if (residual > max_residual) {
    std::ostringstream msg;
    msg << "Hellmann-Feynman needs an eigenstate: residual " << residual << " > " << max_residual;
    throw ValidityError(msg.str());
  }
  const auto dv = system.separation_derivative();
  std::vector<double> tmp(psi.size());
  kernels::multiply(dv, psi, tmp);
  return kernels::dot(psi, tmp);
}

FitResult fit_power_law(std::span<const double> r, std::span<const double> y, double lo, double hi) {
  if (r.size() != y.size()) throw ConfigError("fit columns differ in length");
  std::vector<double> x, v;
  int sign = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < lo - 1e-12 || r[i] > hi + 1e-12 || !std::isfinite(y[i])) continue;
    const int s = y[i] > 0.0 ? 1 : (y[i] < 0.0 ? -1 : 0);
    if (s == 0 || (sign != 0 && s != sign)) {
      std::ostringstream msg;
      msg << "power-law fit: column changes sign or vanishes at r = " << r[i];
      throw ValidityError(msg.str());
    }
    sign = s;
    x.push_back(std::log(r[i]));
    v.push_back(std::log(std::abs(y[i])));
  }
  if (x.size() < 5) {
    std::ostringstream msg;
    msg << "power-law fit window [" << lo << ", " << hi << "] holds " << x.size() << " points, need 5";
    throw ConfigError(msg.str());
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double mv = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double sxx = 0.0, sxv = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxv += (x[i] - mx) * (v[i] - mv);
  }
  FitResult fit;
  fit.exponent = sxv / sxx;
  const double intercept = mv - fit.exponent * mx;
  fit.coefficient = std::exp(intercept);
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = v[i] - (intercept + fit.exponent * x[i]);
    ss += e * e;
  }
  fit.rms_residual = std::sqrt(ss / n);
  fit.r_lo = lo;
  fit.r_hi = hi;
  fit.points = x.size();
  return fit;
}

double ion_ground_energy(const AtomSpec& spec, int charge, const Grid& grid) {
  const Hamiltonian h = ion_hamiltonian(spec, charge, grid);
  const std::size_t n = h.space->rank();
  if (n == 0) return 0.0;
  EigenOptions eo;
  eo.check_gap = false;
  if (n == 1) return ground_state(h.op, eo).values.front();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const SparseBasis basis = antisymmetric_basis(*h.space, {all});
  if (basis.columns.size() <= 4096)
    return dense_oracle(h.op, {.vectors = false}, &basis).values.front();
  eo.projector = antisymmetrizer(h.space, {all});
  return ground_state(h.op, eo).values.front();
}

DissociationTable dissociation_check(const AtomSpec& atom1, const AtomSpec& atom2, const Grid& grid) {
  DissociationTable table;
  for (int m = -atom2.electrons; m <= atom1.electrons; ++m) {
    DissociationRow row;
    row.m = m;
    try {
      row.E1m = ion_ground_energy(atom1, m, grid);
      row.E2negm = ion_ground_energy(atom2, -m, grid);
      row.sum = row.E1m + row.E2negm;
      row.valid = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    table.rows.push_back(row);
  }
  const auto zero = std::find_if(table.rows.begin(), table.rows.end(), [](const auto& r) { return r.m == 0; });
  table.margin = std::numeric_limits<double>::infinity();
  bool all_valid = zero->valid;
  for (const auto& row : table.rows) {
    if (row.m == 0) continue;
    if (!row.valid) {
      all_valid = false;
      continue;
    }
    table.margin = std::min(table.margin, row.sum - zero->sum);
  }
  table.strict_minimum_at_zero = all_valid && table.margin > 0.0;
  return table;
}

DecayFit decay_rate(const QuantumState& state, DimensionMode mode, double extent) {
  const TensorSpace& space = *state.space;
  if (space.rank() != 1) throw ConfigError("decay rate needs a one-electron state");
  const Axis& ax = space.axis(0);
  std::vector<double> value(ax.points);
  double peak = 0.0;
  for (std::size_t i = 0; i < ax.points; ++i) {
    value[i] = state.coefficients[i];
    if (mode == DimensionMode::radial_3d) value[i] /= ax[i];
    peak = std::max(peak, std::abs(value[i]));
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < ax.points; ++i) {
    const double d = std::abs(ax[i]);
    if (d < 0.5 * extent || d > 0.9 * extent) continue;
    if (std::abs(value[i]) <= 1e-13 * peak) continue;
    x.push_back(d);
    y.push_back(std::log(std::abs(value[i]) / peak));
  }
  if (x.size() < 3) throw ValidityError("state tail lies below the noise floor on the fit window");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  DecayFit fit;
  fit.rate = sxy / sxx;
  fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 0.0;
  fit.exponential = fit.rate < 0.0 && fit.r_squared >= 0.99;
  fit.points = x.size();
  return fit;
}

LJFit lj_fit(std::span<const double> r, std::span<const double> w, double lo, double hi) {
  std::vector<double> rr, ww;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r[i] >= lo - 1e-12 && r[i] <= hi + 1e-12 && std::isfinite(w[i])) {
      rr.push_back(r[i]);
      ww.push_back(w[i]);
    }
  if (rr.size() < 3) throw ConfigError("Lennard-Jones fit needs at least three points in the window");
  bool minimum = false;
  for (std::size_t i = 1; i + 1 < ww.size(); ++i)
    if (ww[i] < ww[i - 1] && ww[i] < ww[i + 1]) minimum = true;

  const auto m = static_cast<Eigen::Index>(rr.size());
  const Eigen::Index cols = minimum ? 2 : 1;
  Eigen::MatrixXd a(m, cols);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = rr[static_cast<std::size_t>(i)];
    a(i, 0) = -std::pow(x, -6.0);
    if (minimum) a(i, 1) = std::pow(x, -12.0);
    b[i] = ww[static_cast<std::size_t>(i)];
  }
  Eigen::VectorXd scale = a.colwise().norm();
  for (Eigen::Index c = 0; c < cols; ++c) a.col(c) /= scale[c];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  if (sv[sv.size() - 1] < 1e-12 * sv[0]) throw ValidityError("Lennard-Jones design matrix is ill-conditioned");
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);

  LJFit fit;
  fit.c6 = coef[0] / scale[0];
  fit.repulsive_term = minimum;
  if (minimum) fit.c12 = coef[1] / scale[1];
  fit.rms_residual = std::sqrt((a * coef - b).squaredNorm() / static_cast<double>(m));
  return fit;
}

}  // namespace dimerlab
