#include "dimerlab/solve.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "dimerlab/error.hpp"
#include "dimerlab/kernels.hpp"

namespace dimerlab {

namespace {

struct Ritz {
  double value = 0.0;
  std::vector<double> vector;
  double residual = 0.0;
};

class Subspace {
 public:
  Subspace(const std::optional<LinearOperator>& projector, const std::vector<std::vector<double>>& locked)
      : projector_(projector), locked_(locked) {}

  void project(std::vector<double>& v) const {
    if (projector_) {
      std::vector<double> tmp(v.size());
      projector_->apply(v, tmp);
      v.swap(tmp);
    }
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : locked_) kernels::axpy(-kernels::dot(u, v), u, v);
  }

 private:
  const std::optional<LinearOperator>& projector_;
  const std::vector<std::vector<double>>& locked_;
};

double norm(std::span<const double> v) { return std::sqrt(kernels::dot(v, v)); }

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::vector<double> v(n);
  for (auto& x : v) x = gauss(rng);
  return v;
}

// Lowest eigenpair of op on the subspace; nullopt when the subspace is empty.
std::optional<Ritz> lanczos_lowest(const LinearOperator& op, const Subspace& sub, double tol,
                                   const EigenOptions& opt, std::mt19937_64& rng, std::size_t& matvecs) {
  const std::size_t n = op.dim();
  std::vector<double> start = random_vector(n, rng);
  sub.project(start);
  double start_norm = norm(start);
  if (start_norm < 1e-10 * std::sqrt(static_cast<double>(n))) return std::nullopt;

  Ritz best;
  best.residual = std::numeric_limits<double>::infinity();
  for (std::size_t restart = 0; restart <= opt.max_restarts; ++restart) {
    kernels::scale(1.0 / norm(start), start);
    std::vector<std::vector<double>> basis{start};
    std::vector<double> alpha, beta;
    double scale_estimate = 0.0;
    Eigen::VectorXd ritz_coeffs;
    double theta = 0.0;
    const std::size_t m = std::min(opt.krylov_dim, n);
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<double> w = op(basis[j]);
      ++matvecs;
      sub.project(w);
      const double a = kernels::dot(basis[j], w);
      kernels::axpy(-a, basis[j], w);
      if (j > 0) kernels::axpy(-beta[j - 1], basis[j - 1], w);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : basis) kernels::axpy(-kernels::dot(q, w), q, w);
      const double b = norm(w);
      alpha.push_back(a);
      scale_estimate = std::max(scale_estimate, std::abs(a) + b);

      const bool breakdown = b <= 1e-12 * std::max(1.0, scale_estimate);
      const bool last = j + 1 == m;
      if (breakdown || last || j % 5 == 4 || j < 3) {
        const std::size_t k = alpha.size();
        Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(k));
        Eigen::VectorXd e(static_cast<Eigen::Index>(k > 0 ? k - 1 : 0));
        for (std::size_t i = 0; i + 1 < k; ++i) e[static_cast<Eigen::Index>(i)] = beta[i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
        tri.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
        ritz_coeffs = tri.eigenvectors().col(0);
        theta = tri.eigenvalues()[0];
        const double estimate = b * std::abs(ritz_coeffs[static_cast<Eigen::Index>(k - 1)]);
        if (breakdown || last || estimate <= 0.25 * tol) break;
      }
      kernels::scale(1.0 / b, w);
      beta.push_back(b);
      basis.push_back(std::move(w));
    }

    std::vector<double> y(n, 0.0);
    for (Eigen::Index i = 0; i < ritz_coeffs.size(); ++i)
      kernels::axpy(ritz_coeffs[i], basis[static_cast<std::size_t>(i)], y);
    sub.project(y);
    kernels::scale(1.0 / norm(y), y);
    std::vector<double> ay = op(y);
    ++matvecs;
    sub.project(ay);
    theta = kernels::dot(y, ay);
    kernels::axpy(-theta, y, ay);
    const double res = norm(ay);
    if (res < best.residual) best = {theta, y, res};
    if (res <= tol) return best;
    start = std::move(y);
  }
  std::ostringstream msg;
  msg << "Lanczos did not converge on " << op.description() << ": residual " << best.residual << " > tol "
      << tol << " after " << opt.max_restarts << " restarts";
  throw SolverError(msg.str());
}

}  // namespace

EigenResult lowest_k(const LinearOperator& op, std::size_t k, const EigenOptions& options) {
  if (k == 0) return {};
  std::mt19937_64 rng(options.seed);
  std::vector<std::vector<double>> locked = options.deflate;
  const std::size_t fixed = locked.size();
  Subspace sub(options.projector, locked);
  EigenResult out;
  for (std::size_t i = 0; i < k; ++i) {
    auto pair = lanczos_lowest(op, sub, options.tol, options, rng, out.iterations);
    if (!pair) {
      std::ostringstream msg;
      msg << "requested " << k << " eigenpairs but the subspace has dimension " << i;
      throw ConfigError(msg.str());
    }
    out.values.push_back(pair->value);
    out.residuals.push_back(pair->residual);
    out.vectors.push_back(pair->vector);
    locked.push_back(std::move(pair->vector));
  }
  (void)fixed;
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return out.values[a] < out.values[b]; });
  EigenResult sorted;
  sorted.iterations = out.iterations;
  for (auto i : order) {
    sorted.values.push_back(out.values[i]);
    sorted.residuals.push_back(out.residuals[i]);
    sorted.vectors.push_back(std::move(out.vectors[i]));
  }
  return sorted;
}

EigenResult ground_state(const LinearOperator& op, const EigenOptions& options) {
  EigenResult result = lowest_k(op, 1, options);
  if (!options.check_gap) return result;

  std::mt19937_64 rng(options.seed + 1);
  std::vector<std::vector<double>> locked = options.deflate;
  locked.push_back(result.vectors.front());
  Subspace sub(options.projector, locked);
  auto second = lanczos_lowest(op, sub, options.gap_tol, options, rng, result.iterations);
  if (second && second->value - result.values.front() < options.gap_min) {
    std::ostringstream msg;
    msg << "ground state of " << op.description() << " is (near) degenerate: gap "
        << second->value - result.values.front() << " < " << options.gap_min;
    throw ValidityError(msg.str());
  }
  return result;
}

ResolventResult apply_resolvent(const ResolventRequest& req) {
  const std::size_t n = req.op.dim();
  if (req.rhs.size() != n) throw ConfigError("resolvent right-hand side has the wrong dimension");

  auto project = [&](std::vector<double>& v) {
    if (!req.projector) return;
    std::vector<double> tmp(n);
    req.projector->apply(v, tmp);
    v.swap(tmp);
  };
  auto apply = [&](const std::vector<double>& x) {
    std::vector<double> px = x;
    project(px);
    std::vector<double> y = req.op(px);
    project(y);
    kernels::axpy(-req.shift, px, y);
    return y;
  };

  ResolventResult out;
  std::vector<double> b = req.rhs;
  project(b);
  const double bnorm = norm(b);
  out.solution.assign(n, 0.0);
  if (bnorm == 0.0) return out;

  double lowest = 0.0;
  if (req.lowest) {
    lowest = *req.lowest;
  } else {
    EigenOptions eo;
    eo.tol = 1e-8;
    eo.check_gap = false;
    eo.projector = req.projector;
    const LinearOperator restricted = req.projector ? conjugate(*req.projector, req.op) : req.op;
    lowest = ground_state(restricted, eo).values.front();
  }
  out.certificate = lowest - req.shift;
  if (out.certificate < req.gap_min) {
    std::ostringstream msg;
    msg << "shifted operator " << req.op.description() << " - " << req.shift
        << " is not certified positive: lowest eigenvalue minus shift = " << out.certificate << " < gap_min "
        << req.gap_min;
    throw ValidityError(msg.str());
  }

  std::vector<double>& x = out.solution;
  std::vector<double> r = b, p = b;
  double rr = kernels::dot(r, r);
  std::vector<double> history;
  for (std::size_t it = 1; it <= req.max_iterations; ++it) {
    std::vector<double> ap = apply(p);
    const double pap = kernels::dot(p, ap);
    if (!(pap > 0.0)) {
      std::ostringstream msg;
      msg << "conjugate gradients met a non-positive curvature " << pap << " on " << req.op.description();
      throw ValidityError(msg.str());
    }
    const double step = rr / pap;
    kernels::axpy(step, p, x);
    kernels::axpy(-step, ap, r);
    project(r);
    double rr_new = kernels::dot(r, r);
    out.iterations = it;
    if (it % 100 == 0) history.push_back(std::sqrt(rr_new) / bnorm);
    if (std::sqrt(rr_new) <= req.tol * bnorm) {
      project(x);
      r = b;
      kernels::axpy(-1.0, apply(x), r);
      rr_new = kernels::dot(r, r);
      if (std::sqrt(rr_new) <= req.tol * bnorm) {
        out.residual = std::sqrt(rr_new) / bnorm;
        return out;
      }
      p = r;
      rr = rr_new;
      continue;
    }
    kernels::scale(rr_new / rr, p);
    kernels::axpy(1.0, r, p);
    project(p);
    rr = rr_new;
  }
  std::ostringstream msg;
  msg << "conjugate gradients did not reach " << req.tol << " on " << req.op.description() << "; residuals";
  for (double h : history) msg << ' ' << h;
  msg << " (final " << std::sqrt(rr) / bnorm << ")";
  throw SolverError(msg.str());
}

SparseBasis antisymmetric_basis(const TensorSpace& space, const std::vector<std::vector<std::size_t>>& groups) {
  struct Signed {
    std::vector<std::size_t> order;
    int sign;
  };
  std::vector<std::vector<Signed>> perms;
  double count = 1.0;
  for (const auto& g : groups) {
    std::vector<std::size_t> order(g.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<Signed> list;
    do {
      int inv = 0;
      for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = i + 1; j < order.size(); ++j)
          if (order[i] > order[j]) ++inv;
      list.push_back({order, inv % 2 == 0 ? 1 : -1});
    } while (std::next_permutation(order.begin(), order.end()));
    count *= static_cast<double>(list.size());
    perms.push_back(std::move(list));
  }
  const double weight = 1.0 / std::sqrt(count);

  SparseBasis basis;
  basis.dim = space.dim();
  std::vector<std::size_t> index(space.rank()), moved(space.rank());
  for (std::size_t i = 0; i < space.dim(); ++i) {
    space.unravel(i, index);
    bool representative = true;
    for (const auto& g : groups)
      for (std::size_t t = 1; t < g.size(); ++t)
        if (index[g[t - 1]] >= index[g[t]]) representative = false;
    if (!representative) continue;

    std::vector<std::pair<std::size_t, double>> column;
    std::vector<std::size_t> choice(groups.size(), 0);
    while (true) {
      moved = index;
      int sign = 1;
      for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& g = groups[gi];
        const auto& sp = perms[gi][choice[gi]];
        for (std::size_t t = 0; t < g.size(); ++t) moved[g[t]] = index[g[sp.order[t]]];
        sign *= sp.sign;
      }
      column.emplace_back(space.ravel(moved), sign * weight);
      std::size_t gi = 0;
      while (gi < groups.size() && ++choice[gi] == perms[gi].size()) choice[gi++] = 0;
      if (gi == groups.size()) break;
    }
    basis.columns.push_back(std::move(column));
  }
  return basis;
}

EigenResult dense_oracle(const LinearOperator& op, const DenseOptions& options, const SparseBasis* basis) {
  const std::size_t n = op.dim();
  const std::size_t m = basis ? basis->columns.size() : n;
  if (basis && basis->dim != n) throw ConfigError("dense oracle: basis dimension does not match the operator");
  if (m > options.cap) {
    std::ostringstream msg;
    msg << "dense oracle refused: dimension " << m << " exceeds the dense cap " << options.cap;
    throw ConfigError(msg.str());
  }

  Eigen::MatrixXd a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  std::vector<double> x(n, 0.0), y(n);
  for (std::size_t j = 0; j < m; ++j) {
    if (basis) {
      for (const auto& [idx, c] : basis->columns[j]) x[idx] = c;
    } else {
      x[j] = 1.0;
    }
    op.apply(x, y);
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      if (basis) {
        for (const auto& [idx, c] : basis->columns[i]) s += c * y[idx];
      } else {
        s = y[i];
      }
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s;
    }
    if (basis) {
      for (const auto& [idx, c] : basis->columns[j]) x[idx] = 0.0;
    } else {
      x[j] = 0.0;
    }
  }
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      sym, options.vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw SolverError("dense eigensolver failed");

  EigenResult out;
  out.iterations = m;
  out.values.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + m);
  if (!options.vectors) return out;
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<double> v(n, 0.0);
    const auto col = solver.eigenvectors().col(static_cast<Eigen::Index>(k));
    if (basis) {
      for (std::size_t j = 0; j < m; ++j)
        for (const auto& [idx, c] : basis->columns[j]) v[idx] += c * col[static_cast<Eigen::Index>(j)];
    } else {
      for (std::size_t j = 0; j < m; ++j) v[j] = col[static_cast<Eigen::Index>(j)];
    }
    std::vector<double> av = op(v);
    kernels::axpy(-out.values[k], v, av);
    out.residuals.push_back(norm(av));
    out.vectors.push_back(std::move(v));
  }
  return out;
}

}  // namespace dimerlab
