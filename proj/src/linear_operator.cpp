#include "dimerlab/linear_operator.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "dimerlab/error.hpp"
#include "dimerlab/kernels.hpp"

namespace dimerlab {

namespace {

void require_same_dim(const LinearOperator& a, const LinearOperator& b) {
  if (a.dim() != b.dim()) {
    std::ostringstream msg;
    msg << "operator dimension mismatch: " << a.dim() << " vs " << b.dim() << " (" << a.description()
        << ", " << b.description() << ")";
    throw ConfigError(msg.str());
  }
}

}  // namespace

LinearOperator::LinearOperator(std::size_t dim, Action action, bool self_adjoint,
                               std::string description)
    : dim_(dim),
      action_(std::make_shared<const Action>(std::move(action))),
      self_adjoint_(self_adjoint),
      description_(std::move(description)) {}

void LinearOperator::apply(std::span<const double> in, std::span<double> out) const {
  if (in.size() != dim_ || out.size() != dim_) {
    std::ostringstream msg;
    msg << "vector of size " << in.size() << " applied to " << description_ << " of dimension " << dim_;
    throw ConfigError(msg.str());
  }
  (*action_)(in, out);
}

std::vector<double> LinearOperator::operator()(std::span<const double> in) const {
  std::vector<double> out(dim_);
  apply(in, out);
  return out;
}

LinearOperator identity_operator(std::size_t dim) {
  return {dim, [](std::span<const double> x, std::span<double> y) { std::copy(x.begin(), x.end(), y.begin()); },
          true, "identity"};
}

LinearOperator zero_operator(std::size_t dim) {
  return {dim, [](std::span<const double>, std::span<double> y) { std::fill(y.begin(), y.end(), 0.0); }, true,
          "zero"};
}

LinearOperator diagonal_operator(std::vector<double> diagonal, std::string description) {
  auto d = std::make_shared<const std::vector<double>>(std::move(diagonal));
  const std::size_t n = d->size();
  return {n, [d](std::span<const double> x, std::span<double> y) { kernels::multiply(*d, x, y); }, true,
          std::move(description)};
}

LinearOperator operator+(const LinearOperator& a, const LinearOperator& b) {
  require_same_dim(a, b);
  return {a.dim(),
          [a, b](std::span<const double> x, std::span<double> y) {
            std::vector<double> tmp(x.size());
            a.apply(x, y);
            b.apply(x, tmp);
            kernels::axpy(1.0, tmp, y);
          },
          a.self_adjoint() && b.self_adjoint(), "(" + a.description() + " + " + b.description() + ")"};
}

LinearOperator operator-(const LinearOperator& a, const LinearOperator& b) { return a + (-1.0) * b; }

LinearOperator operator*(double alpha, const LinearOperator& a) {
  std::ostringstream desc;
  desc << alpha << "*" << a.description();
  return {a.dim(),
          [alpha, a](std::span<const double> x, std::span<double> y) {
            a.apply(x, y);
            kernels::scale(alpha, y);
          },
          a.self_adjoint(), desc.str()};
}

LinearOperator compose(const LinearOperator& a, const LinearOperator& b) {
  require_same_dim(a, b);
  return {a.dim(),
          [a, b](std::span<const double> x, std::span<double> y) {
            std::vector<double> tmp(x.size());
            a.apply(x, tmp);
            b.apply(tmp, y);
          },
          false, b.description() + "*" + a.description()};
}

LinearOperator conjugate(const LinearOperator& projector, const LinearOperator& a) {
  require_same_dim(projector, a);
  return {a.dim(),
          [projector, a](std::span<const double> x, std::span<double> y) {
            std::vector<double> tmp(x.size());
            projector.apply(x, y);
            a.apply(y, tmp);
            projector.apply(tmp, y);
          },
          a.self_adjoint() && projector.self_adjoint(),
          projector.description() + " " + a.description() + " " + projector.description()};
}

LinearOperator shifted(const LinearOperator& a, double shift) {
  std::ostringstream desc;
  desc << "(" << a.description() << " - " << shift << ")";
  return {a.dim(),
          [a, shift](std::span<const double> x, std::span<double> y) {
            a.apply(x, y);
            kernels::axpy(-shift, x, y);
          },
          a.self_adjoint(), desc.str()};
}

LinearOperator rank_one_projector(std::vector<double> v) {
  const double nn = kernels::dot(v, v);
  if (!(nn > 0.0)) throw ConfigError("rank-one projector onto the zero vector");
  kernels::scale(1.0 / std::sqrt(nn), v);
  auto u = std::make_shared<const std::vector<double>>(std::move(v));
  return {u->size(),
          [u](std::span<const double> x, std::span<double> y) {
            const double c = kernels::dot(*u, x);
            std::fill(y.begin(), y.end(), 0.0);
            kernels::axpy(c, *u, y);
          },
          true, "|v><v|"};
}

LinearOperator deflated_projector(const LinearOperator& sector, std::vector<double> v) {
  const double nn = kernels::dot(v, v);
  if (!(nn > 0.0)) throw ConfigError("deflation against the zero vector");
  kernels::scale(1.0 / std::sqrt(nn), v);
  auto u = std::make_shared<const std::vector<double>>(std::move(v));
  return {sector.dim(),
          [sector, u](std::span<const double> x, std::span<double> y) {
            sector.apply(x, y);
            const double c = kernels::dot(*u, y);
            kernels::axpy(-c, *u, y);
          },
          true, "(" + sector.description() + " - |v><v|)"};
}

LinearOperator place_on_axis(const LinearOperator& one_axis, std::span<const std::size_t> extents,
                             std::size_t axis) {
  if (axis >= extents.size() || extents[axis] != one_axis.dim())
    throw ConfigError("tensor placement: axis extent does not match operator dimension");
  std::vector<std::size_t> ext(extents.begin(), extents.end());
  std::size_t inner = 1, dim = 1;
  for (std::size_t k = 0; k < ext.size(); ++k) {
    dim *= ext[k];
    if (k > axis) inner *= ext[k];
  }
  const std::size_t n = ext[axis];
  const std::size_t outer = dim / (n * inner);
  return {dim,
          [one_axis, n, inner, outer](std::span<const double> x, std::span<double> y) {
            std::vector<double> line(n), out(n);
            for (std::size_t o = 0; o < outer; ++o) {
              for (std::size_t t = 0; t < inner; ++t) {
                const std::size_t base = o * n * inner + t;
                for (std::size_t j = 0; j < n; ++j) line[j] = x[base + j * inner];
                one_axis.apply(line, out);
                for (std::size_t j = 0; j < n; ++j) y[base + j * inner] = out[j];
              }
            }
          },
          one_axis.self_adjoint(), one_axis.description() + "@axis" + std::to_string(axis)};
}

double symmetry_defect(const LinearOperator& a, std::size_t trials, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<double> u(a.dim()), v(a.dim());
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    for (auto& x : u) x = gauss(rng);
    for (auto& x : v) x = gauss(rng);
    const auto au = a(u);
    const auto av = a(v);
    const double d = std::abs(kernels::dot(u, av) - kernels::dot(au, v));
    worst = std::max(worst, d / std::sqrt(kernels::dot(u, u) * kernels::dot(v, v)));
  }
  return worst;
}

}  // namespace dimerlab
