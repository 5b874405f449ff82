#include "dimerlab/grid.hpp"

#include <cmath>
#include <sstream>

#include "dimerlab/error.hpp"

namespace dimerlab {

Grid::Grid(double extent, std::size_t points)
    : extent_(extent), points_(points), spacing_(2.0 * extent / static_cast<double>(points - 1)) {}

Axis Grid::radial_axis() const {
  // points in (0, L) at multiples of h
  const auto interior = static_cast<std::size_t>(std::llround(extent_ / spacing_)) - 1;
  return {spacing_, spacing_, interior};
}

bool Grid::commensurate(double length) const {
  const double q = length / spacing_;
  return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, std::abs(q));
}

std::size_t Grid::steps(double length) const {
  if (length < 0.0 || !commensurate(length)) {
    std::ostringstream msg;
    msg << "length " << length << " is not a non-negative multiple of the grid spacing " << spacing_;
    throw ConfigError(msg.str());
  }
  return static_cast<std::size_t>(std::llround(length / spacing_));
}

Grid build_grid(double extent, std::size_t points) {
  if (!(extent > 0.0)) throw ConfigError("grid extent must be positive");
  if (points < 8) {
    std::ostringstream msg;
    msg << "grid needs at least 8 points, got " << points;
    throw ConfigError(msg.str());
  }
  return Grid(extent, points);
}

TensorSpace::TensorSpace(std::vector<Axis> axes) : axes_(std::move(axes)) {
  const std::size_t n = axes_.size();
  extents_.resize(n);
  strides_.resize(n);
  dim_ = 1;
  for (std::size_t k = n; k-- > 0;) {
    extents_[k] = axes_[k].points;
    strides_[k] = dim_;
    dim_ *= axes_[k].points;
  }
}

void TensorSpace::unravel(std::size_t flat, std::span<std::size_t> index) const {
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    index[k] = flat / strides_[k];
    flat -= index[k] * strides_[k];
  }
}

std::size_t TensorSpace::ravel(std::span<const std::size_t> index) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < axes_.size(); ++k) flat += index[k] * strides_[k];
  return flat;
}

}  // namespace dimerlab
