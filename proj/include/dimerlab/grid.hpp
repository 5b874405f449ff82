#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dimerlab {

/// One uniformly spaced coordinate axis with Dirichlet walls one step past
/// either end.
struct Axis {
  double origin = 0.0;
  double spacing = 1.0;
  std::size_t points = 0;

  double operator[](std::size_t i) const { return origin + spacing * static_cast<double>(i); }
  double back() const { return (*this)[points - 1]; }
  bool operator==(const Axis&) const = default;
};

/// Second-order central difference stencil for -d^2/dz^2.
struct Stencil {
  double diagonal;
  double off_diagonal;
};

/// Symmetric one-particle grid on [-L, L] with n points.
class Grid {
 public:
  Grid(double extent, std::size_t points);

  double extent() const { return extent_; }
  std::size_t points() const { return points_; }
  double spacing() const { return spacing_; }
  Stencil stencil() const { return {2.0 / (spacing_ * spacing_), -1.0 / (spacing_ * spacing_)}; }

  Axis axis() const { return {-extent_, spacing_, points_}; }
  /// Points strictly inside (0, L); u(0) = u(L) = 0 for the radial problem.
  Axis radial_axis() const;
  /// The symmetric axis extended to the right by `extra` steps.
  Axis extended_axis(std::size_t extra) const { return {-extent_, spacing_, points_ + extra}; }

  /// Number of grid steps in `length`; throws ConfigError unless it is an
  /// integer multiple of the spacing.
  std::size_t steps(double length) const;
  bool commensurate(double length) const;

 private:
  double extent_;
  std::size_t points_;
  double spacing_;
};

/// Validated constructor: extent > 0, points >= 8.
Grid build_grid(double extent, std::size_t points);

/// Tensor product of per-electron axes, row-major (last electron fastest).
class TensorSpace {
 public:
  TensorSpace() = default;
  explicit TensorSpace(std::vector<Axis> axes);

  std::size_t rank() const { return axes_.size(); }
  std::size_t dim() const { return dim_; }
  const Axis& axis(std::size_t k) const { return axes_[k]; }
  const std::vector<Axis>& axes() const { return axes_; }
  std::size_t stride(std::size_t k) const { return strides_[k]; }
  std::span<const std::size_t> extents() const { return extents_; }

  void unravel(std::size_t flat, std::span<std::size_t> index) const;
  std::size_t ravel(std::span<const std::size_t> index) const;

 private:
  std::vector<Axis> axes_;
  std::vector<std::size_t> extents_;
  std::vector<std::size_t> strides_;
  std::size_t dim_ = 1;
};

}  // namespace dimerlab
