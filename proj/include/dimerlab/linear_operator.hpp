#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dimerlab {

/// Matrix-free real operator. Copies share the underlying action; operators
/// are immutable after construction and `apply` is reentrant.
class LinearOperator {
 public:
  using Action = std::function<void(std::span<const double>, std::span<double>)>;

  LinearOperator(std::size_t dim, Action action, bool self_adjoint, std::string description);

  std::size_t dim() const { return dim_; }
  bool self_adjoint() const { return self_adjoint_; }
  const std::string& description() const { return description_; }

  /// out = A in; `out` must not alias `in`.
  void apply(std::span<const double> in, std::span<double> out) const;
  std::vector<double> operator()(std::span<const double> in) const;

 private:
  std::size_t dim_;
  std::shared_ptr<const Action> action_;
  bool self_adjoint_;
  std::string description_;
};

LinearOperator identity_operator(std::size_t dim);
LinearOperator zero_operator(std::size_t dim);
LinearOperator diagonal_operator(std::vector<double> diagonal, std::string description);

LinearOperator operator+(const LinearOperator& a, const LinearOperator& b);
LinearOperator operator-(const LinearOperator& a, const LinearOperator& b);
LinearOperator operator*(double alpha, const LinearOperator& a);
/// a followed by b: x -> b(a(x)).
LinearOperator compose(const LinearOperator& a, const LinearOperator& b);
/// P A P.
LinearOperator conjugate(const LinearOperator& projector, const LinearOperator& a);
/// a - shift * 1.
LinearOperator shifted(const LinearOperator& a, double shift);

/// Orthogonal projection onto span{v}; v need not be normalized.
LinearOperator rank_one_projector(std::vector<double> v);
/// Q - |v><v| / <v,v> for a vector v already in range(Q).
LinearOperator deflated_projector(const LinearOperator& sector, std::vector<double> v);

/// Places a one-axis operator on axis `axis` of a tensor with the given
/// extents: 1 x .. x A x .. x 1.
LinearOperator place_on_axis(const LinearOperator& one_axis, std::span<const std::size_t> extents,
                             std::size_t axis);

/// max |<u,Av> - <Au,v>| / (|u||v|) over `trials` random pairs.
double symmetry_defect(const LinearOperator& a, std::size_t trials, unsigned seed);

}  // namespace dimerlab
