#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "dimerlab/grid.hpp"
#include "dimerlab/linear_operator.hpp"

namespace dimerlab {

struct EigenResult {
  std::vector<double> values;                // ascending
  std::vector<std::vector<double>> vectors;  // unit norm, mutually orthogonal
  std::vector<double> residuals;             // |A v - lambda v|
  std::size_t iterations = 0;                // operator applications
};

struct EigenOptions {
  double tol = 1e-9;
  std::size_t krylov_dim = 300;
  std::size_t max_restarts = 60;
  unsigned seed = 20240611;
  /// Refuse a ground state whose gap to the next level in the same subspace
  /// is below gap_min.
  bool check_gap = true;
  double gap_min = 1e-6;
  /// Tolerance for the second eigenvalue used by the gap guard.
  double gap_tol = 1e-8;
  std::optional<LinearOperator> projector;
  /// Vectors the search space is kept orthogonal to.
  std::vector<std::vector<double>> deflate;
};

/// Lowest eigenpair of `op` on range(projector), Lanczos with full
/// reorthogonalization and explicit restarts.
EigenResult ground_state(const LinearOperator& op, const EigenOptions& options = {});
/// Lowest k eigenpairs by successive locking.
EigenResult lowest_k(const LinearOperator& op, std::size_t k, const EigenOptions& options = {});

struct ResolventRequest {
  LinearOperator op;
  double shift = 0.0;
  std::vector<double> rhs;
  double tol = 1e-10;
  std::optional<LinearOperator> projector;
  /// Lowest eigenvalue of P op P on range(P) if already known; computed
  /// otherwise.
  std::optional<double> lowest;
  double gap_min = 1e-8;
  std::size_t max_iterations = 20000;
};

struct ResolventResult {
  std::vector<double> solution;
  double residual = 0.0;  // relative
  std::size_t iterations = 0;
  double certificate = 0.0;  // lowest - shift
};

/// v = (P (op - shift) P)^-1 P rhs by projected conjugate gradients.
ResolventResult apply_resolvent(const ResolventRequest& req);

/// Columns of a sparse isometry B (B^T B = 1).
struct SparseBasis {
  std::size_t dim = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> columns;
};

/// Orthonormal basis of the range of the antisymmetrizer over the given axis
/// groups: one column per sorted index tuple.
SparseBasis antisymmetric_basis(const TensorSpace& space, const std::vector<std::vector<std::size_t>>& groups);

struct DenseOptions {
  std::size_t cap = 4096;
  bool vectors = true;
};

/// Full eigendecomposition of op, or of B^T op B when a basis is given
/// (vectors are then mapped back to the full space).
EigenResult dense_oracle(const LinearOperator& op, const DenseOptions& options = {},
                         const SparseBasis* basis = nullptr);

}  // namespace dimerlab
