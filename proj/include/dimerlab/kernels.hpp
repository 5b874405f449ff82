#pragma once

#include <cstddef>
#include <span>

// Data-parallel inner loops. Every OpenMP kernel has a plain serial twin in
// namespace `serial`; the tests hold the two to agreement and the benchmark
// compares their throughput.
//
// Reductions are blocked into fixed-size chunks whose partial sums are added
// in chunk order, so results do not depend on the thread count.

namespace dimerlab::kernels {

inline constexpr std::size_t reduction_chunk = 4096;

/// y = (-Laplacian_h + diag(potential)) x on a tensor grid with the given
/// extents, uniform spacing on every axis and Dirichlet walls.
void apply_hamiltonian(std::span<const std::size_t> extents, double inv_h2,
                       std::span<const double> potential, std::span<const double> x,
                       std::span<double> y);

/// y = x - sign-weighted transpose for two identical axes a < b:
/// y[.. i_a .. i_b ..] = 0.5 * (x[.. i_a .. i_b ..] - x[.. i_b .. i_a ..]).
void antisymmetrize_pair(std::span<const std::size_t> extents, std::size_t a, std::size_t b,
                         std::span<const double> x, std::span<double> y);

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);
/// y[i] = d[i] * x[i]
void multiply(std::span<const double> d, std::span<const double> x, std::span<double> y);

namespace serial {
void apply_hamiltonian(std::span<const std::size_t> extents, double inv_h2,
                       std::span<const double> potential, std::span<const double> x,
                       std::span<double> y);
void antisymmetrize_pair(std::span<const std::size_t> extents, std::size_t a, std::size_t b,
                         std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);
void multiply(std::span<const double> d, std::span<const double> x, std::span<double> y);
}  // namespace serial

/// Threads used by the parallel kernels; honours DIMERLAB_THREADS.
int thread_count();
void set_thread_count(int threads);

}  // namespace dimerlab::kernels
