#include "dimerlab/kernels.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <string>
#include <vector>

namespace dimerlab::kernels {

namespace {

std::atomic<int> configured_threads{0};

int initial_threads() {
  if (const char* env = std::getenv("DIMERLAB_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return std::min(n, omp_get_max_threads());
    } catch (const std::exception&) {
    }
  }
  return omp_get_max_threads();
}

std::vector<std::size_t> strides_of(std::span<const std::size_t> extents) {
  std::vector<std::size_t> strides(extents.size());
  std::size_t s = 1;
  for (std::size_t k = extents.size(); k-- > 0;) {
    strides[k] = s;
    s *= extents[k];
  }
  return strides;
}

std::size_t volume(std::span<const std::size_t> extents) {
  std::size_t v = 1;
  for (auto e : extents) v *= e;
  return v;
}

}  // namespace

int thread_count() {
  int n = configured_threads.load();
  if (n == 0) {
    n = initial_threads();
    configured_threads.store(n);
  }
  return n;
}

void set_thread_count(int threads) { configured_threads.store(threads > 0 ? threads : 1); }

void apply_hamiltonian(std::span<const std::size_t> extents, double inv_h2,
                       std::span<const double> potential, std::span<const double> x,
                       std::span<double> y) {
  const auto dim = static_cast<std::ptrdiff_t>(volume(extents));
  const double kinetic_diag = 2.0 * static_cast<double>(extents.size()) * inv_h2;
  const int threads = thread_count();

#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < dim; ++i) y[i] = (kinetic_diag + potential[i]) * x[i];

  const auto strides = strides_of(extents);
  for (std::size_t k = 0; k < extents.size(); ++k) {
    const std::size_t n = extents[k];
    const std::size_t inner = strides[k];
    const auto lines = static_cast<std::ptrdiff_t>(volume(extents) / inner);  // outer * n
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::ptrdiff_t line = 0; line < lines; ++line) {
      const std::size_t j = static_cast<std::size_t>(line) % n;
      const std::size_t base = static_cast<std::size_t>(line) * inner;
      if (j > 0) {
        for (std::size_t t = 0; t < inner; ++t) y[base + t] -= inv_h2 * x[base + t - inner];
      }
      if (j + 1 < n) {
        for (std::size_t t = 0; t < inner; ++t) y[base + t] -= inv_h2 * x[base + t + inner];
      }
    }
  }
}

void antisymmetrize_pair(std::span<const std::size_t> extents, std::size_t a, std::size_t b,
                         std::span<const double> x, std::span<double> y) {
  const auto strides = strides_of(extents);
  const std::size_t sa = strides[a], sb = strides[b], na = extents[a], nb = extents[b];
  const auto dim = static_cast<std::ptrdiff_t>(volume(extents));
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::ptrdiff_t ii = 0; ii < dim; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const std::size_t ia = (i / sa) % na;
    const std::size_t ib = (i / sb) % nb;
    const std::size_t j = i - ia * sa - ib * sb + ib * sa + ia * sb;
    y[i] = 0.5 * (x[i] - x[j]);
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const std::size_t chunks = (n + reduction_chunk - 1) / reduction_chunk;
  if (chunks <= 1) return serial::dot(a, b);
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * reduction_chunk;
    const std::size_t hi = std::min(n, lo + reduction_chunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    partial[c] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> x) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::ptrdiff_t i = 0; i < n; ++i) x[i] *= alpha;
}

void multiply(std::span<const double> d, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] = d[i] * x[i];
}

namespace serial {

void apply_hamiltonian(std::span<const std::size_t> extents, double inv_h2,
                       std::span<const double> potential, std::span<const double> x,
                       std::span<double> y) {
  const std::size_t rank = extents.size();
  const auto strides = strides_of(extents);
  const std::size_t dim = volume(extents);
  std::vector<std::size_t> index(rank, 0);
  for (std::size_t i = 0; i < dim; ++i) {
    std::size_t rest = i;
    for (std::size_t k = 0; k < rank; ++k) {
      index[k] = rest / strides[k];
      rest -= index[k] * strides[k];
    }
    double acc = (2.0 * static_cast<double>(rank) * inv_h2 + potential[i]) * x[i];
    for (std::size_t k = 0; k < rank; ++k) {
      if (index[k] > 0) acc -= inv_h2 * x[i - strides[k]];
      if (index[k] + 1 < extents[k]) acc -= inv_h2 * x[i + strides[k]];
    }
    y[i] = acc;
  }
}

void antisymmetrize_pair(std::span<const std::size_t> extents, std::size_t a, std::size_t b,
                         std::span<const double> x, std::span<double> y) {
  const std::size_t rank = extents.size();
  const auto strides = strides_of(extents);
  const std::size_t dim = volume(extents);
  std::vector<std::size_t> index(rank);
  for (std::size_t i = 0; i < dim; ++i) {
    std::size_t rest = i;
    for (std::size_t k = 0; k < rank; ++k) {
      index[k] = rest / strides[k];
      rest -= index[k] * strides[k];
    }
    std::swap(index[a], index[b]);
    std::size_t j = 0;
    for (std::size_t k = 0; k < rank; ++k) j += index[k] * strides[k];
    y[i] = 0.5 * (x[i] - x[j]);
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  // same chunked summation order as the parallel version
  double total = 0.0;
  for (std::size_t lo = 0; lo < a.size(); lo += reduction_chunk) {
    const std::size_t hi = std::min(a.size(), lo + reduction_chunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    total += s;
  }
  return total;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> x) {
  for (double& v : x) v *= alpha;
}

void multiply(std::span<const double> d, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = d[i] * x[i];
}

}  // namespace serial

}  // namespace dimerlab::kernels
