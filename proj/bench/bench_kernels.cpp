#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "dimerlab/kernels.hpp"

namespace k = dimerlab::kernels;

namespace {

std::vector<double> noise(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

template <bool Parallel>
void hamiltonian(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const std::size_t extents[2] = {side, side};
  const auto pot = noise(side * side, 1), x = noise(side * side, 2);
  std::vector<double> y(side * side);
  for (auto _ : state) {
    if constexpr (Parallel)
      k::apply_hamiltonian(extents, 4.0, pot, x, y);
    else
      k::serial::apply_hamiltonian(extents, 4.0, pot, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * side * side));
}

template <bool Parallel>
void antisymmetrize(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const std::size_t extents[2] = {side, side};
  const auto x = noise(side * side, 3);
  std::vector<double> y(side * side);
  for (auto _ : state) {
    if constexpr (Parallel)
      k::antisymmetrize_pair(extents, 0, 1, x, y);
    else
      k::serial::antisymmetrize_pair(extents, 0, 1, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * side * side));
}

template <bool Parallel>
void dot(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = noise(n, 4), b = noise(n, 5);
  for (auto _ : state) benchmark::DoNotOptimize(Parallel ? k::dot(a, b) : k::serial::dot(a, b));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * n));
}

template <bool Parallel>
void axpy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = noise(n, 6);
  auto y = noise(n, 7);
  for (auto _ : state) {
    if constexpr (Parallel)
      k::axpy(1e-9, x, y);
    else
      k::serial::axpy(1e-9, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * n));
}

}  // namespace

BENCHMARK(hamiltonian<false>)->Name("hamiltonian/serial")->Arg(101)->Arg(401);
BENCHMARK(hamiltonian<true>)->Name("hamiltonian/openmp")->Arg(101)->Arg(401);
BENCHMARK(antisymmetrize<false>)->Name("antisymmetrize/serial")->Arg(101)->Arg(401);
BENCHMARK(antisymmetrize<true>)->Name("antisymmetrize/openmp")->Arg(101)->Arg(401);
BENCHMARK(dot<false>)->Name("dot/serial")->Arg(1 << 14)->Arg(1 << 20);
BENCHMARK(dot<true>)->Name("dot/openmp")->Arg(1 << 14)->Arg(1 << 20);
BENCHMARK(axpy<false>)->Name("axpy/serial")->Arg(1 << 14)->Arg(1 << 20);
BENCHMARK(axpy<true>)->Name("axpy/openmp")->Arg(1 << 14)->Arg(1 << 20);

BENCHMARK_MAIN();
