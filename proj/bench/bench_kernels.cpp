// OpenMP kernels against their serial twins on pipeline-sized inputs.

#include <benchmark/benchmark.h>

#include <random>

#include "fatseg/kernels.hpp"

using namespace fatseg;

namespace {

BinarySlice random_mask(int n) {
  std::mt19937 rng(1);
  std::bernoulli_distribution b(0.4);
  BinarySlice m(n, n, 0);
  for (auto& v : m.data()) v = b(rng);
  return m;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

// Symmetric, zero-diagonal, sums to one.
Matrix random_affinities(std::size_t n) {
  Matrix p = random_matrix(n, n, 3);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      p(i, j) = i == j ? 0.0 : std::abs(p(i, j)) + std::abs(p(j, i));
      total += p(i, j);
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p(i, j) /= total;
  return p;
}

template <BinarySlice (*F)(const BinarySlice&, int)>
void close_disk(benchmark::State& state) {
  const BinarySlice m = random_mask(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(F(m, 10));
}

template <BinarySlice (*F)(const BinarySlice&, int)>
void median(benchmark::State& state) {
  const BinarySlice m = random_mask(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(F(m, 3));
}

template <Matrix (*F)(const Matrix&)>
void correlation(benchmark::State& state) {
  const Matrix x = random_matrix(static_cast<std::size_t>(state.range(0)), 279, 2);
  for (auto _ : state) benchmark::DoNotOptimize(F(x));
}

template <double (*F)(const Matrix&, const Matrix&, double, Matrix&)>
void tsne_gradient(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix p = random_affinities(n);
  const Matrix y = random_matrix(n, 2, 4);
  Matrix grad(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(F(p, y, 1.0, grad));
}

}  // namespace

BENCHMARK(close_disk<kernels::close_disk>)->Name("close_disk/omp")->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(close_disk<reference::close_disk>)->Name("close_disk/serial")->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(median<kernels::median_binary>)->Name("median3/omp")->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(median<reference::median_binary>)->Name("median3/serial")->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(correlation<kernels::correlation_distance>)->Name("correlation/omp")->Arg(360)->Unit(benchmark::kMillisecond);
BENCHMARK(correlation<reference::correlation_distance>)->Name("correlation/serial")->Arg(360)->Unit(benchmark::kMillisecond);
BENCHMARK(tsne_gradient<kernels::tsne_gradient>)->Name("tsne_gradient/omp")->Arg(360)->Unit(benchmark::kMicrosecond);
BENCHMARK(tsne_gradient<reference::tsne_gradient>)->Name("tsne_gradient/serial")->Arg(360)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
