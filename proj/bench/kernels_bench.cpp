// Serial vs OpenMP kernels at paper scale (M = 128, K = 8, N = 192, M_c = 16).

#include <benchmark/benchmark.h>

#include "chaineq/detect.hpp"
#include "chaineq/kernels.hpp"

using namespace chaineq;

namespace {

CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = complex_normal(rng);
  return m;
}

template <auto Kernel>
void BM_sample_covariance(benchmark::State& state) {
  const CMatrix samples = random_matrix(state.range(0), 192, 1);
  CMatrix out;
  for (auto _ : state) {
    Kernel(samples, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Kernel>
void BM_residual_correlation(benchmark::State& state) {
  const CMatrix running = random_matrix(8, 192, 2);
  const CMatrix own = random_matrix(8, 192, 3);
  const CMatrix noise = random_matrix(state.range(0), 192, 4);
  CMatrix out;
  for (auto _ : state) {
    Kernel(running, own, noise, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Kernel>
void BM_equalize(benchmark::State& state) {
  const CMatrix w = random_matrix(8, 128, 5);
  const CMatrix y = random_matrix(128, state.range(0), 6);
  CMatrix out;
  for (auto _ : state) {
    Kernel(w, y, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Kernel>
void BM_count_errors(benchmark::State& state) {
  const Constellation qam(16);
  const CMatrix soft = random_matrix(8, state.range(0), 7);
  std::vector<int> sent(static_cast<std::size_t>(soft.size()));
  for (std::size_t i = 0; i < sent.size(); ++i) sent[i] = static_cast<int>(i % 16);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(soft, sent, qam));
}

}  // namespace

BENCHMARK(BM_sample_covariance<kernels::serial::sample_covariance>)->Name("sample_covariance/serial")->Arg(16)->Arg(128);
BENCHMARK(BM_sample_covariance<kernels::omp::sample_covariance>)->Name("sample_covariance/omp")->Arg(16)->Arg(128);
BENCHMARK(BM_residual_correlation<kernels::serial::residual_correlation>)->Name("residual_correlation/serial")->Arg(16);
BENCHMARK(BM_residual_correlation<kernels::omp::residual_correlation>)->Name("residual_correlation/omp")->Arg(16);
BENCHMARK(BM_equalize<kernels::serial::equalize>)->Name("equalize/serial")->Arg(1000);
BENCHMARK(BM_equalize<kernels::omp::equalize>)->Name("equalize/omp")->Arg(1000);
BENCHMARK(BM_count_errors<kernels::serial::count_errors>)->Name("count_errors/serial")->Arg(1000);
BENCHMARK(BM_count_errors<kernels::omp::count_errors>)->Name("count_errors/omp")->Arg(1000);

BENCHMARK_MAIN();
