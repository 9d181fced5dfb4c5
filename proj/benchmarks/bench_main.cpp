#include <random>

#include <benchmark/benchmark.h>

#include "unml/gaussian_nml.hpp"
#include "unml/mc_oracle.hpp"
#include "unml/mixture_select.hpp"

namespace {

using namespace unml;

DomainSpec spec_for(int m) {
  const double cap = default_eps2_cap(m);
  return DomainSpec::uniform(m, 1.0, 1e-6, cap, cap);
}

Dataset blobs(Eigen::Index n, Eigen::Index m) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  Eigen::MatrixXd rows(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) rows(i, j) = z(rng) + (i % 3) * 4.0;
  const Dataset raw(std::move(rows));
  return scale_dataset(raw, choose_scale(raw, spec_for(static_cast<int>(m)), 1.05).alpha);
}

void BM_LogCu(benchmark::State& state) {
  const auto spec = spec_for(3);
  std::int64_t n = 4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gaussian::log_Cu(3, n, spec));
    n = n < 1'000'000 ? n + 997 : 4;
  }
}
BENCHMARK(BM_LogCu);

void BM_LogMixtureNorm(benchmark::State& state) {
  const auto spec = spec_for(2);
  const auto n = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(mixture::log_mixture_norm(4, n, 2, spec));
  state.SetComplexityN(n);
}
BENCHMARK(BM_LogMixtureNorm)->RangeMultiplier(4)->Range(64, 4096)->Complexity(benchmark::oNSquared);

void BM_Cluster(benchmark::State& state) {
  const auto data = blobs(state.range(0), 3);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(mixture::cluster(data, 3, ++seed));
}
BENCHMARK(BM_Cluster)->Arg(300)->Arg(3000)->Unit(benchmark::kMillisecond);

void BM_SelectK(benchmark::State& state) {
  const auto data = blobs(600, 2);
  const auto spec = spec_for(2);
  mixture::SelectOptions options;
  options.restarts = 4;
  for (auto _ : state) benchmark::DoNotOptimize(mixture::select_K(data, {1, 5}, spec, 7, options));
}
BENCHMARK(BM_SelectK)->Unit(benchmark::kMillisecond);

void BM_McDataspace(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const std::int64_t n = state.range(1);
  const auto spec = DomainSpec::uniform(m, 1.0, 0.01, 0.25, default_eps2_cap(m));
  const std::int64_t samples = 200'000;
  for (auto _ : state) benchmark::DoNotOptimize(oracle::mc_log_C_dataspace(m, n, spec, samples, 3));
  state.SetItemsProcessed(state.iterations() * samples);
}
BENCHMARK(BM_McDataspace)->Args({1, 3})->Args({2, 6})->Args({3, 4})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
