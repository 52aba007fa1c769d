#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include "gausschain/chaining.hpp"
#include "gausschain/covariance.hpp"
#include "gausschain/empirical.hpp"
#include "gausschain/hermite.hpp"
#include "gausschain/rng.hpp"
#include "gausschain/sampling.hpp"

namespace {

using namespace gausschain;

std::vector<double> random_path(std::size_t n, std::uint64_t seed) {
  RandomStream stream(seed);
  std::vector<double> path(n);
  for (double& x : path) x = stream.next_normal();
  return path;
}

void BM_HermiteValues(benchmark::State& state) {
  const unsigned degree = static_cast<unsigned>(state.range(0));
  double t = 0.37;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hermite_values(degree, t));
    t += 1e-9;  // defeat value caching across iterations
  }
}
BENCHMARK(BM_HermiteValues)->Arg(20)->Arg(100);

void BM_GaussHermiteRule(benchmark::State& state) {
  const std::size_t order = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gauss_hermite_rule(order));
  }
}
BENCHMARK(BM_GaussHermiteRule)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_BuildCovariance(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const CovarianceSpec spec = ar1_spec(n, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_covariance(spec));
  }
}
BENCHMARK(BM_BuildCovariance)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_SamplePathIid(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const CovarianceMatrix cov = build_covariance(iid_spec(n));
  RandomStream stream(17);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_path(cov, stream));
  }
}
BENCHMARK(BM_SamplePathIid)->Arg(1024)->Arg(8192)->Unit(benchmark::kMicrosecond);

void BM_SamplePathDense(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const CovarianceMatrix cov = build_covariance(ar1_spec(n, 0.5));
  RandomStream stream(17);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_path(cov, stream));
  }
}
BENCHMARK(BM_SamplePathDense)->Arg(256)->Arg(1024)->Arg(4096)->Unit(benchmark::kMicrosecond);

void BM_SupDeviation(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::vector<double> path = random_path(n, 29);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sup_deviation(path, 1.0));
  }
}
BENCHMARK(BM_SupDeviation)->Arg(64)->Arg(1024)->Arg(8192)->Unit(benchmark::kMicrosecond);

void BM_ChainingConstants(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const QuantileNet net = make_quantile_net(depth, 1.0);
    benchmark::DoNotOptimize(chaining_constants(net, default_weights(depth)));
  }
}
BENCHMARK(BM_ChainingConstants)->Arg(6)->Arg(12)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_OptimizeWeights(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  const QuantileNet net = make_quantile_net(depth, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimize_weights(net));
  }
}
BENCHMARK(BM_OptimizeWeights)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_RefinedBound(benchmark::State& state) {
  double delta = 0.25;
  for (auto _ : state) {
    benchmark::DoNotOptimize(refined_size_bound(1024.0, 1024.0, delta));
    delta = delta < 0.4 ? delta + 1e-6 : 0.25;
  }
}
BENCHMARK(BM_RefinedBound);

}  // namespace

BENCHMARK_MAIN();
