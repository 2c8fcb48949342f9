#include <benchmark/benchmark.h>

#include "cmcepi/cmc_graph.hpp"
#include "cmcepi/simulator.hpp"

using namespace cmcepi;

namespace {

const DegreeDistribution& dist1() {
  static const DegreeDistribution d = DegreeDistribution::degenerate({2, 1});
  return d;
}

const CmcGraph& big_graph() {
  static const CmcGraph g = build_graph(sample_degrees(dist1(), 100000, 1), 2).graph;
  return g;
}

void BM_MonteCarloSerial(benchmark::State& state) {
  const TransmissionLaw law(PointMass{0.5});
  for (auto _ : state)
    benchmark::DoNotOptimize(monte_carlo_serial(dist1(), law, 20000, 16, {}, 7).outbreak_frequency);
}

void BM_MonteCarloParallel(benchmark::State& state) {
  const TransmissionLaw law(PointMass{0.5});
  for (auto _ : state)
    benchmark::DoNotOptimize(monte_carlo(dist1(), law, 20000, 16, {}, 7).outbreak_frequency);
}

void BM_ClusteringSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(clustering_empirical_serial(big_graph()).ordered_triangles);
}

void BM_ClusteringParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(clustering_empirical(big_graph()).ordered_triangles);
}

}  // namespace

BENCHMARK(BM_MonteCarloSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClusteringSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClusteringParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
