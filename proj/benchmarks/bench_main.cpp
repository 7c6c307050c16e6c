#include <benchmark/benchmark.h>

#include "dsheaf/train.hpp"
#include "dsheaf/verify.hpp"

using namespace dsheaf;

namespace {

DirectedCellularSheaf bench_sheaf(std::size_t n, std::size_t d) {
  Rng rng(1);
  const DirectedGraph g = random_graph(rng, n, 8.0 / static_cast<double>(n), GraphShape::Mixed);
  return random_sheaf(g, {d, 0.25, MapClass::General}, rng);
}

void BM_LaplacianAssembly(benchmark::State& state) {
  const auto s = bench_sheaf(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(laplacian_blocks(s));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.graph().num_edges()));
}
BENCHMARK(BM_LaplacianAssembly)->Arg(100)->Arg(1000)->Arg(5000);

void BM_NormalizedLaplacian(benchmark::State& state) {
  const auto s = bench_sheaf(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(normalized_laplacian(s));
}
BENCHMARK(BM_NormalizedLaplacian)->Arg(100)->Arg(1000);

void BM_HermEigvals(benchmark::State& state) {
  const auto s = bench_sheaf(static_cast<std::size_t>(state.range(0)), 2);
  const ComplexMatrix dense = laplacian_blocks(s).densify();
  for (auto _ : state) benchmark::DoNotOptimize(herm_eigvals(dense));
  state.SetLabel(std::to_string(dense.rows()) + "x" + std::to_string(dense.rows()));
}
BENCHMARK(BM_HermEigvals)->Arg(10)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

struct EpochFixture {
  Dataset data;
  ModelConfig config;
  ModelParams params;

  EpochFixture() {
    ExperimentConfig ec;
    ec.dsbm = DsbmParams::uniform(300, 5, 0.1, 0.08, 0.2, 0);
    ec.split = {0.8, 0.05, 0.15};
    data = experiment_dataset(ec, 0);
    config.map_class = MapClass::Diagonal;
    config.num_classes = 5;
    params = init_params(config, 0);
  }
};

void BM_ForwardDsbm300(benchmark::State& state) {
  const EpochFixture f;
  for (auto _ : state) benchmark::DoNotOptimize(forward(f.params, f.config, f.data.graph, f.data.features));
}
BENCHMARK(BM_ForwardDsbm300)->Unit(benchmark::kMillisecond);

void BM_TrainEpochDsbm300(benchmark::State& state) {
  const EpochFixture f;
  TrainOptions opts;
  opts.max_epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(f.config, f.data, opts, f.params));
}
BENCHMARK(BM_TrainEpochDsbm300)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
