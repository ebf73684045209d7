// Serial reference vs OpenMP kernels.

#include "eegcap/experiments.hpp"
#include "eegcap/mi_estimator.hpp"
#include "eegcap/random.hpp"

#include <benchmark/benchmark.h>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace eegcap;

struct Pair {
  mi::kernels::PointSet x;
  mi::kernels::PointSet y;
};

Pair make_pair(std::size_t n) {
  Rng rng(17);
  Matrix x(static_cast<Eigen::Index>(n), 8), y(static_cast<Eigen::Index>(n), 20);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index c = 0; c < 8; ++c) x(i, c) = rng.normal();
    for (Eigen::Index c = 0; c < 20; ++c) y(i, c) = (c < 8 ? x(i, c) : 0.0) + rng.normal();
  }
  return {mi::kernels::PointSet::from(x), mi::kernels::PointSet::from(y)};
}

void BM_ksg_serial(benchmark::State& state) {
  const auto p = make_pair(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mi::kernels::ksg_counts_serial(p.x, p.y, 4));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ksg_parallel(benchmark::State& state) {
  const auto p = make_pair(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mi::kernels::ksg_counts_parallel(p.x, p.y, 4));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

// A reduced grid: 2 electrode counts x 2 SNRs x 2 seeds.
void BM_sweep(benchmark::State& state) {
  experiments::ExperimentConfig cfg;
  cfg.n_samples = 1000;
  cfg.electrode_counts = {16, 64};
  cfg.snr_db_list = {0.0, 20.0};
  cfg.seeds = {1, 2};
  cfg.decoder.mlp.epochs = 20;
  const auto workers = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(experiments::run_sweep(cfg, workers));
}

}  // namespace

BENCHMARK(BM_ksg_serial)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ksg_parallel)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->Iterations(1);

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
#ifdef _OPENMP
  benchmark::AddCustomContext("omp_max_threads", std::to_string(omp_get_max_threads()));
#endif
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
