#include <benchmark/benchmark.h>

#include "mdlm/design.hpp"
#include "mdlm/filter.hpp"
#include "mdlm/linalg.hpp"
#include "mdlm/rng.hpp"
#include "mdlm/samplers.hpp"

using namespace mdlm;

namespace {

DesignMatrix block_design(int T) {
  DesignSpec spec;
  StimulusTrack track;
  track.label = "task";
  track.onsets = {20.0, 60.0, 100.0, 140.0};
  track.durations = {20.0, 20.0, 20.0, 20.0};
  spec.tracks = {track};
  spec.tr_seconds = 2.0;
  spec.n_scans = T;
  return assemble_design(spec);
}

Matrix noisy_data(int T, int q, std::uint64_t seed) {
  Rng rng(seed);
  Matrix y(T, q);
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < q; ++j) y(t, j) = rng.normal();
  return y;
}

MomentSeries filtered(int T, int q) {
  const DesignMatrix design = block_design(T);
  return filter_series(noisy_data(T, q, 5), design,
                       EvolutionSpec::random_walk(2, 0.95),
                       PriorSpec::standard(2, q))
      .series;
}

void BM_filter_series(benchmark::State& state) {
  const int T = 100;
  const int q = static_cast<int>(state.range(0));
  const DesignMatrix design = block_design(T);
  const Matrix y = noisy_data(T, q, 5);
  const EvolutionSpec evolution = EvolutionSpec::random_walk(2, 0.95);
  const PriorSpec prior = PriorSpec::standard(2, q);
  for (auto _ : state) {
    benchmark::DoNotOptimize(filter_series(y, design, evolution, prior));
  }
}
BENCHMARK(BM_filter_series)->Arg(1)->Arg(7)->Arg(27);

void BM_sampler_pass(benchmark::State& state) {
  const int T = 100, q = 27;
  const MomentSeries series = filtered(T, q);
  const EvolutionSpec evolution = EvolutionSpec::random_walk(2, 0.95);
  const SamplerKind kind =
      state.range(0) == 0 ? SamplerKind::fsts : SamplerKind::ffbs;
  const RngKey key{1, 0};
  for (auto _ : state) {
    double acc = 0.0;
    for_each_row_trajectory(series, evolution, kind, 100, 1, key, 0,
                            [&](int, const Matrix& rows) {
                              acc += rows(T - 1, 0);
                            });
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_sampler_pass)->Arg(0)->Arg(1);

void BM_cholesky(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(9);
  Matrix b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = rng.normal();
  const Matrix spd = b * b.transpose() + n * Matrix::Identity(n, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cholesky_lower(spd));
  }
}
BENCHMARK(BM_cholesky)->Arg(3)->Arg(27);

void BM_normal_draws(benchmark::State& state) {
  Rng rng(13);
  for (auto _ : state) {
    double acc = 0.0;
    for (int i = 0; i < 1000; ++i) acc += rng.normal();
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_normal_draws);

}  // namespace

BENCHMARK_MAIN();
