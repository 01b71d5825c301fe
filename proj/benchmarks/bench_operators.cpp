// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "isacwave/operators.hpp"
#include "isacwave/radar_metrics.hpp"
#include "isacwave/rng.hpp"

using namespace isacwave;

namespace {

const GridConfig kGrid{8, 40, 32, 2};

CVec random_vec(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.cnormal();
  return v;
}

void bm_to_time_domain(benchmark::State& state) {
  const SamplingMode mode =
      state.range(0) ? SamplingMode::kOversampled : SamplingMode::kNyquist;
  const CVec x = random_vec(kGrid.freq_len(), 1);
  for (auto _ : state) {
    CVec s = to_time_domain(x, kGrid, mode);
    benchmark::DoNotOptimize(s.data());
  }
}

void bm_to_freq_domain(benchmark::State& state) {
  const CVec s = random_vec(kGrid.time_len(SamplingMode::kNyquist), 2);
  for (auto _ : state) {
    CVec x = to_freq_domain(s, kGrid);
    benchmark::DoNotOptimize(x.data());
  }
}

void bm_direction_apply(benchmark::State& state) {
  const DirectionOperator g(0.35, kGrid, SamplingMode::kNyquist);
  const CVec s = random_vec(kGrid.time_len(SamplingMode::kNyquist), 3);
  for (auto _ : state) {
    CVec v = g.apply(s);
    benchmark::DoNotOptimize(v.data());
  }
}

void bm_beam_pattern(benchmark::State& state) {
  std::vector<double> angles;
  for (int d = -90; d <= 90; ++d) angles.push_back(d * 0.017453292519943295);
  const CVec s = random_vec(kGrid.time_len(SamplingMode::kNyquist), 4);
  for (auto _ : state) {
    RVec b = beam_pattern_time(s, angles, kGrid);
    benchmark::DoNotOptimize(b.data());
  }
}

BENCHMARK(bm_to_time_domain)->Arg(0)->Arg(1);
BENCHMARK(bm_to_freq_domain);
BENCHMARK(bm_direction_apply);
BENCHMARK(bm_beam_pattern);

}  // namespace
