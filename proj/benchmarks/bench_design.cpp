// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "isacwave/admm.hpp"
#include "isacwave/channel.hpp"
#include "isacwave/comm_metrics.hpp"
#include "isacwave/harness.hpp"
#include "isacwave/ideal_waveform.hpp"

using namespace isacwave;

namespace {

ExperimentConfig bench_cfg() {
  ExperimentConfig cfg;  // production frame defaults
  cfg.validate();
  return cfg;
}

void bm_ideal_objective(benchmark::State& state) {
  const ExperimentConfig cfg = bench_cfg();
  const ReferenceDesign ref = [&] {
    ExperimentConfig quick = cfg;
    quick.lbfgs.max_iters = 1;
    return make_reference(quick, SamplingMode::kNyquist);
  }();
  const CVec s = random_waveform(ref.spec, 5);
  for (auto _ : state) {
    const double f = ideal_objective(s, ref.spec);
    benchmark::DoNotOptimize(f);
  }
}

void bm_ideal_gradient(benchmark::State& state) {
  const ExperimentConfig cfg = bench_cfg();
  const ReferenceDesign ref = [&] {
    ExperimentConfig quick = cfg;
    quick.lbfgs.max_iters = 1;
    return make_reference(quick, SamplingMode::kNyquist);
  }();
  const CVec s = random_waveform(ref.spec, 6);
  for (auto _ : state) {
    CVec g = ideal_gradient(s, ref.spec);
    benchmark::DoNotOptimize(g.data());
  }
}

void bm_admm_solve(benchmark::State& state) {
  const ExperimentConfig cfg = bench_cfg();
  ExperimentConfig quick = cfg;
  quick.lbfgs.max_iters = 40;
  const ReferenceDesign ref = make_reference(quick, SamplingMode::kNyquist);
  const TrialData trial = make_trial(cfg, 0);
  const IsacProblem p =
      make_isac_problem(trial.ch, trial.s_d, ref.s0, cfg.rho, cfg.papr_db,
                        cfg.resolved_energy_total(), cfg.grid(),
                        SamplingMode::kNyquist);
  AdmmOptions opts;
  opts.max_iters = static_cast<int>(state.range(0));
  opts.tol = 0.0;
  for (auto _ : state) {
    AdmmResult res = run_admm(p, opts);
    benchmark::DoNotOptimize(res.s.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(bm_ideal_objective);
BENCHMARK(bm_ideal_gradient);
BENCHMARK(bm_admm_solve)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
