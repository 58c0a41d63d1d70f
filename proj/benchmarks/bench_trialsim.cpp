#include <benchmark/benchmark.h>

#include "afqm/dicke.hpp"
#include "afqm/policy.hpp"
#include "afqm/rng.hpp"
#include "afqm/trialsim.hpp"

namespace {

afqm::InverseScalingPolicy bench_policy() {
  afqm::InverseScalingPolicy p;
  p.wp = 0.8;
  p.coeffs = {1.1, -0.3, 0.2, 0.05};
  return p;
}

void BM_SplitMeasure(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto input = afqm::build_sine(n);
  afqm::Rng rng(7);
  for (auto _ : state) {
    auto res = afqm::split_measure(input, 0.37, rng.uniform());
    benchmark::DoNotOptimize(res.prob_up);
  }
}
BENCHMARK(BM_SplitMeasure)->Arg(16)->Arg(64)->Arg(256);

void BM_RunTrial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto input = afqm::build_sine(n);
  const auto policy = bench_policy();
  afqm::Rng rng(7);
  for (auto _ : state) {
    auto rec = afqm::run_trial(input, policy, {}, rng);
    benchmark::DoNotOptimize(rec.estimate);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RunTrial)->Arg(8)->Arg(16)->Arg(32)->Arg(64)->Arg(128);

void BM_EstimateCost(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto policy = bench_policy();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto est = afqm::estimate_cost(afqm::StateKind::Sine, n, policy, {},
                                   afqm::default_trial_count(n), seed++);
    benchmark::DoNotOptimize(est.holevo_variance);
  }
  state.SetItemsProcessed(state.iterations() * afqm::default_trial_count(n));
}
BENCHMARK(BM_EstimateCost)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_RotateX(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto input = afqm::build_css(n);
  for (auto _ : state) {
    auto out = afqm::rotate(input, afqm::Axis::X, 0.31);
    benchmark::DoNotOptimize(out.amps().data());
  }
}
BENCHMARK(BM_RotateX)->Arg(32)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
