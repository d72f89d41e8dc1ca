#include <benchmark/benchmark.h>

#include "forkjoin/analytics.hpp"
#include "forkjoin/stochastic.hpp"

namespace fj = forkjoin;

namespace {

void BM_Reflect(benchmark::State& state) {
  fj::RandomStream rng(1);
  fj::Path x;
  double t = 0;
  for (int i = 0; i < state.range(0); ++i) {
    x.set(t, -3 + 6 * rng.uniform());
    t += rng.uniform();
  }
  for (auto _ : state) {
    const fj::Reflected r = fj::reflect(x);
    benchmark::DoNotOptimize(r.phi.last_value());
  }
}
BENCHMARK(BM_Reflect)->Arg(1000)->Arg(100000);

void BM_GridOracle(benchmark::State& state) {
  const fj::DcpInstance inst{0.4, 0.1, 0.8, 1.1, 0.9, 2.0, 1.0};
  for (auto _ : state) {
    const fj::GridSolution g = fj::dcp_grid_oracle(inst, 1e-3);
    benchmark::DoNotOptimize(g.objective);
  }
}
BENCHMARK(BM_GridOracle);

void BM_ThreeTypeGridOracle(benchmark::State& state) {
  fj::ThreeTypeDcpInstance inst;
  inst.q4 = 0.3;
  inst.q9 = 0.1;
  inst.w5 = 0.5;
  inst.w6 = 0.4;
  inst.h_a = 1.0;
  inst.h_b = 1.5;
  inst.h_c = 1.0;
  for (auto _ : state) {
    const fj::ThreeTypeGridSolution g = fj::threetype_grid_oracle(inst, 1e-3);
    benchmark::DoNotOptimize(g.objective);
  }
}
BENCHMARK(BM_ThreeTypeGridOracle);

void BM_RbmStep(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const fj::Path p = fj::rbm_simulate(-1.0, 1.0, 100.0, 1e-3, seed++);
    benchmark::DoNotOptimize(p.last_value());
  }
}
BENCHMARK(BM_RbmStep)->Unit(benchmark::kMillisecond);

}  // namespace
