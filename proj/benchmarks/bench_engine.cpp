#include <benchmark/benchmark.h>

#include "forkjoin/engine.hpp"
#include "forkjoin/policies.hpp"
#include "forkjoin/presets.hpp"

namespace fj = forkjoin;

namespace {

void BM_EngineEvents(benchmark::State& state) {
  const fj::Topology topo = fj::build_instance(static_cast<int>(state.range(0)));
  const fj::PolicySpec policy = fj::parse_policy("proposed");
  std::uint64_t events = 0;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    fj::RunOptions opt;
    opt.jobs_per_type = 20000;
    opt.seed = seed++;
    const fj::RunResult r = fj::run(topo, policy, opt);
    events += r.stats.events;
    benchmark::DoNotOptimize(r.stats.end_time);
  }
  state.counters["events/s"] =
      benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_EngineEvents)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_PreemptiveEngine(benchmark::State& state) {
  const fj::Topology topo = fj::build_instance(1);
  const fj::PolicySpec policy = fj::parse_policy("sdp!");
  std::uint64_t events = 0;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    fj::RunOptions opt;
    opt.jobs_per_type = 20000;
    opt.seed = seed++;
    const fj::RunResult r = fj::run(topo, policy, opt);
    events += r.stats.events;
  }
  state.counters["events/s"] =
      benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_PreemptiveEngine)->Unit(benchmark::kMillisecond);

}  // namespace
