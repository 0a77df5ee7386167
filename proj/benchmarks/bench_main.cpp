#include "emsim/calibration.hpp"
#include "emsim/engine.hpp"
#include "emsim/goodness_of_fit.hpp"
#include "emsim/rng.hpp"
#include "emsim/synth.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

void BM_ReplicationMonth(benchmark::State& state) {
  auto inst = emsim::make_rieti_like(42);
  inst.settings.horizon_minutes = 30 * 1440.0;
  inst.settings.warmup_minutes = 0;
  std::size_t rep = 0;
  std::uint64_t events = 0;
  for (auto _ : state) {
    const auto r = emsim::run_replication(inst, rep++);
    events += r.event_count;
    benchmark::DoNotOptimize(r.records.data());
  }
  state.counters["events/s"] = benchmark::Counter(double(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ReplicationMonth)->Unit(benchmark::kMillisecond);

void BM_EstimateAlpha(benchmark::State& state) {
  emsim::RngStream g(7, 0, "bench");
  std::vector<emsim::CalibrationObservation> obs;
  for (long i = 0; i < state.range(0); ++i) {
    const double t = 1.0 + 59.0 * g.uniform();
    obs.push_back({emsim::TravelLeg::BaseToScene, "s", emsim::UrgencyClass::Urgent, t, t * (0.5 + g.uniform())});
  }
  for (auto _ : state) benchmark::DoNotOptimize(emsim::estimate_alpha(obs));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EstimateAlpha)->RangeMultiplier(8)->Range(8, 32768)->Complexity(benchmark::oNLogN);

void BM_KsStatistic(benchmark::State& state) {
  emsim::RngStream g(8, 0, "bench");
  std::vector<double> sample;
  for (long i = 0; i < state.range(0); ++i) sample.push_back(g.uniform() * 10.0);
  const auto d = emsim::Distribution::triangular(0.0, 5.0, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(emsim::ks_statistic(sample, [&](double x) { return d.cdf(x); }));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KsStatistic)->RangeMultiplier(8)->Range(8, 32768)->Complexity(benchmark::oNLogN);

}  // namespace

BENCHMARK_MAIN();
