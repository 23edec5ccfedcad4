#include <benchmark/benchmark.h>

#include "wallcoord/oracle.hpp"

using namespace wallcoord;

namespace {

const std::vector<MissionSpec>& corpus() {
  static const std::vector<MissionSpec> c = seeded_corpus();
  return c;
}

void BM_GapStudySerial(benchmark::State& state) {
  const auto rows = table_rows();
  for (auto _ : state) benchmark::DoNotOptimize(gap_study_serial(corpus(), rows));
}

void BM_GapStudyParallel(benchmark::State& state) {
  const auto rows = table_rows();
  for (auto _ : state) benchmark::DoNotOptimize(gap_study(corpus(), rows));
}

void BM_ExhaustiveOneMission(benchmark::State& state) {
  const MissionSpec s = random_mission(1, static_cast<int>(state.range(0)), kCorpusAgents);
  for (auto _ : state) benchmark::DoNotOptimize(exhaustive_optimal(s, Criteria{}));
}

}  // namespace

BENCHMARK(BM_GapStudySerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GapStudyParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ExhaustiveOneMission)->DenseRange(3, kOracleMaxBricks)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
