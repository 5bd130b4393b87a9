#include <benchmark/benchmark.h>

#include "chronoqa/dates.h"
#include "chronoqa/metrics.h"
#include "chronoqa/temporal_expr.h"
#include "chronoqa/transform.h"
#include "chronoqa/trust.h"

namespace {

using namespace chronoqa;

QaItem corradi() {
  QaItem q;
  q.id = "corradi";
  q.question = "Bernardo Corradi played for which team in 2006?";
  q.gold_answers = {"Fiorentina"};
  q.year_ref = detect_year_reference(q.question);
  return q;
}

void BM_ParseDate(benchmark::State& state) {
  const char* inputs[] = {"July 18, 1956", "10th of July, 1806.", "28/3/1941", "20111104",
                          "The event occurred on 23-25-2020 (DD-MM-YYYY).", "Dec, 2019"};
  for (auto _ : state) {
    for (const char* s : inputs) benchmark::DoNotOptimize(parse_date(s));
  }
  state.SetItemsProcessed(state.iterations() * 6);
}
BENCHMARK(BM_ParseDate);

void BM_Relativize(benchmark::State& state) {
  const QaItem item = corradi();
  for (auto _ : state) benchmark::DoNotOptimize(relativize(item, 2023));
}
BENCHMARK(BM_Relativize);

void BM_RemoveTime(benchmark::State& state) {
  const QaItem item = corradi();
  for (auto _ : state) benchmark::DoNotOptimize(remove_time(item));
}
BENCHMARK(BM_RemoveTime);

void BM_MoveTimeToFront(benchmark::State& state) {
  const QaItem item = corradi();
  for (auto _ : state) benchmark::DoNotOptimize(move_time_to_front(item));
}
BENCHMARK(BM_MoveTimeToFront);

void BM_Contains(benchmark::State& state) {
  const std::vector<std::string> gold{"Nobel Prize in Physics", "Nobel Prize"};
  const std::string pred(static_cast<std::size_t>(state.range(0)), 'x');
  const std::string text = pred + " He was awarded the Nobel Prize in Physics.";
  for (auto _ : state) benchmark::DoNotOptimize(contains(text, gold));
}
BENCHMARK(BM_Contains)->Arg(0)->Arg(1000);

void BM_Consistency(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(consistency("The Italian National Team", "Italy national football team"));
  }
}
BENCHMARK(BM_Consistency);

}  // namespace

BENCHMARK_MAIN();
