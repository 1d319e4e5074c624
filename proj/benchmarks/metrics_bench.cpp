#include <benchmark/benchmark.h>

#include <algorithm>

#include "moss/metrics.hpp"
#include "moss/synth.hpp"

namespace {

using namespace moss;

Corpus corpus(const char* task, int n) {
  const auto schema = TaskSchema::by_name(task);
  GenConfig g;
  g.task = task;
  g.n_dialogs = n;
  return generate(schema, make_kb(schema, 1), g);
}

void BM_generate(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(corpus(state.range(0) ? "complex" : "simple", 100));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_generate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_corpus_bleu(benchmark::State& state) {
  const Corpus c = corpus("simple", static_cast<int>(state.range(0)));
  std::vector<Tokens> refs;
  for (const auto& d : c)
    for (const auto& t : d.turns) refs.push_back(*t.resp);
  auto cands = refs;
  for (auto& t : cands) std::reverse(t.begin(), t.end());
  for (auto _ : state) benchmark::DoNotOptimize(corpus_bleu(cands, refs));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(refs.size()));
}
BENCHMARK(BM_corpus_bleu)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_evaluate(benchmark::State& state) {
  const auto schema = TaskSchema::complex();
  const Corpus c = corpus("complex", 200);
  const Predictions p = gold_predictions(c);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(p, c, schema));
}
BENCHMARK(BM_evaluate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
