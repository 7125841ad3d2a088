#include <benchmark/benchmark.h>

#include <random>

#include "synth.hpp"
#include "tmforge/decontam.hpp"

namespace {

struct Workload {
  tmforge::Corpus train;
  tmforge::Corpus test;
};

Workload workload(std::size_t n_train, std::size_t n_test) {
  std::mt19937_64 rng(n_train ^ n_test);
  const auto vocab = synth::vocabulary(rng, 5000);
  std::vector<tmforge::TransUnit> train, test;
  std::vector<std::string> sources;
  for (std::size_t i = 0; i < n_train; ++i) {
    sources.push_back(synth::sentence(rng, vocab));
    train.push_back(synth::unit("tr:" + std::to_string(i), sources.back()));
  }
  for (std::size_t i = 0; i < n_test; ++i) {
    const std::string s =
        rng() % 5 == 0 ? synth::mutate(rng, sources[rng() % sources.size()], vocab) : synth::sentence(rng, vocab);
    test.push_back(synth::unit("te:" + std::to_string(i), s));
  }
  return {tmforge::Corpus(std::move(train)), tmforge::Corpus(std::move(test))};
}

void BM_BuildIndex(benchmark::State& state) {
  const auto w = workload(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(tmforge::decontam::build_ngram_index(w.train, 5));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildIndex)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_Decontaminate(benchmark::State& state) {
  const auto w = workload(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(tmforge::decontam::decontaminate(w.test, w.train, {}, 1));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_Decontaminate)->Args({10000, 200})->Args({50000, 500})->Unit(benchmark::kMillisecond);

}  // namespace
