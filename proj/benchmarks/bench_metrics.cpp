#include <benchmark/benchmark.h>

#include <random>

#include "synth.hpp"
#include "tmforge/metrics.hpp"

namespace {

std::pair<std::vector<std::string>, std::vector<std::string>> corpus(std::size_t n) {
  std::mt19937_64 rng(n);
  const auto vocab = synth::vocabulary(rng, 2000);
  std::vector<std::string> hyps, refs;
  for (std::size_t i = 0; i < n; ++i) {
    refs.push_back(synth::sentence(rng, vocab) + ".");
    hyps.push_back(synth::mutate(rng, refs.back(), vocab));
  }
  return {hyps, refs};
}

void BM_Bleu(benchmark::State& state) {
  const auto [h, r] = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tmforge::metrics::bleu(h, r));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Bleu)->Arg(1837)->Unit(benchmark::kMillisecond);

void BM_ChrfPP(benchmark::State& state) {
  const auto [h, r] = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tmforge::metrics::chrf_pp(h, r));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ChrfPP)->Arg(1837)->Unit(benchmark::kMillisecond);

void BM_Ter(benchmark::State& state) {
  const auto [h, r] = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tmforge::metrics::ter(h, r));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Ter)->Arg(1837)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
