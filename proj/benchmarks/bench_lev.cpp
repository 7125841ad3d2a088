#include <benchmark/benchmark.h>

#include <random>

#include "synth.hpp"
#include "tmforge/decontam.hpp"
#include "tmforge/text.hpp"

namespace {

std::pair<std::u32string, std::u32string> pair_of_length(std::size_t words) {
  std::mt19937_64 rng(words);
  const auto vocab = synth::vocabulary(rng, 500);
  std::string a, b;
  for (std::size_t i = 0; i < words; ++i) a += (i ? " " : "") + vocab[rng() % vocab.size()];
  b = synth::mutate(rng, a, vocab);
  return {tmforge::text::decode_utf8(a), tmforge::text::decode_utf8(b)};
}

void BM_LevDistance(benchmark::State& state) {
  const auto [a, b] = pair_of_length(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tmforge::decontam::lev_distance(a, b));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_LevDistance)->Arg(4)->Arg(16)->Arg(64);

void BM_LevDistanceBounded(benchmark::State& state) {
  const auto [a, b] = pair_of_length(static_cast<std::size_t>(state.range(0)));
  const std::size_t bound = std::max(a.size(), b.size()) / 4;
  for (auto _ : state) benchmark::DoNotOptimize(tmforge::decontam::lev_distance_bounded(a, b, bound));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_LevDistanceBounded)->Arg(4)->Arg(16)->Arg(64);

}  // namespace
